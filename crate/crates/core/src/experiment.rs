//! Multi-replica experiments with deterministic seed fan-out.
//!
//! Each replica samples a fresh chain and runs one learning trace. Replica
//! `r` of an experiment seeded with `s` always sees the generator stream
//! `(s, r)`, so results are byte-identical regardless of how many worker
//! threads execute the replicas or in which order they finish.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::active::{mean_and_std_error, run_active, run_passive, PassiveSource};
use crate::error::{Error, Result};
use crate::learner::{Learner, TrainConfig};
use crate::puf::{ArbiterPuf, NoiseModel};
use crate::synth::random_challenges;

/// Challenge selection strategy for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    PassiveRandom,
    PassiveHadamard,
    Active,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::PassiveRandom => "passive-random",
            Mode::PassiveHadamard => "passive-hadamard",
            Mode::Active => "active",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "passive-random" => Ok(Mode::PassiveRandom),
            "passive-hadamard" => Ok(Mode::PassiveHadamard),
            "active" => Ok(Mode::Active),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode {other:?}, expected \"passive-random\", \"passive-hadamard\", or \"active\""
            ))),
        }
    }
}

/// A complete experiment description: everything needed to rerun it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub n: usize,
    pub learner: Learner,
    pub mode: Mode,
    /// Distance multiple for constructed challenges (active mode only).
    pub k: f64,
    /// Challenges constructed between retrains (active mode only).
    pub batch: usize,
    /// Random challenges queried before the first fit (active mode only).
    pub initial_size: usize,
    /// Response flip probability; zero means noiseless queries.
    pub noise_p: f64,
    /// CRP counts at which accuracy is measured.
    pub checkpoints: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    /// Fresh random challenges per accuracy measurement.
    pub eval_size: usize,
}

impl ExperimentSpec {
    /// The fast-attack shape: 64 stages, SVM, boundary construction from 60
    /// random seeds in batches of 20, measured at the usual five counts.
    pub fn active_base(name: &str) -> Self {
        Self {
            name: name.to_string(),
            n: 64,
            learner: Learner::Svm,
            mode: Mode::Active,
            k: 0.0,
            batch: 20,
            initial_size: 60,
            noise_p: 0.0,
            checkpoints: vec![200, 350, 550, 750, 1000],
            replicas: 50,
            seed: 1,
            eval_size: 10_000,
        }
    }

    /// Built-in reference experiments, addressable by name.
    pub fn builtin(name: &str) -> Option<Self> {
        let mut spec = Self::active_base(name);
        match name {
            "table1-active" => {}
            "table1-random" => spec.mode = Mode::PassiveRandom,
            "table3-active" => spec.noise_p = 0.035,
            "table3-random" => {
                spec.mode = Mode::PassiveRandom;
                spec.noise_p = 0.035;
            }
            _ => return None,
        }
        Some(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidParameter(
                "replicas must be at least 1".into(),
            ));
        }
        if self.eval_size == 0 {
            return Err(Error::InvalidParameter(
                "eval_size must be at least 1".into(),
            ));
        }
        if !(self.noise_p.is_finite() && (0.0..=1.0).contains(&self.noise_p)) {
            return Err(Error::InvalidParameter(format!(
                "noise probability must lie in [0, 1], got {}",
                self.noise_p
            )));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one checkpoint is required".into(),
            ));
        }
        if self.mode == Mode::Active {
            if self.batch == 0 {
                return Err(Error::InvalidParameter(
                    "batch size must be at least 1".into(),
                ));
            }
            if self.initial_size == 0 {
                return Err(Error::InvalidParameter(
                    "initial set size must be at least 1".into(),
                ));
            }
            if !(self.k.is_finite() && self.k >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "distance multiple must be non-negative and finite, got {}",
                    self.k
                )));
            }
        }
        Ok(())
    }

    /// Applies one `key=value` setting (the config-file / CLI-override
    /// vocabulary).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad =
            |what: &str| Error::InvalidParameter(format!("could not parse {what} value {value:?}"));
        match key {
            "name" => self.name = value.to_string(),
            "n" => self.n = value.parse().map_err(|_| bad("n"))?,
            "learner" => self.learner = Learner::parse(value)?,
            "mode" => self.mode = Mode::parse(value)?,
            "k" => self.k = value.parse().map_err(|_| bad("k"))?,
            "m" | "batch" => self.batch = value.parse().map_err(|_| bad("batch"))?,
            "initial" => self.initial_size = value.parse().map_err(|_| bad("initial"))?,
            "noise" => self.noise_p = value.parse().map_err(|_| bad("noise"))?,
            "replicas" => self.replicas = value.parse().map_err(|_| bad("replicas"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "eval_size" => self.eval_size = value.parse().map_err(|_| bad("eval_size"))?,
            "checkpoints" => {
                let parsed: std::result::Result<Vec<usize>, _> =
                    value.split(',').map(|t| t.trim().parse()).collect();
                self.checkpoints = parsed.map_err(|_| bad("checkpoints"))?;
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown experiment setting {other:?}"
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key=value` config file (one setting per line; blank
    /// lines and `#` comments ignored).
    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(())
    }
}

/// Accuracy summary at one CRP count, aggregated over replicas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointSummary {
    pub crp_count: usize,
    pub mean_accuracy: f64,
    pub std_error: f64,
}

/// The outcome of a multi-replica experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub summary: Vec<CheckpointSummary>,
    /// `replica_accuracy[r][i]` is replica `r`'s accuracy at checkpoint `i`.
    pub replica_accuracy: Vec<Vec<f64>>,
    pub wall_seconds: f64,
}

/// The dedicated generator stream for one replica of a seeded experiment.
pub fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

/// Runs every replica (in parallel when worker threads are available) and
/// aggregates the per-checkpoint accuracies.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let start = Instant::now();
    let noise = if spec.noise_p > 0.0 {
        NoiseModel::flip(spec.noise_p)?
    } else {
        NoiseModel::Noiseless
    };
    let config = TrainConfig::for_learner(spec.learner);

    let replica_accuracy: Vec<Vec<f64>> = (0..spec.replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let mut rng = replica_rng(spec.seed, r);
            let puf = ArbiterPuf::sample(spec.n, 1.0, &mut rng)?;
            let trace = match spec.mode {
                Mode::PassiveRandom => run_passive(
                    &puf,
                    noise,
                    PassiveSource::Random,
                    &spec.checkpoints,
                    &config,
                    spec.eval_size,
                    &mut rng,
                )?,
                Mode::PassiveHadamard => run_passive(
                    &puf,
                    noise,
                    PassiveSource::HadamardThenRandom,
                    &spec.checkpoints,
                    &config,
                    spec.eval_size,
                    &mut rng,
                )?,
                Mode::Active => {
                    let initial = random_challenges(spec.n, spec.initial_size, &mut rng)?;
                    run_active(
                        &puf,
                        noise,
                        initial,
                        spec.k,
                        spec.batch,
                        &spec.checkpoints,
                        &config,
                        spec.eval_size,
                        &mut rng,
                    )?
                }
            };
            Ok(trace.checkpoints.iter().map(|c| c.test_accuracy).collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = (0..spec.checkpoints.len())
        .map(|i| {
            let column: Vec<f64> = replica_accuracy.iter().map(|row| row[i]).collect();
            let (mean, se) = mean_and_std_error(&column);
            CheckpointSummary {
                crp_count: spec.checkpoints[i],
                mean_accuracy: mean,
                std_error: se,
            }
        })
        .collect();

    Ok(ExperimentResult {
        spec: spec.clone(),
        summary,
        replica_accuracy,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::active_base("tiny");
        spec.n = 16;
        spec.mode = Mode::PassiveRandom;
        spec.checkpoints = vec![1];
        spec.replicas = 1;
        spec.eval_size = 50;
        spec
    }

    #[test]
    fn single_point_experiment_runs() {
        let result = run_experiment(&tiny_spec()).unwrap();
        assert_eq!(result.summary.len(), 1);
        assert_eq!(result.summary[0].crp_count, 1);
        assert_eq!(result.replica_accuracy.len(), 1);
        assert!((0.0..=1.0).contains(&result.summary[0].mean_accuracy));
        assert_eq!(result.summary[0].std_error, 0.0);
    }

    #[test]
    fn builtins_exist_and_validate() {
        for name in [
            "table1-active",
            "table1-random",
            "table3-active",
            "table3-random",
        ] {
            let spec = ExperimentSpec::builtin(name).unwrap();
            spec.validate().unwrap();
            assert_eq!(spec.checkpoints, vec![200, 350, 550, 750, 1000]);
        }
        assert!(ExperimentSpec::builtin("table9").is_none());
        let noisy = ExperimentSpec::builtin("table3-active").unwrap();
        assert!((noisy.noise_p - 0.035).abs() < 1e-12);
    }

    #[test]
    fn identical_seeds_reproduce_identical_results() {
        let mut spec = tiny_spec();
        spec.mode = Mode::Active;
        spec.initial_size = 8;
        spec.batch = 5;
        spec.checkpoints = vec![8, 30];
        spec.replicas = 3;
        spec.eval_size = 100;
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a.replica_accuracy, b.replica_accuracy);
        assert_eq!(a.summary, b.summary);
    }

    #[test]
    fn different_seeds_differ() {
        let mut spec = tiny_spec();
        spec.checkpoints = vec![40];
        spec.replicas = 2;
        spec.eval_size = 500;
        let a = run_experiment(&spec).unwrap();
        spec.seed = 999;
        let b = run_experiment(&spec).unwrap();
        assert_ne!(a.replica_accuracy, b.replica_accuracy);
    }

    #[test]
    fn replica_streams_are_distinct() {
        use rand::Rng as _;
        let mut r0 = replica_rng(7, 0);
        let mut r1 = replica_rng(7, 1);
        let a: Vec<u64> = (0..8).map(|_| r0.random()).collect();
        let b: Vec<u64> = (0..8).map(|_| r1.random()).collect();
        assert_ne!(a, b);
        let mut r0_again = replica_rng(7, 0);
        let a_again: Vec<u64> = (0..8).map(|_| r0_again.random()).collect();
        assert_eq!(a, a_again);
    }

    #[test]
    fn settings_parse_and_reject() {
        let mut spec = ExperimentSpec::active_base("custom");
        spec.set("n", "128").unwrap();
        spec.set("learner", "lr").unwrap();
        spec.set("mode", "passive-hadamard").unwrap();
        spec.set("checkpoints", "10, 20, 30").unwrap();
        spec.set("noise", "0.035").unwrap();
        assert_eq!(spec.n, 128);
        assert_eq!(spec.learner, Learner::Lr);
        assert_eq!(spec.checkpoints, vec![10, 20, 30]);
        assert!(spec.set("n", "zebra").is_err());
        assert!(spec.set("flux", "1").is_err());
        assert!(spec.set("learner", "forest").is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = ExperimentSpec::active_base("bad");
        spec.noise_p = 1.5;
        assert!(spec.validate().is_err());
        let mut spec = ExperimentSpec::active_base("bad");
        spec.checkpoints.clear();
        assert!(spec.validate().is_err());
        let mut spec = ExperimentSpec::active_base("bad");
        spec.k = -2.0;
        assert!(spec.validate().is_err());
        let mut spec = ExperimentSpec::active_base("bad");
        spec.replicas = 0;
        assert!(spec.validate().is_err());
    }
}
