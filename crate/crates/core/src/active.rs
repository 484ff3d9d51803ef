//! Query strategies and the retraining loop.
//!
//! The active loop owns the full attack/defense procedure: seed a model from
//! an initial set, then repeatedly construct a batch of challenges at a
//! target distance from the current hyperplane, query the chain once per
//! challenge, and refit. Near-boundary construction (k = 0) is the fast
//! attack; far-from-boundary construction (k around 5) produces the
//! low-information sets a defender could publish. Passive baselines
//! (uniform random, or a Hadamard prefix followed by uniform random) share
//! the same evaluation path so the curves are directly comparable.

use rand::Rng;

use crate::challenge::{Challenge, CrpSet};
use crate::error::{Error, Result};
use crate::hadamard::hadamard_challenge_set;
use crate::learner::{train, Fit, IncrementalTrainer, Learner, TrainConfig};
use crate::model::LinearModel;
use crate::puf::{ArbiterPuf, NoiseModel};
use crate::synth::{random_challenge, random_challenges};

/// Where a passive (model-independent) run draws its challenges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassiveSource {
    /// Uniform random challenges throughout.
    Random,
    /// The full Hadamard challenge set first (or a prefix of it, if fewer
    /// challenges are requested), then uniform random ones.
    HadamardThenRandom,
}

/// How a trace's challenges were chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    PassiveRandom,
    PassiveHadamard,
    Active {
        k: f64,
        batch: usize,
        initial: usize,
    },
}

/// Run metadata carried alongside a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub learner: Learner,
    pub noise_p: f64,
    pub strategy: Strategy,
}

/// Model state and held-out accuracy recorded at one CRP count.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub crp_count: usize,
    pub test_accuracy: f64,
    pub model: LinearModel,
}

/// One learning run: the recorded checkpoints plus every queried pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningTrace {
    pub params: TraceParams,
    pub checkpoints: Vec<Checkpoint>,
    pub crps: CrpSet,
}

/// Mean held-out accuracy of `model` against the chain's noiseless responses
/// on `eval_size` fresh uniform challenges.
pub fn evaluate_model_accuracy<R: Rng + ?Sized>(
    model: &LinearModel,
    puf: &ArbiterPuf,
    eval_size: usize,
    rng: &mut R,
) -> Result<f64> {
    if eval_size == 0 {
        return Err(Error::InvalidParameter(
            "evaluation needs at least one challenge".into(),
        ));
    }
    let mut hits = 0usize;
    for _ in 0..eval_size {
        let c = random_challenge(puf.n(), rng)?;
        if model.predict(&c)? == puf.respond(&c, rng)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / eval_size as f64)
}

fn validate_checkpoints(checkpoints: &[usize], minimum: usize) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one checkpoint is required".into(),
        ));
    }
    if checkpoints[0] < minimum {
        return Err(Error::InvalidParameter(format!(
            "first checkpoint {} is below the initial set size {minimum}",
            checkpoints[0]
        )));
    }
    for pair in checkpoints.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidParameter(format!(
                "checkpoints must be strictly increasing, got {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

/// Trains on a growing prefix of model-independent challenges, recording a
/// checkpoint at each requested CRP count. Every challenge is queried
/// exactly once; each checkpoint's training set is a prefix of the next.
pub fn run_passive<R: Rng + ?Sized>(
    puf: &ArbiterPuf,
    noise: NoiseModel,
    source: PassiveSource,
    checkpoints: &[usize],
    config: &TrainConfig,
    eval_size: usize,
    rng: &mut R,
) -> Result<LearningTrace> {
    validate_checkpoints(checkpoints, 1)?;
    noise.validate()?;
    let n = puf.n();
    let total = *checkpoints.last().expect("validated non-empty");

    let challenges = match source {
        PassiveSource::Random => random_challenges(n, total, rng)?,
        PassiveSource::HadamardThenRandom => {
            let mut set = hadamard_challenge_set(n, total.min(n))?;
            set.extend(random_challenges(n, total - set.len(), rng)?);
            set
        }
    };

    let mut trainer = IncrementalTrainer::new(n, *config)?;
    let mut recorded = Vec::with_capacity(checkpoints.len());
    let mut queried = 0usize;
    for &target in checkpoints {
        while queried < target {
            let c = &challenges[queried];
            let r = puf.respond_noisy(c, noise, rng)?;
            trainer.append(c, r)?;
            queried += 1;
        }
        let fit = trainer.fit(rng)?;
        let accuracy = evaluate_model_accuracy(&fit.model, puf, eval_size, rng)?;
        recorded.push(Checkpoint {
            crp_count: queried,
            test_accuracy: accuracy,
            model: fit.model,
        });
    }

    Ok(LearningTrace {
        params: TraceParams {
            learner: config.learner,
            noise_p: noise.flip_probability(),
            strategy: match source {
                PassiveSource::Random => Strategy::PassiveRandom,
                PassiveSource::HadamardThenRandom => Strategy::PassiveHadamard,
            },
        },
        checkpoints: recorded,
        crps: trainer.data().clone(),
    })
}

/// Constructs one query challenge for the current model. Targets that the
/// current weight vector cannot realize (k beyond its reach) fall back to a
/// uniform random challenge so a run never dies mid-flight; for the k values
/// used in practice this is a rare early-model corner case.
fn next_query<R: Rng + ?Sized>(
    model: &LinearModel,
    n: usize,
    k: f64,
    rng: &mut R,
) -> Result<Challenge> {
    match crate::synth::construct_challenge(model, k, rng) {
        Ok(c) => Ok(c),
        Err(Error::UnreachableTarget { .. }) => random_challenge(n, rng),
        Err(other) => Err(other),
    }
}

/// The pool-free active loop: fit on `initial`, then repeatedly construct a
/// batch of challenges at distance multiple `k` from the current hyperplane,
/// query each exactly once, append, and refit. Batches truncate so that
/// every requested checkpoint count is hit exactly; a checkpoint records the
/// model and its held-out accuracy at that CRP count.
// The flat parameter list mirrors the experiment vocabulary one-to-one;
// bundling it into a struct would just move the same nine names around.
#[allow(clippy::too_many_arguments)]
pub fn run_active<R: Rng + ?Sized>(
    puf: &ArbiterPuf,
    noise: NoiseModel,
    initial: Vec<Challenge>,
    k: f64,
    batch: usize,
    checkpoints: &[usize],
    config: &TrainConfig,
    eval_size: usize,
    rng: &mut R,
) -> Result<LearningTrace> {
    if initial.is_empty() {
        return Err(Error::InvalidParameter(
            "the active loop needs a non-empty initial set".into(),
        ));
    }
    if batch == 0 {
        return Err(Error::InvalidParameter(
            "batch size must be at least 1".into(),
        ));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distance multiple must be non-negative and finite, got {k}"
        )));
    }
    validate_checkpoints(checkpoints, initial.len())?;
    noise.validate()?;

    let n = puf.n();
    let mut trainer = IncrementalTrainer::new(n, *config)?;
    for c in &initial {
        let r = puf.respond_noisy(c, noise, rng)?;
        trainer.append(c, r)?;
    }
    let mut fit: Fit = trainer.fit(rng)?;
    let mut recorded = Vec::with_capacity(checkpoints.len());
    if checkpoints[0] == trainer.len() {
        let accuracy = evaluate_model_accuracy(&fit.model, puf, eval_size, rng)?;
        recorded.push(Checkpoint {
            crp_count: trainer.len(),
            test_accuracy: accuracy,
            model: fit.model.clone(),
        });
    }

    for &target in checkpoints {
        while trainer.len() < target {
            let step = batch.min(target - trainer.len());
            for _ in 0..step {
                let c = next_query(&fit.model, n, k, rng)?;
                let r = puf.respond_noisy(&c, noise, rng)?;
                trainer.append(&c, r)?;
            }
            fit = trainer.fit(rng)?;
        }
        if trainer.len() == target
            && recorded.last().map(|c: &Checkpoint| c.crp_count) != Some(target)
        {
            let accuracy = evaluate_model_accuracy(&fit.model, puf, eval_size, rng)?;
            recorded.push(Checkpoint {
                crp_count: target,
                test_accuracy: accuracy,
                model: fit.model.clone(),
            });
        }
    }

    Ok(LearningTrace {
        params: TraceParams {
            learner: config.learner,
            noise_p: noise.flip_probability(),
            strategy: Strategy::Active {
                k,
                batch,
                initial: initial.len(),
            },
        },
        checkpoints: recorded,
        crps: trainer.data().clone(),
    })
}

/// Runs the defender's slow-learning generator: an active loop at large `k`
/// whose constructed challenges all sit far from the (internally estimated)
/// hyperplane. Returns the `count` constructed challenges with their true
/// noiseless responses — the set a defender would hand out — excluding the
/// private initial set.
pub fn generate_adversarial_set<R: Rng + ?Sized>(
    puf: &ArbiterPuf,
    initial_size: usize,
    k: f64,
    count: usize,
    batch: usize,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<CrpSet> {
    if initial_size == 0 {
        return Err(Error::InvalidParameter(
            "the generator needs a non-empty initial set".into(),
        ));
    }
    if count == 0 {
        return Err(Error::InvalidParameter(
            "the generated set needs at least one challenge".into(),
        ));
    }
    if batch == 0 {
        return Err(Error::InvalidParameter(
            "batch size must be at least 1".into(),
        ));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distance multiple must be non-negative and finite, got {k}"
        )));
    }

    let n = puf.n();
    let mut trainer = IncrementalTrainer::new(n, *config)?;
    for c in random_challenges(n, initial_size, rng)? {
        let r = puf.respond(&c, rng)?;
        trainer.append(&c, r)?;
    }
    let mut fit = trainer.fit(rng)?;

    let mut published = CrpSet::new(n)?;
    while published.len() < count {
        let step = batch.min(count - published.len());
        for _ in 0..step {
            let c = next_query(&fit.model, n, k, rng)?;
            let r = puf.respond(&c, rng)?;
            trainer.append(&c, r)?;
            published.push(c, r)?;
        }
        fit = trainer.fit(rng)?;
    }
    Ok(published)
}

/// Internal versus external predictivity of a published set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationReport {
    pub train_prefix: usize,
    /// Accuracy on the remainder of the published set itself.
    pub internal_accuracy: f64,
    /// Accuracy against the chain on fresh uniform challenges.
    pub external_accuracy: f64,
}

/// Trains on the first `train_prefix` pairs of a published set and measures
/// how well that model predicts (a) the rest of the set and (b) the chain
/// itself. A large gap is the signature of an adversarial set: internally
/// consistent, externally worthless.
pub fn evaluate_recognition<R: Rng + ?Sized>(
    set: &CrpSet,
    train_prefix: usize,
    puf: &ArbiterPuf,
    config: &TrainConfig,
    eval_size: usize,
    rng: &mut R,
) -> Result<EvaluationReport> {
    if train_prefix == 0 || train_prefix >= set.len() {
        return Err(Error::InvalidParameter(format!(
            "train prefix must lie strictly between 0 and the set size {}, got {train_prefix}",
            set.len()
        )));
    }
    let fit = train(&set.prefix(train_prefix)?, config, rng)?;
    let internal = fit.model.accuracy(&set.suffix(train_prefix)?)?;
    let external = evaluate_model_accuracy(&fit.model, puf, eval_size, rng)?;
    Ok(EvaluationReport {
        train_prefix,
        internal_accuracy: internal,
        external_accuracy: external,
    })
}

/// One aggregated point on an averaged learning curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub crp_count: usize,
    pub mean_accuracy: f64,
    pub std_error: f64,
}

/// A learning curve averaged over replicas, for one distance multiple.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedTrace {
    pub k: f64,
    pub points: Vec<TracePoint>,
}

pub(crate) fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

/// Runs the active loop at each `k` on `puf_count` freshly sampled chains
/// (unit weight sigma) and averages the accuracy curves pointwise.
#[allow(clippy::too_many_arguments)]
pub fn k_sweep<R: Rng + ?Sized>(
    puf_count: usize,
    n: usize,
    ks: &[f64],
    noise: NoiseModel,
    initial_size: usize,
    batch: usize,
    checkpoints: &[usize],
    config: &TrainConfig,
    eval_size: usize,
    rng: &mut R,
) -> Result<Vec<AveragedTrace>> {
    if puf_count == 0 {
        return Err(Error::InvalidParameter(
            "the sweep needs at least one replica".into(),
        ));
    }
    if ks.is_empty() {
        return Err(Error::InvalidParameter(
            "the sweep needs at least one distance multiple".into(),
        ));
    }
    if initial_size == 0 {
        return Err(Error::InvalidParameter(
            "the sweep needs a non-empty initial set".into(),
        ));
    }
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut per_replica: Vec<Vec<f64>> = Vec::with_capacity(puf_count);
        for _ in 0..puf_count {
            let puf = ArbiterPuf::sample(n, 1.0, rng)?;
            let initial = random_challenges(n, initial_size, rng)?;
            let trace = run_active(
                &puf,
                noise,
                initial,
                k,
                batch,
                checkpoints,
                config,
                eval_size,
                rng,
            )?;
            per_replica.push(trace.checkpoints.iter().map(|c| c.test_accuracy).collect());
        }
        let points = (0..checkpoints.len())
            .map(|i| {
                let column: Vec<f64> = per_replica.iter().map(|row| row[i]).collect();
                let (mean, se) = mean_and_std_error(&column);
                TracePoint {
                    crp_count: checkpoints[i],
                    mean_accuracy: mean,
                    std_error: se,
                }
            })
            .collect();
        out.push(AveragedTrace { k, points });
    }
    Ok(out)
}
