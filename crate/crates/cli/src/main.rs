//! `puflab` — command-line harness around the arbiter-PUF laboratory.
//!
//! Subcommands: `gen` (challenge sets, PUF instances, adversarial CRP sets),
//! `run` (one experiment from a key=value config file plus flag overrides),
//! `reproduce` (built-in reference experiments with embedded expected values
//! and tolerance bands), and `eval` (score stored models or CRP sets against
//! a stored PUF).
//!
//! Exit codes: 0 on success, 2 when a `reproduce` band check fails, 1 on any
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use puflab_core::{
    evaluate_model_accuracy, evaluate_recognition, generate_adversarial_set,
    hadamard_challenge_set, io, random_challenges, reproduce, ArbiterPuf, Error, ExperimentSpec,
    Learner, ReproduceOptions, ReproduceTarget, Result, TrainConfig,
};

#[derive(Parser)]
#[command(
    name = "puflab",
    version,
    about = "Model-building attacks on simulated arbiter PUFs",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate challenge sets, PUF instances, or adversarial CRP sets.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run one experiment and write its trace and summary CSVs.
    Run(RunArgs),
    /// Rerun built-in reference experiments and check their bands.
    Reproduce(ReproduceArgs),
    /// Score stored models or CRP sets against a stored PUF.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Uniformly random challenges.
    Random {
        /// Challenge stages.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Number of challenges.
        #[arg(long)]
        count: usize,
        /// Random seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output challenge file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Leading rows of the Sylvester Hadamard challenge set (n must be a
    /// power of two; the rows are pairwise uncorrelated).
    Hadamard {
        /// Challenge stages.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Number of rows (defaults to n, the full set).
        #[arg(long)]
        count: Option<usize>,
        /// Output challenge file.
        #[arg(long)]
        out: PathBuf,
    },
    /// A fresh PUF instance, stored as its stage-weight model.
    Puf {
        /// Challenge stages.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Random seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Stage-weight standard deviation.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Output PUF file.
        #[arg(long)]
        out: PathBuf,
    },
    /// A slow-learning CRP set: challenges constructed far from the
    /// defender's internal model so the set has poor generalization value.
    /// Writes `puf.txt` and `set.crp` under the output directory.
    Adversarial {
        /// Challenge stages.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Random seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Private random challenges used to fit the first internal model.
        #[arg(long, default_value_t = 40)]
        initial: usize,
        /// Distance multiple for constructed challenges.
        #[arg(long, default_value_t = 5.0)]
        k: f64,
        /// Number of constructed challenge-response pairs to emit.
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        /// Challenges constructed between internal refits.
        #[arg(long, default_value_t = 20)]
        m: usize,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in experiment name (table1-active, table1-random,
    /// table3-active, table3-random) or a label for a custom run.
    name: Option<String>,
    /// Flat key=value config file, applied before flag overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Challenge stages.
    #[arg(long)]
    n: Option<usize>,
    /// svm or lr.
    #[arg(long)]
    learner: Option<String>,
    /// passive-random, passive-hadamard, or active.
    #[arg(long)]
    mode: Option<String>,
    /// Distance multiple for constructed challenges (active mode).
    #[arg(long)]
    k: Option<f64>,
    /// Challenges constructed between retrains (active mode).
    #[arg(long)]
    m: Option<usize>,
    /// Random challenges queried before the first fit (active mode).
    #[arg(long)]
    initial: Option<usize>,
    /// Response flip probability.
    #[arg(long)]
    noise: Option<f64>,
    /// CRP counts at which accuracy is measured, comma-separated.
    #[arg(long)]
    checkpoints: Option<String>,
    /// Independent PUF instances to average over.
    #[arg(long)]
    replicas: Option<usize>,
    /// Base seed; replica r derives its own stream from (seed, r).
    #[arg(long)]
    seed: Option<u64>,
    /// Fresh random challenges per accuracy measurement.
    #[arg(long)]
    eval_size: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Targets: table1, table3, table4, fig3, fig4, fig6, fig7-analog,
    /// fig8, or "all".
    #[arg(required = true)]
    targets: Vec<String>,
    /// Output directory (each target writes under its own subdirectory).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the target's default replica count.
    #[arg(long)]
    replicas: Option<usize>,
    /// Override the target's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the held-out evaluation size.
    #[arg(long)]
    eval_size: Option<usize>,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Accuracy of a stored model against a stored PUF on fresh random
    /// challenges.
    Accuracy {
        /// Model file.
        #[arg(long)]
        model: PathBuf,
        /// PUF file.
        #[arg(long)]
        puf: PathBuf,
        /// Fresh random challenges to score on.
        #[arg(long, default_value_t = 10_000)]
        eval_size: usize,
        /// Random seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Train on a prefix of a stored CRP set and report internal accuracy
    /// (the rest of the set) versus external accuracy (fresh random
    /// challenges labeled by the PUF).
    Recognition {
        /// CRP file.
        #[arg(long)]
        crps: PathBuf,
        /// PUF file.
        #[arg(long)]
        puf: PathBuf,
        /// Training prefix length.
        #[arg(long, default_value_t = 500)]
        prefix: usize,
        /// svm or lr.
        #[arg(long, default_value = "svm")]
        learner: String,
        /// Fresh random challenges for the external score.
        #[arg(long, default_value_t = 10_000)]
        eval_size: usize,
        /// Random seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Gen(gen) => run_gen(gen).map(|()| 0),
        Command::Run(args) => run_experiment_command(args).map(|()| 0),
        Command::Reproduce(args) => run_reproduce(args),
        Command::Eval(eval) => run_eval(eval).map(|()| 0),
    }
}

fn run_gen(gen: GenCommand) -> Result<()> {
    match gen {
        GenCommand::Random {
            n,
            count,
            seed,
            out,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let challenges = random_challenges(n, count, &mut rng)?;
            io::write_challenges(&out, &challenges)?;
            println!(
                "wrote {count} random challenges (n={n}) to {}",
                out.display()
            );
        }
        GenCommand::Hadamard { n, count, out } => {
            let count = count.unwrap_or(n);
            let challenges = hadamard_challenge_set(n, count)?;
            io::write_challenges(&out, &challenges)?;
            println!(
                "wrote {count} Hadamard challenges (n={n}) to {}",
                out.display()
            );
        }
        GenCommand::Puf {
            n,
            seed,
            sigma,
            out,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let puf = ArbiterPuf::sample(n, sigma, &mut rng)?;
            io::write_puf(&out, &puf)?;
            println!(
                "wrote PUF instance (n={n}, seed={seed}) to {}",
                out.display()
            );
        }
        GenCommand::Adversarial {
            n,
            seed,
            initial,
            k,
            count,
            m,
            out,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let puf = ArbiterPuf::sample(n, 1.0, &mut rng)?;
            let set = generate_adversarial_set(
                &puf,
                initial,
                k,
                count,
                m,
                &TrainConfig::svm(),
                &mut rng,
            )?;
            std::fs::create_dir_all(&out)?;
            let puf_path = out.join("puf.txt");
            let set_path = out.join("set.crp");
            io::write_puf(&puf_path, &puf)?;
            io::write_crps(&set_path, &set)?;
            println!("wrote {} and {}", puf_path.display(), set_path.display());
        }
    }
    Ok(())
}

fn run_experiment_command(args: RunArgs) -> Result<()> {
    let mut spec = match &args.name {
        Some(name) => {
            ExperimentSpec::builtin(name).unwrap_or_else(|| ExperimentSpec::active_base(name))
        }
        None => ExperimentSpec::active_base("custom"),
    };
    if let Some(config) = &args.config {
        spec.apply_config_file(config)?;
    }
    let overrides: [(&str, Option<String>); 11] = [
        ("n", args.n.map(|v| v.to_string())),
        ("learner", args.learner),
        ("mode", args.mode),
        ("k", args.k.map(|v| v.to_string())),
        ("m", args.m.map(|v| v.to_string())),
        ("initial", args.initial.map(|v| v.to_string())),
        ("noise", args.noise.map(|v| v.to_string())),
        ("checkpoints", args.checkpoints),
        ("replicas", args.replicas.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
        ("eval_size", args.eval_size.map(|v| v.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            spec.set(key, &value)?;
        }
    }

    let result = puflab_core::run_experiment(&spec)?;
    std::fs::create_dir_all(&args.out)?;
    let trace_path = args.out.join(format!("{}_trace.csv", spec.name));
    let summary_path = args.out.join(format!("{}_summary.csv", spec.name));
    io::write_trace_csv(&trace_path, &result)?;
    io::write_summary_csv(&summary_path, &result.summary)?;

    println!(
        "{}: n={} learner={} mode={} replicas={} ({:.1}s)",
        spec.name,
        spec.n,
        spec.learner.as_str(),
        spec.mode.as_str(),
        spec.replicas,
        result.wall_seconds
    );
    for point in &result.summary {
        println!(
            "  {} CRPs: accuracy {:.4} +- {:.4} (error {:.2}%)",
            point.crp_count,
            point.mean_accuracy,
            point.std_error,
            100.0 * (1.0 - point.mean_accuracy)
        );
    }
    println!(
        "wrote {} and {}",
        trace_path.display(),
        summary_path.display()
    );
    Ok(())
}

fn run_reproduce(args: ReproduceArgs) -> Result<u8> {
    let mut targets = Vec::new();
    for name in &args.targets {
        if name == "all" {
            targets.extend(ReproduceTarget::ALL);
        } else {
            targets.push(ReproduceTarget::parse(name)?);
        }
    }
    targets.dedup();

    let options = ReproduceOptions {
        out_dir: args.out,
        replicas: args.replicas,
        seed: args.seed,
        eval_size: args.eval_size,
    };
    let mut all_passed = true;
    for target in targets {
        let report = reproduce(target, &options)?;
        all_passed &= report.passed;
        for line in &report.lines {
            println!("{line}");
        }
        for file in &report.files {
            println!("wrote {}", file.display());
        }
        println!(
            "{}: {}",
            target.as_str(),
            if report.passed { "PASS" } else { "FAIL" }
        );
    }
    Ok(if all_passed { 0 } else { 2 })
}

fn run_eval(eval: EvalCommand) -> Result<()> {
    match eval {
        EvalCommand::Accuracy {
            model,
            puf,
            eval_size,
            seed,
        } => {
            let model = io::read_model(&model)?;
            let puf = io::read_puf(&puf)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let accuracy = evaluate_model_accuracy(&model, &puf, eval_size, &mut rng)?;
            println!("accuracy {accuracy:.6}");
        }
        EvalCommand::Recognition {
            crps,
            puf,
            prefix,
            learner,
            eval_size,
            seed,
        } => {
            let set = io::read_crps(&crps)?;
            let puf = io::read_puf(&puf)?;
            let learner = Learner::parse(&learner)?;
            if puf.n() != set.n() {
                return Err(Error::DimensionMismatch {
                    expected: puf.n(),
                    got: set.n(),
                });
            }
            let config = TrainConfig::for_learner(learner);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = evaluate_recognition(&set, prefix, &puf, &config, eval_size, &mut rng)?;
            println!(
                "internal {:.6} external {:.6} (trained on {} of {} pairs)",
                report.internal_accuracy,
                report.external_accuracy,
                report.train_prefix,
                set.len()
            );
        }
    }
    Ok(())
}
