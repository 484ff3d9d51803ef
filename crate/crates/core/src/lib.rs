//! A laboratory for modeling attacks on simulated arbiter PUFs.
//!
//! An arbiter PUF answers ±1 challenges through a hidden linear threshold
//! function, which makes it learnable from challenge-response pairs. This
//! crate simulates such chains and implements both sides of that arms race
//! without ever needing a candidate-challenge pool:
//!
//! - [`hadamard`] derives a pairwise-uncorrelated fixed challenge set from
//!   Sylvester Hadamard matrices — the information-optimal opening book.
//! - [`synth`] constructs challenges directly at a chosen distance from a
//!   model hyperplane: at the boundary they are maximally informative (the
//!   attack), far away they are nearly worthless to outsiders (the defense).
//! - [`learner`] provides the two from-scratch model builders the loops use:
//!   a dual-coordinate-descent linear SVM and Newton-solved logistic
//!   regression.
//! - [`active`] wires these into query-retrain loops, adversarial set
//!   generation, and recognition scoring.
//! - [`experiment`] and [`reproduce`] fan experiments out over replicas
//!   deterministically and rerun the crate's reference grids against their
//!   embedded expected values.

pub mod active;
pub mod challenge;
pub mod error;
pub mod experiment;
pub mod hadamard;
pub mod io;
pub mod learner;
pub mod model;
pub mod puf;
pub mod reproduce;
pub mod synth;

pub use active::{
    evaluate_model_accuracy, evaluate_recognition, generate_adversarial_set, k_sweep, run_active,
    run_passive, AveragedTrace, Checkpoint, EvaluationReport, LearningTrace, PassiveSource,
    Strategy, TraceParams, TracePoint,
};
pub use challenge::{Challenge, CrpSet};
pub use error::{Error, Result};
pub use experiment::{
    replica_rng, run_experiment, CheckpointSummary, ExperimentResult, ExperimentSpec, Mode,
};
pub use hadamard::{hadamard_challenge_set, HadamardMatrix};
pub use learner::{
    logistic_objective_grad, train, train_lr, train_svm, BiasMode, Fit, FitReport, Learner,
    TrainConfig,
};
pub use model::LinearModel;
pub use puf::{ArbiterPuf, NoiseModel};
pub use reproduce::{reproduce, ReproduceOptions, ReproduceReport, ReproduceTarget};
pub use synth::{construct_challenge, random_challenge, random_challenges};
