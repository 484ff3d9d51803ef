//! Model-building from challenge-response sets.
//!
//! Two from-scratch learners share one interface: a soft-margin linear SVM
//! solved in the dual by coordinate descent, and L2-regularized logistic
//! regression solved by damped Newton steps. Both consume encoded ±1
//! challenges directly — the features are already on a common scale — and
//! return a [`LinearModel`] plus a fit report.

mod logreg;
mod svm;

pub use logreg::logistic_objective_grad;

use rand::Rng;

use crate::challenge::{Challenge, CrpSet};
use crate::error::{Error, Result};
use crate::model::LinearModel;

/// Which learner to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Learner {
    Svm,
    Lr,
}

impl Learner {
    pub fn as_str(self) -> &'static str {
        match self {
            Learner::Svm => "svm",
            Learner::Lr => "lr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(Learner::Svm),
            "lr" => Ok(Learner::Lr),
            other => Err(Error::InvalidParameter(format!(
                "unknown learner {other:?}, expected \"svm\" or \"lr\""
            ))),
        }
    }
}

/// How the intercept is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasMode {
    /// Fit a free intercept alongside the weights (the default). Encoded
    /// challenges already carry a constant +1 coordinate, so this mostly
    /// matters for solver conditioning rather than expressiveness.
    Fitted,
    /// Pin the intercept to zero and classify by the weight vector alone.
    Zero,
}

/// Solver settings shared by both learners.
///
/// `regularization` is the hinge penalty weight C for the SVM (larger C fits
/// the data harder) and the ridge strength lambda for logistic regression
/// (larger lambda shrinks the weights harder).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learner: Learner,
    pub regularization: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub bias: BiasMode,
    /// Reuse the previous solution when refitting a grown training set
    /// (applies to the incremental loop; one-shot fits always start cold).
    pub warm_start: bool,
}

impl TrainConfig {
    /// SVM defaults: C = 1, stop when the largest projected-gradient
    /// violation in an epoch falls below 1e-3. The epoch cap is generous
    /// because a tolerance this tight needs on the order of a thousand
    /// epochs from a cold start (warm-started refits need only a few).
    pub fn svm() -> Self {
        Self {
            learner: Learner::Svm,
            regularization: 1.0,
            tolerance: 1e-3,
            max_iterations: 5000,
            bias: BiasMode::Fitted,
            warm_start: true,
        }
    }

    /// Logistic-regression defaults: lambda = 1e-4 (just enough ridge to
    /// keep separable fits finite), stop when the gradient norm falls below
    /// 1e-6.
    pub fn lr() -> Self {
        Self {
            learner: Learner::Lr,
            regularization: 1e-4,
            tolerance: 1e-6,
            max_iterations: 100,
            bias: BiasMode::Fitted,
            warm_start: true,
        }
    }

    pub fn for_learner(learner: Learner) -> Self {
        match learner {
            Learner::Svm => Self::svm(),
            Learner::Lr => Self::lr(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.regularization.is_finite() && self.regularization > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regularization must be positive and finite, got {}",
                self.regularization
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Diagnostics from one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Epochs (SVM) or Newton steps (LR) actually taken.
    pub iterations: usize,
    /// Whether the stopping tolerance was reached within `max_iterations`.
    pub converged: bool,
    /// Set when the training set held a single response class and the
    /// returned model is the mean-direction fallback, not a solver output.
    pub degenerate: bool,
    /// Objective value after each iteration (dual objective for the SVM,
    /// regularized loss for LR); non-increasing for a correct solver.
    pub objective_trace: Vec<f64>,
}

/// A fitted model together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub model: LinearModel,
    pub report: FitReport,
}

/// Dense row-major feature view of a challenge set.
pub(crate) struct FeatureMatrix {
    data: Vec<f64>,
    dim: usize,
}

impl FeatureMatrix {
    fn new(dim: usize) -> Self {
        Self {
            data: Vec::new(),
            dim,
        }
    }

    fn push_challenge(&mut self, challenge: &Challenge, intercept: bool) {
        self.data
            .extend(challenge.bits().iter().map(|&b| f64::from(b)));
        if intercept {
            self.data.push(1.0);
        }
        debug_assert_eq!(self.data.len() % self.dim, 0);
    }

    fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn feature_dim(n: usize, bias: BiasMode) -> usize {
    match bias {
        BiasMode::Fitted => n + 2,
        BiasMode::Zero => n + 1,
    }
}

fn build_features(data: &CrpSet, bias: BiasMode) -> (FeatureMatrix, Vec<f64>) {
    let mut x = FeatureMatrix::new(feature_dim(data.n(), bias));
    let mut y = Vec::with_capacity(data.len());
    for (challenge, response) in data.iter() {
        x.push_challenge(challenge, bias == BiasMode::Fitted);
        y.push(f64::from(response));
    }
    (x, y)
}

/// Splits a solver weight vector back into model weights and bias.
fn extract_model(solver_w: &[f64], n: usize, bias: BiasMode) -> Result<LinearModel> {
    match bias {
        BiasMode::Fitted => LinearModel::new(solver_w[..=n].to_vec(), -solver_w[n + 1]),
        BiasMode::Zero => LinearModel::new(solver_w.to_vec(), 0.0),
    }
}

/// Fallback for single-class training sets, where neither solver has a
/// meaningful separating problem: point the weights along the label-weighted
/// mean challenge and place the bias so every training point is classified
/// with margin at least one. The report flags the result as degenerate.
fn degenerate_fit(data: &CrpSet) -> Result<Option<Fit>> {
    let first = data.responses()[0];
    if data.responses().iter().any(|&r| r != first) {
        return Ok(None);
    }
    let d = data.n() + 1;
    let mut weights = vec![0.0; d];
    for (challenge, response) in data.iter() {
        for (w, &b) in weights.iter_mut().zip(challenge.bits()) {
            *w += f64::from(response) * f64::from(b);
        }
    }
    let count = data.len() as f64;
    for w in &mut weights {
        *w /= count;
    }
    // The trailing coordinate averages to first * 1, so the norm is >= 1 and
    // the direction is never degenerate itself.
    let model = LinearModel::new(weights, 0.0)?;
    let mut extreme = if first > 0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    for (challenge, _) in data.iter() {
        let v = model.decision(challenge)?;
        extreme = if first > 0 {
            extreme.min(v)
        } else {
            extreme.max(v)
        };
    }
    let bias = if first > 0 {
        extreme - 1.0
    } else {
        extreme + 1.0
    };
    let model = LinearModel::new(model.weights().to_vec(), bias)?;
    Ok(Some(Fit {
        model,
        report: FitReport {
            iterations: 0,
            converged: true,
            degenerate: true,
            objective_trace: Vec::new(),
        },
    }))
}

/// Fits `config.learner` to the set.
pub fn train<R: Rng + ?Sized>(data: &CrpSet, config: &TrainConfig, rng: &mut R) -> Result<Fit> {
    match config.learner {
        Learner::Svm => train_svm(data, config, rng),
        Learner::Lr => train_lr(data, config, rng),
    }
}

/// Soft-margin linear SVM via dual coordinate descent.
pub fn train_svm<R: Rng + ?Sized>(data: &CrpSet, config: &TrainConfig, rng: &mut R) -> Result<Fit> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if let Some(fit) = degenerate_fit(data)? {
        return Ok(fit);
    }
    let (x, y) = build_features(data, config.bias);
    let mut state = svm::DualState::new(x.dim());
    state.grow_to(x.rows());
    let report = svm::solve(&x, &y, config, &mut state, rng);
    Ok(Fit {
        model: extract_model(&state.w, data.n(), config.bias)?,
        report,
    })
}

/// L2-regularized logistic regression via damped Newton iterations.
pub fn train_lr<R: Rng + ?Sized>(data: &CrpSet, config: &TrainConfig, rng: &mut R) -> Result<Fit> {
    let _ = rng; // the Newton solver is deterministic given the data
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if let Some(fit) = degenerate_fit(data)? {
        return Ok(fit);
    }
    let (x, y) = build_features(data, config.bias);
    let mut w = vec![0.0; x.dim()];
    let report = logreg::solve(&x, &y, config, &mut w);
    Ok(Fit {
        model: extract_model(&w, data.n(), config.bias)?,
        report,
    })
}

/// Grow-only trainer for the active-learning loop: appends pairs and refits,
/// warm-starting each refit from the previous solution when enabled.
pub(crate) struct IncrementalTrainer {
    config: TrainConfig,
    data: CrpSet,
    x: FeatureMatrix,
    y: Vec<f64>,
    svm_state: svm::DualState,
    lr_w: Vec<f64>,
}

impl IncrementalTrainer {
    pub fn new(n: usize, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let dim = feature_dim(n, config.bias);
        Ok(Self {
            config,
            data: CrpSet::new(n)?,
            x: FeatureMatrix::new(dim),
            y: Vec::new(),
            svm_state: svm::DualState::new(dim),
            lr_w: vec![0.0; dim],
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &CrpSet {
        &self.data
    }

    pub fn append(&mut self, challenge: &Challenge, response: i8) -> Result<()> {
        self.data.push(challenge.clone(), response)?;
        self.x
            .push_challenge(challenge, self.config.bias == BiasMode::Fitted);
        self.y.push(f64::from(response));
        Ok(())
    }

    pub fn fit<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Fit> {
        if self.data.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(fit) = degenerate_fit(&self.data)? {
            return Ok(fit);
        }
        if !self.config.warm_start {
            self.svm_state.reset();
            self.lr_w.iter_mut().for_each(|w| *w = 0.0);
        }
        let (model, report) = match self.config.learner {
            Learner::Svm => {
                self.svm_state.grow_to(self.x.rows());
                let report = svm::solve(&self.x, &self.y, &self.config, &mut self.svm_state, rng);
                (
                    extract_model(&self.svm_state.w, self.data.n(), self.config.bias)?,
                    report,
                )
            }
            Learner::Lr => {
                let report = logreg::solve(&self.x, &self.y, &self.config, &mut self.lr_w);
                (
                    extract_model(&self.lr_w, self.data.n(), self.config.bias)?,
                    report,
                )
            }
        };
        Ok(Fit { model, report })
    }
}
