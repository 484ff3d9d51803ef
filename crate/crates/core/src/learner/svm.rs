//! Dual coordinate descent for the L1-hinge soft-margin linear SVM.
//!
//! Minimizes `0.5 ||w||^2 + C * sum_i max(0, 1 - y_i w.x_i)` through its
//! dual: `min_a 0.5 a'Qa - e'a` subject to `0 <= a_i <= C`, with
//! `Q_ij = y_i y_j x_i.x_j`. Because the kernel is linear the primal vector
//! `w = sum_i a_i y_i x_i` can be carried along, making each coordinate
//! update O(dim): compute the gradient `y_i w.x_i - 1`, move `a_i` to the
//! box-clipped single-variable optimum, and add the change back into `w`.
//! One sweep visits the active points in a fresh random order. Bounded
//! points whose plain gradient falls outside the previous sweep's violation
//! window are set aside (shrinking) since they cannot move; iteration stops
//! when the spread between the largest and smallest projected-gradient
//! violations, confirmed on the full point set, drops to the tolerance.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{dot, FeatureMatrix, FitReport, TrainConfig};

/// Dual variables plus the maintained primal vector, kept between refits so
/// a grown training set can resume from the previous solution (new points
/// enter with a_i = 0, which leaves `w` consistent).
pub(crate) struct DualState {
    pub alpha: Vec<f64>,
    pub w: Vec<f64>,
}

impl DualState {
    pub fn new(dim: usize) -> Self {
        Self {
            alpha: Vec::new(),
            w: vec![0.0; dim],
        }
    }

    pub fn grow_to(&mut self, rows: usize) {
        debug_assert!(rows >= self.alpha.len());
        self.alpha.resize(rows, 0.0);
    }

    pub fn reset(&mut self) {
        self.alpha.iter_mut().for_each(|a| *a = 0.0);
        self.w.iter_mut().for_each(|w| *w = 0.0);
    }
}

pub(crate) fn solve<R: Rng + ?Sized>(
    x: &FeatureMatrix,
    y: &[f64],
    config: &TrainConfig,
    state: &mut DualState,
    rng: &mut R,
) -> FitReport {
    let rows = x.rows();
    let c = config.regularization;
    debug_assert_eq!(state.alpha.len(), rows);
    debug_assert_eq!(state.w.len(), x.dim());

    // Gram diagonal. Encoded challenges have all-±1 coordinates (plus the
    // optional unit intercept), so every entry equals the dimension; computed
    // per row anyway so the solver does not depend on that detail.
    let qii: Vec<f64> = (0..rows)
        .map(|i| x.row(i).iter().map(|v| v * v).sum())
        .collect();

    let mut index: Vec<usize> = (0..rows).collect();
    let mut active = rows;
    // Violation window observed in the previous sweep. A point at a box
    // bound whose plain gradient lies outside the window cannot move and is
    // set aside until the final full-set recheck.
    let mut upper_bar = f64::INFINITY;
    let mut lower_bar = f64::NEG_INFINITY;

    let mut trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < config.max_iterations {
        sweeps += 1;
        index[..active].shuffle(rng);
        let mut max_pg = f64::NEG_INFINITY;
        let mut min_pg = f64::INFINITY;

        let mut s = 0;
        while s < active {
            let i = index[s];
            let xi = x.row(i);
            let yi = y[i];
            let g = yi * dot(&state.w, xi) - 1.0;
            let a = state.alpha[i];
            // Project the gradient onto the box: only violations count.
            let pg = if a <= 0.0 {
                if g > upper_bar {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                }
                g.min(0.0)
            } else if a >= c {
                if g < lower_bar {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                }
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg);
            min_pg = min_pg.min(pg);
            if pg.abs() > 1e-12 {
                let next = (a - g / qii[i]).clamp(0.0, c);
                let step = (next - a) * yi;
                if step != 0.0 {
                    state.alpha[i] = next;
                    for (w, v) in state.w.iter_mut().zip(xi) {
                        *w += step * v;
                    }
                }
            }
            s += 1;
        }

        // Dual objective 0.5 a'Qa - e'a; the quadratic term is ||w||^2 here.
        trace.push(0.5 * dot(&state.w, &state.w) - state.alpha.iter().sum::<f64>());

        if max_pg - min_pg <= config.tolerance {
            if active == rows {
                converged = true;
                break;
            }
            // Points were set aside under a stale window; confirm on the
            // full set before accepting convergence.
            active = rows;
            upper_bar = f64::INFINITY;
            lower_bar = f64::NEG_INFINITY;
            continue;
        }
        upper_bar = if max_pg > 0.0 { max_pg } else { f64::INFINITY };
        lower_bar = if min_pg < 0.0 {
            min_pg
        } else {
            f64::NEG_INFINITY
        };
    }

    FitReport {
        iterations: sweeps,
        converged,
        degenerate: false,
        objective_trace: trace,
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::challenge::{Challenge, CrpSet};
    use crate::learner::{train_svm, BiasMode, TrainConfig};
    use crate::puf::ArbiterPuf;
    use crate::synth::random_challenge;

    fn ch(bits: &[i8]) -> Challenge {
        Challenge::new(bits.to_vec()).unwrap()
    }

    fn exhaustive_crps(puf: &ArbiterPuf, rng: &mut ChaCha8Rng) -> CrpSet {
        let n = puf.n();
        let mut set = CrpSet::new(n).unwrap();
        for mask in 0u32..(1 << n) {
            let mut bits: Vec<i8> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect();
            bits.push(1);
            let c = ch(&bits);
            let r = puf.respond(&c, rng).unwrap();
            set.push(c, r).unwrap();
        }
        set
    }

    #[test]
    fn separates_a_two_point_set() {
        let mut set = CrpSet::new(3).unwrap();
        set.push(ch(&[1, 1, 1, 1]), 1).unwrap();
        set.push(ch(&[-1, -1, -1, 1]), -1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fit = train_svm(&set, &TrainConfig::svm(), &mut rng).unwrap();
        assert!(!fit.report.degenerate);
        assert!((fit.model.accuracy(&set).unwrap() - 1.0).abs() < 1e-15);
    }

    /// Exhaustively labeled small chains are separable by construction, and
    /// a hard-margin fit (large C) must reach zero training error.
    #[test]
    fn zero_training_error_on_exhaustive_sets() {
        for (n, seed) in [(4usize, 10u64), (6, 11), (8, 12)] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let puf = ArbiterPuf::sample(n, 1.0, &mut rng).unwrap();
            let set = exhaustive_crps(&puf, &mut rng);
            let config = TrainConfig {
                regularization: 100.0,
                ..TrainConfig::svm()
            };
            let fit = train_svm(&set, &config, &mut rng).unwrap();
            assert!(
                (fit.model.accuracy(&set).unwrap() - 1.0).abs() < 1e-15,
                "training error at n = {n}"
            );
        }
    }

    #[test]
    fn dual_objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let puf = ArbiterPuf::sample(24, 1.0, &mut rng).unwrap();
        let mut set = CrpSet::new(24).unwrap();
        for _ in 0..400 {
            let c = random_challenge(24, &mut rng).unwrap();
            let r = puf.respond(&c, &mut rng).unwrap();
            set.push(c, r).unwrap();
        }
        let fit = train_svm(&set, &TrainConfig::svm(), &mut rng).unwrap();
        let trace = &fit.report.objective_trace;
        assert!(!trace.is_empty());
        for pair in trace.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9,
                "dual objective rose from {} to {}",
                pair[0],
                pair[1]
            );
        }
        assert!(fit.report.converged);
    }

    #[test]
    fn single_class_set_yields_flagged_fallback() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut set = CrpSet::new(4).unwrap();
        set.push(ch(&[1, 1, -1, 1, 1]), -1).unwrap();
        set.push(ch(&[-1, 1, 1, -1, 1]), -1).unwrap();
        set.push(ch(&[1, -1, 1, 1, 1]), -1).unwrap();
        let fit = train_svm(&set, &TrainConfig::svm(), &mut rng).unwrap();
        assert!(fit.report.degenerate);
        assert!(fit.model.norm() > 0.0);
        // The fallback must at least reproduce the one observed class.
        assert!((fit.model.accuracy(&set).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_bias_mode_pins_the_intercept() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let puf = ArbiterPuf::sample(12, 1.0, &mut rng).unwrap();
        let mut set = CrpSet::new(12).unwrap();
        for _ in 0..200 {
            let c = random_challenge(12, &mut rng).unwrap();
            let r = puf.respond(&c, &mut rng).unwrap();
            set.push(c, r).unwrap();
        }
        let config = TrainConfig {
            bias: BiasMode::Zero,
            ..TrainConfig::svm()
        };
        let fit = train_svm(&set, &config, &mut rng).unwrap();
        assert_eq!(fit.model.bias(), 0.0);
        assert!(fit.model.accuracy(&set).unwrap() > 0.9);
    }

    #[test]
    fn same_seed_same_model() {
        let build = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let puf = ArbiterPuf::sample(16, 1.0, &mut rng).unwrap();
            let mut set = CrpSet::new(16).unwrap();
            for _ in 0..150 {
                let c = random_challenge(16, &mut rng).unwrap();
                let r = puf.respond(&c, &mut rng).unwrap();
                set.push(c, r).unwrap();
            }
            train_svm(&set, &TrainConfig::svm(), &mut rng).unwrap()
        };
        let a = build();
        let b = build();
        assert_eq!(a.model, b.model);
        assert_eq!(a.report.objective_trace, b.report.objective_trace);
    }
}
