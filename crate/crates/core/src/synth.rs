//! Pool-free challenge sources.
//!
//! Classical active learning filters a large random pool for informative
//! points. Both sources here need no pool: uniform sampling draws stage signs
//! independently, and `construct_challenge` greedily builds a challenge whose
//! (unnormalized) margin under a given model lands near a requested multiple
//! of the model's weight norm — near the boundary for refining the model, or
//! far on one side for adversarial, low-information sets.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::challenge::Challenge;
use crate::error::{Error, Result};
use crate::model::LinearModel;

/// A uniformly random challenge: each of the `n` stage signs is a fair coin.
pub fn random_challenge<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Challenge> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "a challenge needs at least one stage".into(),
        ));
    }
    let mut bits: Vec<i8> = Vec::with_capacity(n + 1);
    for _ in 0..n {
        bits.push(if rng.random::<bool>() { 1 } else { -1 });
    }
    bits.push(1);
    Challenge::new(bits)
}

/// `count` independent uniform challenges.
pub fn random_challenges<R: Rng + ?Sized>(
    n: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Challenge>> {
    (0..count).map(|_| random_challenge(n, rng)).collect()
}

/// Builds a challenge whose decision sum under `model` approximates
/// `±k * ||w||`, the sign chosen by a fair coin.
///
/// Stages are visited in a random order; each stage sign is chosen to push
/// the running sum toward the target: `sign(w_i)` while the sum is below the
/// target, `-sign(w_i)` otherwise (zero weights count as positive). Once the
/// running sum first enters the window `target ± 2 max_i |w_i|` it can never
/// leave it, so the final sum obeys `|w . bits - target| <= 2 max_i |w_i|`
/// whenever the target is attainable at all. Unattainable targets — `k` too
/// large for the weight vector — are reported as errors rather than clamped.
pub fn construct_challenge<R: Rng + ?Sized>(
    model: &LinearModel,
    k: f64,
    rng: &mut R,
) -> Result<Challenge> {
    if !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "distance multiple must be finite, got {k}"
        )));
    }
    if model.norm() == 0.0 {
        return Err(Error::ZeroNormModel);
    }
    let weights = model.weights();
    let n = weights.len() - 1;
    let fixed = weights[n];

    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let target = sign * k * model.norm();

    // The free stages contribute any value in [-reach, reach] around the
    // fixed trailing term, stepping by stage weights.
    let reach: f64 = weights[..n].iter().map(|w| w.abs()).sum();
    if target > fixed + reach || target < fixed - reach {
        return Err(Error::UnreachableTarget {
            target,
            lo: fixed - reach,
            hi: fixed + reach,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut bits = vec![0i8; n + 1];
    bits[n] = 1;
    let mut sum = fixed;
    for &i in &order {
        let toward: i8 = if weights[i] >= 0.0 { 1 } else { -1 };
        let bit = if sum < target { toward } else { -toward };
        bits[i] = bit;
        sum += f64::from(bit) * weights[i];
    }
    Challenge::new(bits)
}
