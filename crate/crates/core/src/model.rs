//! Learned separating hyperplanes over encoded challenges.

use crate::challenge::{Challenge, CrpSet};
use crate::error::{Error, Result};

/// Inner product of a weight vector with an encoded ±1 challenge.
pub(crate) fn dot_bits(weights: &[f64], bits: &[i8]) -> f64 {
    weights
        .iter()
        .zip(bits)
        .map(|(&w, &b)| if b > 0 { w } else { -w })
        .sum()
}

/// A linear classifier of encoded challenges: response is the sign of
/// `weights . bits - bias`, with ties resolved to +1.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    bias: f64,
    norm: f64,
}

impl LinearModel {
    /// Wraps a weight vector (length `n + 1`, matching encoded challenges)
    /// and a bias. All entries must be finite.
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "model needs at least two weights, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "model weights must be finite".into(),
            ));
        }
        if !bias.is_finite() {
            return Err(Error::InvalidParameter("model bias must be finite".into()));
        }
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        Ok(Self {
            weights,
            bias,
            norm,
        })
    }

    /// Number of selectable stages the model expects (`weights.len() - 1`).
    pub fn n(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Euclidean norm of the weight vector (bias excluded), cached at
    /// construction.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Signed decision value `weights . bits - bias`.
    pub fn decision(&self, challenge: &Challenge) -> Result<f64> {
        let bits = challenge.bits();
        if bits.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: bits.len(),
            });
        }
        Ok(dot_bits(&self.weights, bits) - self.bias)
    }

    /// Predicted ±1 response; a decision value of exactly zero maps to +1.
    pub fn predict(&self, challenge: &Challenge) -> Result<i8> {
        Ok(if self.decision(challenge)? >= 0.0 {
            1
        } else {
            -1
        })
    }

    /// Decision value scaled by the weight norm: the signed distance from the
    /// challenge to the hyperplane, invariant under rescaling of the model.
    pub fn normalized_distance(&self, challenge: &Challenge) -> Result<f64> {
        if self.norm == 0.0 {
            return Err(Error::ZeroNormModel);
        }
        Ok(self.decision(challenge)? / self.norm)
    }

    /// Fraction of pairs in `data` whose response the model reproduces.
    pub fn accuracy(&self, data: &CrpSet) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        let mut hits = 0usize;
        for (challenge, response) in data.iter() {
            if self.predict(challenge)? == response {
                hits += 1;
            }
        }
        Ok(hits as f64 / data.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(bits: &[i8]) -> Challenge {
        Challenge::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        assert!(LinearModel::new(vec![1.0, f64::NAN], 0.0).is_err());
        assert!(LinearModel::new(vec![1.0, 1.0], f64::INFINITY).is_err());
        assert!(LinearModel::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn norm_matches_euclidean_norm() {
        let m = LinearModel::new(vec![3.0, -4.0, 12.0], 0.5).unwrap();
        let expect = (9.0f64 + 16.0 + 144.0).sqrt();
        assert!((m.norm() - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn predict_signs_and_tie() {
        let m = LinearModel::new(vec![1.0, -2.0, 0.5], 0.0).unwrap();
        // decision = 1 + 2 + 0.5 = 3.5
        assert_eq!(m.predict(&ch(&[1, -1, 1])).unwrap(), 1);
        // decision = -1 - 2 + 0.5 = -2.5  (stage flips only; trailing stays +1)
        assert_eq!(m.predict(&ch(&[-1, 1, 1])).unwrap(), -1);
        // Exact zero resolves to +1.
        let tie = LinearModel::new(vec![1.0, 1.0, -2.0], 0.0).unwrap();
        assert_eq!(tie.decision(&ch(&[1, 1, 1])).unwrap(), 0.0);
        assert_eq!(tie.predict(&ch(&[1, 1, 1])).unwrap(), 1);
    }

    /// Exhaustive agreement with a direct sign computation at n = 8. The
    /// weights are exact binary fractions so both accumulation orders give
    /// identical sums and the comparison is exact.
    #[test]
    fn predict_matches_direct_sign_exhaustively() {
        let weights = vec![0.5, -1.25, 0.25, 2.0, -0.5, 0.125, -1.0, 1.5, 0.375];
        let m = LinearModel::new(weights.clone(), 0.25).unwrap();
        for mask in 0u32..(1 << 8) {
            let mut bits: Vec<i8> = (0..8)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect();
            bits.push(1);
            let mut s = -0.25;
            for (w, &b) in weights.iter().zip(&bits) {
                s += w * f64::from(b);
            }
            let want = if s >= 0.0 { 1 } else { -1 };
            assert_eq!(m.predict(&ch(&bits)).unwrap(), want);
        }
    }

    #[test]
    fn negating_weights_and_bias_flips_every_prediction() {
        let m = LinearModel::new(vec![0.3, -0.8, 1.1, -0.2], 0.4).unwrap();
        let neg = LinearModel::new(vec![-0.3, 0.8, -1.1, 0.2], -0.4).unwrap();
        for mask in 0u32..(1 << 3) {
            let mut bits: Vec<i8> = (0..3)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect();
            bits.push(1);
            let c = ch(&bits);
            // Decision values here are never exactly zero, so signs must flip.
            assert_ne!(m.decision(&c).unwrap(), 0.0);
            assert_eq!(m.predict(&c).unwrap(), -neg.predict(&c).unwrap());
        }
    }

    #[test]
    fn normalized_distance_hand_case() {
        // weights (3, 4, 0), norm 5, challenge all +1: (3 + 4 + 0) / 5 = 1.4.
        let m = LinearModel::new(vec![3.0, 4.0, 0.0], 0.0).unwrap();
        let d = m.normalized_distance(&ch(&[1, 1, 1])).unwrap();
        assert!((d - 1.4).abs() < 1e-15);
    }

    #[test]
    fn normalized_distance_is_scale_invariant() {
        let w = vec![0.9, -0.3, 1.7, 0.4];
        let m1 = LinearModel::new(w.clone(), 0.2).unwrap();
        let m2 = LinearModel::new(w.iter().map(|x| x * 250.0).collect(), 0.2 * 250.0).unwrap();
        let c = ch(&[1, -1, -1, 1]);
        let d1 = m1.normalized_distance(&c).unwrap();
        let d2 = m2.normalized_distance(&c).unwrap();
        assert!((d1 - d2).abs() <= 1e-10 * d1.abs().max(1.0));
    }

    #[test]
    fn zero_norm_distance_errors() {
        let m = LinearModel::new(vec![0.0, 0.0], 0.0).unwrap();
        assert!(matches!(
            m.normalized_distance(&ch(&[1, 1])),
            Err(Error::ZeroNormModel)
        ));
    }

    #[test]
    fn accuracy_counts_matches_and_complement() {
        let m = LinearModel::new(vec![1.0, 0.0, 0.0], 0.0).unwrap();
        let mut set = CrpSet::new(2).unwrap();
        set.push(ch(&[1, 1, 1]), 1).unwrap(); // predicted 1, correct
        set.push(ch(&[-1, 1, 1]), 1).unwrap(); // predicted -1, wrong
        set.push(ch(&[-1, -1, 1]), -1).unwrap(); // predicted -1, correct
        set.push(ch(&[1, -1, 1]), -1).unwrap(); // predicted 1, wrong
        assert!((m.accuracy(&set).unwrap() - 0.5).abs() < 1e-15);

        let empty = CrpSet::new(2).unwrap();
        assert!(matches!(m.accuracy(&empty), Err(Error::EmptyData)));
    }
}
