//! Simulated arbiter PUF instances.
//!
//! An arbiter chain's response to an encoded challenge is the sign of the
//! inner product between the challenge and a vector of stage delay
//! differences. Manufacturing variation is modeled by drawing those delay
//! weights i.i.d. from a zero-mean Gaussian; the instance is then a fixed
//! (noiseless) linear threshold function, with optional measurement noise
//! layered on top of each query.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::challenge::Challenge;
use crate::error::{Error, Result};
use crate::model::{dot_bits, LinearModel};

/// Measurement noise applied per query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Every query returns the true response.
    Noiseless,
    /// Each response is flipped independently with the given probability.
    FlipProbability(f64),
}

impl NoiseModel {
    /// A flip-noise model with a validated probability.
    pub fn flip(p: f64) -> Result<Self> {
        Self::FlipProbability(p).validate()?;
        Ok(Self::FlipProbability(p))
    }

    pub(crate) fn validate(self) -> Result<()> {
        match self {
            NoiseModel::Noiseless => Ok(()),
            NoiseModel::FlipProbability(p) => {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "flip probability must lie in [0, 1], got {p}"
                    )))
                }
            }
        }
    }

    /// The flip probability (zero for the noiseless model).
    pub fn flip_probability(self) -> f64 {
        match self {
            NoiseModel::Noiseless => 0.0,
            NoiseModel::FlipProbability(p) => p,
        }
    }
}

/// One manufactured chain: `n + 1` fixed delay weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ArbiterPuf {
    weights: Vec<f64>,
}

impl ArbiterPuf {
    /// Draws a fresh instance with `n` stages: `n + 1` weights i.i.d. from
    /// a Normal(0, sigma^2).
    pub fn sample<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "a chain needs at least one stage".into(),
            ));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight standard deviation must be positive and finite, got {sigma}"
            )));
        }
        let normal = Normal::new(0.0, sigma).expect("validated sigma");
        let weights = (0..=n).map(|_| normal.sample(rng)).collect();
        Ok(Self { weights })
    }

    /// Wraps explicit delay weights (used when loading a saved instance).
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a chain needs at least two delay weights, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "delay weights must be finite".into(),
            ));
        }
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The true response: the sign of the delay sum. An exact zero sum (a
    /// measure-zero event under continuous weights) is resolved by a fair
    /// coin so neither response is privileged.
    pub fn respond<R: Rng + ?Sized>(&self, challenge: &Challenge, rng: &mut R) -> Result<i8> {
        let bits = challenge.bits();
        if bits.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: bits.len(),
            });
        }
        let s = dot_bits(&self.weights, bits);
        Ok(if s > 0.0 {
            1
        } else if s < 0.0 {
            -1
        } else if rng.random::<bool>() {
            1
        } else {
            -1
        })
    }

    /// A measured response: the true response passed through the noise model.
    pub fn respond_noisy<R: Rng + ?Sized>(
        &self,
        challenge: &Challenge,
        noise: NoiseModel,
        rng: &mut R,
    ) -> Result<i8> {
        noise.validate()?;
        let r = self.respond(challenge, rng)?;
        Ok(match noise {
            NoiseModel::Noiseless => r,
            NoiseModel::FlipProbability(p) => {
                if rng.random_bool(p) {
                    -r
                } else {
                    r
                }
            }
        })
    }

    /// The chain's own hyperplane as a zero-bias linear model (the ideal
    /// predictor of its noiseless responses).
    pub fn to_model(&self) -> LinearModel {
        LinearModel::new(self.weights.clone(), 0.0).expect("finite weights")
    }
}
