//! Challenge vectors and labeled challenge-response sets.
//!
//! A challenge applied to an `n`-stage arbiter chain is encoded in its
//! multiplicative ±1 form: `n` stage coordinates followed by one fixed `+1`
//! coordinate, so that the chain's response is a linear threshold function of
//! the encoded vector. The trailing coordinate absorbs the final-stage delay
//! offset and is not a degree of freedom.

use crate::error::{Error, Result};

/// An encoded challenge: `n` ±1 stage coordinates plus the fixed trailing +1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Challenge {
    bits: Vec<i8>,
}

impl Challenge {
    /// Wraps an encoded vector, enforcing ±1 entries and the trailing +1.
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "challenge needs at least one stage coordinate plus the fixed +1, got length {}",
                bits.len()
            )));
        }
        if let Some(pos) = bits.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::InvalidParameter(format!(
                "challenge coordinate {} is {}, expected +1 or -1",
                pos, bits[pos]
            )));
        }
        if bits[bits.len() - 1] != 1 {
            return Err(Error::InvalidParameter(
                "last challenge coordinate must be the fixed +1".into(),
            ));
        }
        Ok(Self { bits })
    }

    /// Number of selectable stages (the encoded length is `n + 1`).
    pub fn n(&self) -> usize {
        self.bits.len() - 1
    }

    /// Full encoded vector, including the trailing +1.
    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    /// The `n` stage coordinates, excluding the trailing +1.
    pub fn stages(&self) -> &[i8] {
        &self.bits[..self.bits.len() - 1]
    }

    /// Correlation statistic between two challenges: the number of stage
    /// coordinates where they agree minus the number where they differ.
    /// The fixed trailing coordinate is excluded.
    pub fn gamma(&self, other: &Challenge) -> Result<i64> {
        if self.bits.len() != other.bits.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bits.len(),
                got: other.bits.len(),
            });
        }
        Ok(self
            .stages()
            .iter()
            .zip(other.stages())
            .map(|(&a, &b)| i64::from(a) * i64::from(b))
            .sum())
    }

    /// True when the two challenges' responses agree with probability exactly
    /// 1/2 over the manufacturing randomness of the chain, i.e. when the
    /// response pair carries no mutual information.
    ///
    /// With `g = gamma`: the pair is uncorrelated iff the first coordinates
    /// agree and `g == 0`, or the first coordinates differ and `g == -1`.
    pub fn is_uncorrelated(&self, other: &Challenge) -> Result<bool> {
        let g = self.gamma(other)?;
        Ok(if self.bits[0] == other.bits[0] {
            g == 0
        } else {
            g + 1 == 0
        })
    }
}

/// A set of challenges with observed ±1 responses, all of a common stage count.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpSet {
    n: usize,
    challenges: Vec<Challenge>,
    responses: Vec<i8>,
}

impl CrpSet {
    /// Empty set for challenges with `n` stages.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "challenge-response set needs at least one stage".into(),
            ));
        }
        Ok(Self {
            n,
            challenges: Vec::new(),
            responses: Vec::new(),
        })
    }

    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Challenge, i8)>,
    {
        let mut set = Self::new(n)?;
        for (challenge, response) in pairs {
            set.push(challenge, response)?;
        }
        Ok(set)
    }

    /// Appends a pair, enforcing the shared stage count and a ±1 response.
    pub fn push(&mut self, challenge: Challenge, response: i8) -> Result<()> {
        if challenge.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                got: challenge.n() + 1,
            });
        }
        if response != 1 && response != -1 {
            return Err(Error::InvalidParameter(format!(
                "response must be +1 or -1, got {response}"
            )));
        }
        self.challenges.push(challenge);
        self.responses.push(response);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.challenges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.challenges.is_empty()
    }

    pub fn challenges(&self) -> &[Challenge] {
        &self.challenges
    }

    pub fn responses(&self) -> &[i8] {
        &self.responses
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Challenge, i8)> {
        self.challenges.iter().zip(self.responses.iter().copied())
    }

    /// The first `count` pairs as a new set.
    pub fn prefix(&self, count: usize) -> Result<CrpSet> {
        if count > self.len() {
            return Err(Error::InvalidParameter(format!(
                "prefix of {count} pairs requested from a set of {}",
                self.len()
            )));
        }
        Ok(Self {
            n: self.n,
            challenges: self.challenges[..count].to_vec(),
            responses: self.responses[..count].to_vec(),
        })
    }

    /// All pairs from index `start` on, as a new set.
    pub fn suffix(&self, start: usize) -> Result<CrpSet> {
        if start > self.len() {
            return Err(Error::InvalidParameter(format!(
                "suffix from index {start} requested from a set of {}",
                self.len()
            )));
        }
        Ok(Self {
            n: self.n,
            challenges: self.challenges[start..].to_vec(),
            responses: self.responses[start..].to_vec(),
        })
    }

    /// Moves all pairs of `other` into `self`.
    pub fn extend(&mut self, other: CrpSet) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                got: other.n + 1,
            });
        }
        self.challenges.extend(other.challenges);
        self.responses.extend(other.responses);
        Ok(())
    }
}
