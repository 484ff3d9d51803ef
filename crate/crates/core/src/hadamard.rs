//! Sylvester-form Hadamard matrices and the challenge set derived from them.
//!
//! Rows of a Sylvester Hadamard matrix are mutually orthogonal and every row
//! starts with +1, so any two derived challenges agree on their first
//! coordinate and have a zero correlation statistic: the whole set is
//! pairwise uncorrelated. That makes it an information-optimal fixed set of
//! up to `n` challenges for an `n`-stage chain.

use crate::challenge::Challenge;
use crate::error::{Error, Result};

/// A Hadamard matrix of power-of-two order in Sylvester form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    rows: Vec<Vec<i8>>,
}

impl HadamardMatrix {
    /// Builds the Sylvester construction: start from the 1x1 matrix (+1) and
    /// repeatedly double, mapping H to [[H, H], [H, -H]].
    pub fn sylvester(order: usize) -> Result<Self> {
        if !order.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "Sylvester construction needs a power-of-two order, got {order}"
            )));
        }
        let mut rows: Vec<Vec<i8>> = vec![vec![1]];
        while rows.len() < order {
            let half = rows.len();
            let mut next = Vec::with_capacity(half * 2);
            for row in &rows {
                let mut top = Vec::with_capacity(half * 2);
                top.extend_from_slice(row);
                top.extend_from_slice(row);
                next.push(top);
            }
            for row in &rows {
                let mut bottom = Vec::with_capacity(half * 2);
                bottom.extend_from_slice(row);
                bottom.extend(row.iter().map(|&b| -b));
                next.push(bottom);
            }
            rows = next;
        }
        Ok(Self { order, rows })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn row(&self, index: usize) -> &[i8] {
        &self.rows[index]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.rows.iter().map(Vec::as_slice)
    }
}

/// The first `count` rows of the order-`n` Sylvester matrix, each extended
/// with the fixed trailing +1, as ready-to-query challenges.
pub fn hadamard_challenge_set(n: usize, count: usize) -> Result<Vec<Challenge>> {
    let matrix = HadamardMatrix::sylvester(n)?;
    if count > n {
        return Err(Error::InvalidParameter(format!(
            "the order-{n} matrix provides at most {n} challenges, {count} requested"
        )));
    }
    matrix
        .rows()
        .take(count)
        .map(|row| {
            let mut bits = Vec::with_capacity(n + 1);
            bits.extend_from_slice(row);
            bits.push(1);
            Challenge::new(bits)
        })
        .collect()
}
