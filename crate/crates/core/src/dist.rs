//! Sums of independent, non-identically distributed Bernoulli variables
//! (the Poisson-binomial distribution), with exact tails.

use crate::error::{Error, Result};

/// The distribution of `Σ Bernoulli(p_i)` for heterogeneous `p_i`.
///
/// The pmf over the support `{0, ..., n}` is built once by convolving the
/// per-variable generating polynomials left to right in linear space, so
/// tail queries are cheap and the result does not depend on evaluation
/// order elsewhere in the program.
#[derive(Debug, Clone)]
pub struct BernoulliSum {
    pmf: Vec<f64>,
}

impl BernoulliSum {
    /// Builds the exact pmf from the success probabilities.
    pub fn new(probs: &[f64]) -> Result<Self> {
        for &p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability {
                    name: "bernoulli probability",
                    range: "[0, 1]",
                    value: p,
                });
            }
        }
        let mut pmf = Vec::with_capacity(probs.len() + 1);
        pmf.push(1.0);
        for &p in probs {
            pmf.push(0.0);
            let q = 1.0 - p;
            for k in (1..pmf.len()).rev() {
                pmf[k] = pmf[k] * q + pmf[k - 1] * p;
            }
            pmf[0] *= q;
        }
        Ok(Self { pmf })
    }

    /// Number of summands.
    pub fn n(&self) -> usize {
        self.pmf.len() - 1
    }

    /// The pmf over `{0, ..., n}`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Exact `Pr(Y >= k)`. `k = 0` returns 1; `k > n` returns 0.
    ///
    /// Summed from the top of the support so the smallest terms accumulate
    /// first.
    pub fn tail_ge(&self, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        if k >= self.pmf.len() {
            return 0.0;
        }
        let mut tail = 0.0;
        for j in (k..self.pmf.len()).rev() {
            tail += self.pmf[j];
        }
        tail.min(1.0)
    }

    /// Exact `Pr(Y <= k)`.
    pub fn tail_le(&self, k: usize) -> f64 {
        if k >= self.n() {
            return 1.0;
        }
        let mut tail = 0.0;
        for j in (0..=k).rev() {
            tail += self.pmf[j];
        }
        tail.min(1.0)
    }

    /// Mean `Σ p_i`, recovered from the pmf.
    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}
