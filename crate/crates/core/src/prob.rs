use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::entropy::{shannon_entropy, LogBase};
use crate::linalg::random::rng;

pub const NEGATIVE_TOL: f64 = 1e-12;
pub const SUM_TOL: f64 = 1e-9;

/// Finite probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < -NEGATIVE_TOL) {
            return Err(Error::InvalidProbability(format!("entry {w} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidProbability(format!("entries sum to {sum}")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    /// Point mass on index 0.
    pub fn delta(len: usize) -> Self {
        let mut w = vec![0.0; len];
        w[0] = 1.0;
        Self(w)
    }

    /// Flat-Dirichlet sample sorted into non-increasing order.
    pub fn random_descending(len: usize, seed: u64) -> Self {
        let mut r = rng(seed, 10);
        let mut w: Vec<f64> = (0..len).map(|_| Exp1.sample(&mut r)).collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        w.sort_by(|a, b| b.total_cmp(a));
        Self(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Shannon entropy `-sum p log p`.
    pub fn entropy(&self, base: LogBase) -> f64 {
        let clamped: Vec<f64> = self.0.iter().map(|&w| w.max(0.0)).collect();
        shannon_entropy(&clamped, base)
    }

    /// `p_0 >= p_1 >= ...` up to `tol`.
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1] - tol)
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ProbVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.1, -0.1]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
        assert!(ProbVector::new(vec![1.0 + 1e-13, -1e-13]).is_ok());
    }

    #[test]
    fn random_descending_is_valid() {
        for seed in 0..20 {
            let p = ProbVector::random_descending(4, seed);
            assert!(ProbVector::new(p.weights().to_vec()).is_ok());
            assert!(p.is_non_increasing(0.0));
        }
    }
}
