//! Majorization order and the block-sum entropy bound.
//!
//! For a distribution `pi` over `d^2` outcomes, sort it decreasingly and sum
//! consecutive blocks of length `d`. If `A = sum_J pi_J X_J` with
//! `0 <= X_J <= I` and `sum_J X_J = d I`, the spectrum of `A` is majorized by
//! these block sums, so their Shannon entropy bounds `S(A)` from below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::entropy::LogBase;
use crate::linalg::state::DensityMatrix;
use crate::prob::ProbVector;
use crate::weyl::WeylChannelSpec;

/// Partial-sum slack used by [`prop2_verify`].
pub const MAJORIZATION_TOL: f64 = 1e-9;

/// Non-increasing copy of `w`; ties keep their original order.
pub fn sort_descending(w: &[f64]) -> Vec<f64> {
    let mut out = w.to_vec();
    // sort_by is stable
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Whether `lambda` majorizes `mu`: every partial sum of `mu` sorted
/// decreasingly is at most the matching partial sum of `lambda` plus `tol`.
pub fn majorizes(lambda: &[f64], mu: &[f64], tol: f64) -> Result<bool> {
    if lambda.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            actual: mu.len(),
        });
    }
    let l = sort_descending(lambda);
    let m = sort_descending(mu);
    let (mut sl, mut sm) = (0.0, 0.0);
    for (a, b) in l.iter().zip(&m) {
        sl += a;
        sm += b;
        if sm > sl + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sums of consecutive length-`d` blocks of `pi` sorted decreasingly.
pub fn block_distribution(pi: &[f64], d: usize) -> Result<ProbVector> {
    if d == 0 || pi.len() != d * d {
        return Err(Error::BlockLength(pi.len(), d));
    }
    ProbVector::new(pi.to_vec())?;
    let sorted = sort_descending(pi);
    ProbVector::new(sorted.chunks(d).map(|c| c.iter().sum()).collect())
}

/// Shannon entropy of [`block_distribution`].
pub fn entropy_lower_bound(pi: &[f64], d: usize, base: LogBase) -> Result<f64> {
    Ok(block_distribution(pi, d)?.entropy(base))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockBoundReport {
    pub d: usize,
    pub block_distribution: ProbVector,
    pub entropy_bound: f64,
    pub source_size: usize,
}

pub fn block_bound_report(pi: &[f64], d: usize, base: LogBase) -> Result<BlockBoundReport> {
    let blocks = block_distribution(pi, d)?;
    Ok(BlockBoundReport {
        d,
        entropy_bound: blocks.entropy(base),
        block_distribution: blocks,
        source_size: pi.len(),
    })
}

/// Product distribution `Pi_J = prod_s pi_{J_s}` over `copies` independent draws.
pub fn product_distribution(pi: &[f64], copies: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..copies {
        out = out.iter().flat_map(|&a| pi.iter().map(move |&b| a * b)).collect();
    }
    out
}

/// Block bound for `Phi^{(x)N}`: `Pi_J` over `(Z_n x Z_n)^N` with `d = n^N`.
pub fn tensor_power_block_bound(spec: &WeylChannelSpec, copies: usize, base: LogBase) -> Result<BlockBoundReport> {
    let d = crate::weyl::tensor_dim(spec.n(), copies)?;
    block_bound_report(&product_distribution(spec.flat(), copies), d, base)
}

/// Checks that the spectrum of `Phi(rho)` is majorized by the block
/// distribution of the channel's table.
pub fn prop2_verify(spec: &WeylChannelSpec, rho: &DensityMatrix) -> Result<bool> {
    let eigs = spec.apply(rho)?.eigenvalues()?;
    let blocks = block_distribution(spec.flat(), spec.n())?;
    majorizes(blocks.weights(), &eigs, MAJORIZATION_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_density_matrix;
    use crate::weyl::qutrit_example;

    #[test]
    fn sorting() {
        assert_eq!(sort_descending(&[0.2, 0.5, 0.3]), vec![0.5, 0.3, 0.2]);
        assert_eq!(sort_descending(&[0.5, 0.3, 0.2]), vec![0.5, 0.3, 0.2]);
        let chain = sort_descending(qutrit_example().flat());
        let expected = [
            1.0 / 4.0,
            1.0 / 8.0,
            1.0 / 8.0,
            1.0 / 8.0,
            1.0 / 8.0,
            1.0 / 12.0,
            1.0 / 12.0,
            1.0 / 24.0,
            1.0 / 24.0,
        ];
        assert_eq!(chain, expected);
        assert_eq!(qutrit_example().chain(), expected);
    }

    #[test]
    fn majorization_cases() {
        assert!(majorizes(&[1.0, 0.0, 0.0], &[0.2, 0.5, 0.3], 0.0).unwrap());
        assert!(majorizes(&[0.2, 0.5, 0.3], &[1.0 / 3.0; 3], 1e-15).unwrap());
        assert!(majorizes(&[0.5, 0.3, 0.2], &[0.4, 0.35, 0.25], 0.0).unwrap());
        assert!(!majorizes(&[0.4, 0.35, 0.25], &[0.5, 0.3, 0.2], 0.0).unwrap());
        assert!(majorizes(&[0.5, 0.5], &[1.0], 0.0).is_err());
    }

    #[test]
    fn qutrit_blocks_equal_marginals() {
        let b = block_distribution(qutrit_example().flat(), 3).unwrap();
        for (a, e) in b.weights().iter().zip([0.5, 1.0 / 3.0, 1.0 / 6.0]) {
            assert!((a - e).abs() < 1e-15);
        }
        let h = entropy_lower_bound(qutrit_example().flat(), 3, LogBase::Bits).unwrap();
        assert!((h - 1.4591479170272448).abs() < 1e-12);
    }

    #[test]
    fn uniform_blocks() {
        let b = block_distribution(&[1.0 / 9.0; 9], 3).unwrap();
        assert!(b.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-15));
        let h = entropy_lower_bound(&[1.0 / 9.0; 9], 3, LogBase::Bits).unwrap();
        assert!((h - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn qubit_product_blocks() {
        // enumeration: products of (4,3,2,1)/10 sorted, summed in fours -> (49,28,15,8)/100
        let pi = product_distribution(&[0.4, 0.3, 0.2, 0.1], 2);
        let b = block_distribution(&pi, 4).unwrap();
        for (a, e) in b.weights().iter().zip([0.49, 0.28, 0.15, 0.08]) {
            assert!((a - e).abs() < 1e-15);
        }
        let h = entropy_lower_bound(&pi, 4, LogBase::Bits).unwrap();
        assert!((h - 1.7205553986408657).abs() < 1e-12);
    }

    #[test]
    fn block_length_errors() {
        assert!(matches!(block_distribution(&[0.5, 0.5], 2), Err(Error::BlockLength(2, 2))));
        assert!(block_distribution(&[0.5, 0.5, 0.5, 0.5], 2).is_err());
    }

    #[test]
    fn prop2_on_qutrit_example() {
        let spec = qutrit_example();
        for seed in 0..100 {
            assert!(prop2_verify(&spec, &random_density_matrix(3, seed)).unwrap());
        }
        assert!(prop2_verify(&spec, &DensityMatrix::basis(3, 0)).unwrap());
        assert!(prop2_verify(&spec, &DensityMatrix::maximally_mixed(3)).unwrap());
    }
}
