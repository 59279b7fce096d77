//! Von Neumann and relative entropy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::eig::{hermitian_eig, hermitian_eigenvalues, DEFAULT_TOL};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Eigenvalues in `[-CLAMP_TOL, 0)` are treated as roundoff and set to zero.
pub const CLAMP_TOL: f64 = 1e-9;
/// Eigenvalues of `sigma` below this are treated as outside its support.
pub const SUPPORT_EIGEN_CUTOFF: f64 = 1e-12;
/// `rho`-weight above this on the kernel of `sigma` makes `S(rho||sigma)` infinite.
pub const SUPPORT_WEIGHT_CUTOFF: f64 = 1e-9;

/// Logarithm base for entropies: bits or nats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Bits,
    #[serde(rename = "nat")]
    Nats,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Bits => "2",
            LogBase::Nats => "nat",
        })
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "2" | "bits" => Ok(LogBase::Bits),
            "nat" | "e" | "nats" => Ok(LogBase::Nats),
            other => Err(format!("unknown logarithm base `{other}` (expected 2 or nat)")),
        }
    }
}

/// `-sum x log x` with `0 log 0 = 0`. Entries must already be nonnegative.
pub fn shannon_entropy(weights: &[f64], base: LogBase) -> f64 {
    -weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * base.log(w))
        .sum::<f64>()
}

/// Entropy of a spectrum after clamping roundoff negatives and values above one.
pub fn spectrum_entropy(eigenvalues: &[f64], base: LogBase) -> Result<f64> {
    let mut clamped = Vec::with_capacity(eigenvalues.len());
    for &l in eigenvalues {
        if l < -CLAMP_TOL {
            return Err(Error::NotPositive(l));
        }
        clamped.push(l.clamp(0.0, 1.0));
    }
    Ok(shannon_entropy(&clamped, base).max(0.0))
}

/// `S(rho) = -Tr rho log rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> f64 {
    let eigs = hermitian_eigenvalues(rho.matrix(), DEFAULT_TOL).expect("density matrices are Hermitian");
    spectrum_entropy(&eigs, base).expect("density matrices are positive")
}

/// `S(rho||sigma) = Tr rho log rho - Tr rho log sigma`, evaluated in the
/// eigenbasis of `sigma`. Returns `+inf` when `rho` has weight on the kernel
/// of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, base: LogBase) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            actual: rho.dim(),
        });
    }
    let s = hermitian_eig(sigma.matrix(), DEFAULT_TOL)?;
    let mut cross = 0.0;
    for (k, &mu) in s.eigenvalues.iter().enumerate() {
        let v = s.eigenvector(k);
        let rv = rho.matrix().matvec(&v)?;
        let weight: f64 = v.iter().zip(&rv).map(|(a, b)| (a.conj() * b).re).sum();
        if mu < SUPPORT_EIGEN_CUTOFF {
            if weight > SUPPORT_WEIGHT_CUTOFF {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * base.log(mu);
    }
    let neg_entropy = -von_neumann_entropy(rho, base);
    Ok(neg_entropy - cross)
}
