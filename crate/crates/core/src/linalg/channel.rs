use super::matrix::ComplexMatrix;
use super::state::DensityMatrix;
use crate::error::{Error, Result};

pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Completely positive trace-preserving map in Kraus form, `rho -> sum K rho K*`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus_ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(in_dim: usize, out_dim: usize, kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::NotTracePreserving(f64::INFINITY));
        }
        for k in &kraus_ops {
            if k.rows() != out_dim || k.cols() != in_dim {
                return Err(Error::DimensionMismatch {
                    expected: out_dim * in_dim,
                    actual: k.rows() * k.cols(),
                });
            }
        }
        let ch = Self {
            in_dim,
            out_dim,
            kraus_ops,
        };
        let dev = ch.completeness_deviation();
        if dev > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            kraus_ops: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// `rho -> Tr(rho) I/dim`, with the `dim^2` Kraus operators `|a><b|/sqrt(dim)`.
    pub fn completely_depolarizing(dim: usize) -> Self {
        let w = 1.0 / (dim as f64).sqrt();
        let mut ops = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut k = ComplexMatrix::zeros(dim, dim);
                k[(a, b)] = num_complex::Complex64::new(w, 0.0);
                ops.push(k);
            }
        }
        Self {
            in_dim: dim,
            out_dim: dim,
            kraus_ops: ops,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    /// `max |sum K*K - I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus_ops {
            let kk = k.adjoint().matmul(k).expect("validated shapes");
            sum.add_scaled(&kk, num_complex::Complex64::new(1.0, 0.0));
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.in_dim))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply_matrix(rho.matrix()).map(DensityMatrix::new_unchecked)
    }

    /// Applies the Kraus sum to an arbitrary square matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.in_dim || m.cols() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                actual: m.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus_ops {
            out.add_scaled(&m.conjugate_by(k)?, num_complex::Complex64::new(1.0, 0.0));
        }
        Ok(out)
    }

    /// `self (x) other` with Kraus operators `K_i (x) L_j`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut ops = Vec::with_capacity(self.kraus_ops.len() * other.kraus_ops.len());
        for a in &self.kraus_ops {
            for b in &other.kraus_ops {
                ops.push(a.kron(b));
            }
        }
        Self {
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
            kraus_ops: ops,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_density_matrix;

    #[test]
    fn depolarizing_outputs_maximally_mixed() {
        let ch = KrausChannel::completely_depolarizing(3);
        assert!(ch.completeness_deviation() < 1e-14);
        let out = ch.apply(&random_density_matrix(3, 4)).unwrap();
        assert!(out.matrix().approx_eq(DensityMatrix::maximally_mixed(3).matrix(), 1e-14));
    }

    #[test]
    fn rejects_incomplete_kraus_set() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(
            KrausChannel::new(2, 2, vec![half]),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn apply_dimension_mismatch() {
        let ch = KrausChannel::identity(2);
        assert!(ch.apply(&DensityMatrix::maximally_mixed(3)).is_err());
    }
}
