//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation zeroes one off-diagonal pair `(p, q)`. Writing
//! `a_pq = |a_pq| e^{i phi}`, the 2x2 block is first made real by the phase
//! `diag(1, e^{-i phi})` and then diagonalized by a real Givens rotation; the
//! combined unitary is `J = D R D*`, applied as `A <- J* A J`.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Hermitian check applied on entry.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Default off-diagonal Frobenius threshold (relative to `max(1, |M|_F)`).
pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted descending with matching unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `Q diag(lambda) Q*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let q = &self.eigenvectors;
        let d = q.rows();
        ComplexMatrix::from_fn(d, d, |r, c| {
            (0..d)
                .map(|k| q[(r, k)] * self.eigenvalues[k] * q[(c, k)].conj())
                .sum()
        })
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn check_input(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

fn jacobi(m: &ComplexMatrix, tol: f64, want_vectors: bool) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    check_input(m)?;
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize so roundoff in the input does not bias the rotations
    for r in 0..n {
        a[(r, r)] = Complex64::new(a[(r, r)].re, 0.0);
        for c in r + 1..n {
            let z = 0.5 * (a[(r, c)] + a[(c, r)].conj());
            a[(r, c)] = z;
            a[(c, r)] = z.conj();
        }
    }
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let threshold = tol * m.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // skip pairs already negligible against both diagonal entries
                if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // J = [[c, s e^{i phi}], [-s e^{-i phi}, c]] on (p, q)
                let j_pp = Complex64::new(cs, 0.0);
                let j_pq = phase * sn;
                let j_qp = -phase.conj() * sn;
                let j_qq = j_pp;

                // A <- A J
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * j_pp + arq * j_qp;
                    a[(r, q)] = arp * j_pq + arq * j_qq;
                }
                // A <- J* A
                for c in 0..n {
                    let apc = a[(p, c)];
                    let aqc = a[(q, c)];
                    a[(p, c)] = j_pp.conj() * apc + j_qp.conj() * aqc;
                    a[(q, c)] = j_pq.conj() * apc + j_qq.conj() * aqc;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(app - t * mag, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * mag, 0.0);

                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp * j_pp + vrq * j_qp;
                        v[(r, q)] = vrp * j_pq + vrq * j_qq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]));
    Ok((eigenvalues, vectors))
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// `tol` is the stopping threshold on the off-diagonal Frobenius norm of
/// `Q* M Q`, relative to `max(1, |M|_F)`.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    let (eigenvalues, vectors) = jacobi(m, tol, true)?;
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors.expect("eigenvectors requested"),
    })
}

/// Eigenvalues only, sorted descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    jacobi(m, tol, false).map(|(values, _)| values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_hermitian;

    #[test]
    fn diagonal_input_sorted_descending() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let e = hermitian_eig(&m, DEFAULT_TOL).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert!(e.reconstruct().approx_eq(&m, 1e-14));
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let m = ComplexMatrix::from_vec(2, 2, vec![zero, one, one, zero]).unwrap();
        let e = hermitian_eig(&m, DEFAULT_TOL).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_off_diagonal_phase() {
        // [[1, i], [-i, 1]] has eigenvalues 2 and 0
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let e = hermitian_eig(&m, DEFAULT_TOL).unwrap();
        assert!((e.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!(e.eigenvalues[1].abs() < 1e-14);
        assert!(e.reconstruct().approx_eq(&m, 1e-14));
    }

    #[test]
    fn random_hermitian_reconstructs() {
        for seed in 0..5 {
            let m = random_hermitian(5, seed);
            let e = hermitian_eig(&m, DEFAULT_TOL).unwrap();
            assert!(e.reconstruct().max_abs_diff(&m) <= 1e-9);
            let q = &e.eigenvectors;
            let gram = q.adjoint().matmul(q).unwrap();
            assert!(gram.approx_eq(&ComplexMatrix::identity(5), 1e-10));
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eigenvalues_only_match_full() {
        let m = random_hermitian(7, 11);
        let full = hermitian_eig(&m, DEFAULT_TOL).unwrap().eigenvalues;
        let only = hermitian_eigenvalues(&m, DEFAULT_TOL).unwrap();
        for (a, b) in full.iter().zip(&only) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(hermitian_eig(&m, DEFAULT_TOL), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rejects_non_square() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&m, DEFAULT_TOL), Err(Error::NotSquare { .. })));
    }
}
