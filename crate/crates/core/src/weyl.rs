//! Weyl operators and Weyl channels on `C^n`.
//!
//! With the clock `U e_j = w^j e_j` (`w = exp(2 pi i / n)`) and the shift
//! `V e_j = e_{j+1}`, the Weyl operators are `W_jk = U^j V^k` and a Weyl
//! channel is `rho -> sum_jk pi_jk W_jk rho W_jk*`. The probability table is
//! indexed `pi[j][k]`: row `j` is the power of `U`, column `k` the power of `V`.
//!
//! Since `W_jk e_m = w^{j(m+k)} e_{m+k}`, the channel acts entrywise as
//!
//! ```text
//! Phi(rho)[a][b] = sum_k c_k(a - b) rho[a - k][b - k],   c_k(t) = sum_j pi_jk w^{jt}
//! ```
//!
//! which is what [`WeylChannelSpec::apply_on_factor`] evaluates. Tensor powers are
//! applied one site at a time.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, ZERO};
use crate::linalg::random::rng;
use crate::linalg::state::DensityMatrix;
use crate::prob::ProbVector;
use rand::Rng;

/// Largest Hilbert-space dimension accepted for tensor powers (`3^5`).
pub const MAX_TENSOR_DIM: usize = 243;
/// Slack allowed in each comparison of the deformation chain.
pub const CHAIN_TOL: f64 = 1e-12;

fn root_of_unity(n: usize, power: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (power % n) as f64 / n as f64)
}

/// Clock `U` and shift `V` on `C^n`.
pub fn weyl_generators(n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let mut u = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        u[(j, j)] = root_of_unity(n, j);
        v[((j + 1) % n, j)] = Complex64::new(1.0, 0.0);
    }
    Ok((u, v))
}

/// `W_jk = U^j V^k`, indices reduced mod `n`.
pub fn weyl_operator(n: usize, j: usize, k: usize) -> Result<ComplexMatrix> {
    let (u, v) = weyl_generators(n)?;
    u.pow(j % n)?.matmul(&v.pow(k % n)?)
}

/// A Weyl channel: dimension `n` and the table `pi[j][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylChannelSpec {
    n: usize,
    /// Row-major `pi[j * n + k]`.
    pi: Vec<f64>,
}

impl WeylChannelSpec {
    /// Validates `pi` (given as rows `j`, columns `k`).
    pub fn new(n: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rows.len(),
            });
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(n, flat)
    }

    /// Validates a row-major table.
    pub fn from_flat(n: usize, pi: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if pi.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: pi.len(),
            });
        }
        if let Some(w) = pi.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidProbability(format!("pi entry {w} is negative or not finite")));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > crate::prob::SUM_TOL {
            return Err(Error::InvalidProbability(format!("pi sums to {sum}")));
        }
        Ok(Self { n, pi })
    }

    /// The identity channel, `pi_00 = 1`.
    pub fn identity(n: usize) -> Result<Self> {
        let mut pi = vec![0.0; n * n];
        pi[0] = 1.0;
        Self::from_flat(n, pi)
    }

    /// Uniform table; the completely depolarizing channel.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_flat(n, vec![1.0 / (n * n) as f64; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pi(&self, j: usize, k: usize) -> f64 {
        self.pi[(j % self.n) * self.n + k % self.n]
    }

    pub fn flat(&self) -> &[f64] {
        &self.pi
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.pi.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Table entries in the order of the deformation chain:
    /// `pi_00, pi_10, ..., pi_{n-1,0}, pi_01, ...` (column-major).
    pub fn chain(&self) -> Vec<f64> {
        let n = self.n;
        (0..n).flat_map(|k| (0..n).map(move |j| (j, k))).map(|(j, k)| self.pi(j, k)).collect()
    }

    /// `c[k][t] = sum_j pi_jk w^{jt}`.
    fn phase_coefficients(&self) -> Vec<Vec<Complex64>> {
        let n = self.n;
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|t| (0..n).map(|j| root_of_unity(n, j * t) * self.pi(j, k)).sum())
                    .collect()
            })
            .collect()
    }

    /// Applies the channel to the middle factor of `C^left (x) C^n (x) C^right`.
    pub fn apply_on_factor(&self, m: &ComplexMatrix, left: usize, right: usize) -> Result<ComplexMatrix> {
        let n = self.n;
        let dim = left * n * right;
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: m.rows(),
            });
        }
        let coeffs = self.phase_coefficients();
        let active: Vec<usize> = (0..n).filter(|&k| (0..n).any(|j| self.pi(j, k) != 0.0)).collect();
        let split = |idx: usize| (idx / (n * right), (idx / right) % n, idx % right);
        let join = |l: usize, x: usize, r: usize| (l * n + x) * right + r;

        let mut out = ComplexMatrix::zeros(dim, dim);
        for a in 0..dim {
            let (la, xa, ra) = split(a);
            for b in 0..dim {
                let (lb, xb, rb) = split(b);
                let t = (xa + n - xb) % n;
                let mut acc = ZERO;
                for &k in &active {
                    let src_a = join(la, (xa + n - k) % n, ra);
                    let src_b = join(lb, (xb + n - k) % n, rb);
                    acc += coeffs[k][t] * m[(src_a, src_b)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// `Phi(rho)` for `rho` on `C^n`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply_matrix(rho.matrix()).map(DensityMatrix::new_unchecked)
    }

    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.apply_on_factor(m, 1, 1)
    }

    /// `Phi^{(x)N}(m)` for `m` on `(C^n)^{(x)N}`.
    pub fn apply_tensor_power_matrix(&self, copies: usize, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let dim = tensor_dim(self.n, copies)?;
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: m.rows(),
            });
        }
        let mut out = m.clone();
        for site in 0..copies {
            let left = self.n.pow(site as u32);
            let right = self.n.pow((copies - site - 1) as u32);
            out = self.apply_on_factor(&out, left, right)?;
        }
        Ok(out)
    }

    /// Kraus operators `sqrt(pi_jk) W_jk` of the nonzero terms.
    pub fn kraus_operators(&self) -> Result<Vec<ComplexMatrix>> {
        let n = self.n;
        let mut ops = Vec::new();
        for j in 0..n {
            for k in 0..n {
                let w = self.pi(j, k);
                if w > 0.0 {
                    ops.push(weyl_operator(n, j, k)?.scale_real(w.sqrt()));
                }
            }
        }
        Ok(ops)
    }
}

/// `n^copies`, subject to [`MAX_TENSOR_DIM`].
pub fn tensor_dim(n: usize, copies: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..copies {
        dim = dim.saturating_mul(n);
        if dim > MAX_TENSOR_DIM {
            return Err(Error::ResourceGuard {
                dim,
                limit: MAX_TENSOR_DIM,
            });
        }
    }
    Ok(dim)
}

pub fn apply_weyl_channel(spec: &WeylChannelSpec, rho: &DensityMatrix) -> Result<DensityMatrix> {
    spec.apply(rho)
}

/// `Phi^{(x)N}(rho)`, applied site by site.
pub fn apply_tensor_power(spec: &WeylChannelSpec, copies: usize, rho: &DensityMatrix) -> Result<DensityMatrix> {
    spec.apply_tensor_power_matrix(copies, rho.matrix()).map(DensityMatrix::new_unchecked)
}

/// The `U`-twirled phase damping channel, `pi_jk = p_k / n`.
pub fn qc_spec_from_p(p: &ProbVector) -> Result<WeylChannelSpec> {
    let n = p.len();
    let pi = (0..n).flat_map(|_| p.weights().iter().map(move |&pk| pk / n as f64)).collect();
    WeylChannelSpec::from_flat(n, pi)
}

/// Column sums `p_k = sum_j pi_jk`.
pub fn marginals(spec: &WeylChannelSpec) -> ProbVector {
    let n = spec.n();
    ProbVector::new((0..n).map(|k| (0..n).map(|j| spec.pi(j, k)).sum()).collect())
        .expect("columns of a validated table sum to one")
}

/// First failing comparison in the deformation chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainViolation {
    /// 1-based index of the failing comparison (`chain[position - 1] >= chain[position]`).
    pub position: usize,
    /// `(j, k)` of the left-hand entry.
    pub lhs: (usize, usize),
    /// `(j, k)` of the right-hand entry.
    pub rhs: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationCertificate {
    pub ordered: bool,
    pub marginals: ProbVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<ChainViolation>,
}

/// Checks `pi_00 >= pi_10 >= ... >= pi_{n-1,0} >= pi_01 >= ... >= pi_{n-1,n-1}`.
pub fn deformation_certificate(spec: &WeylChannelSpec) -> DeformationCertificate {
    let n = spec.n();
    let chain = spec.chain();
    let coords = |m: usize| (m % n, m / n);
    let violation = (1..chain.len())
        .find(|&m| chain[m - 1] < chain[m] - CHAIN_TOL)
        .map(|m| ChainViolation {
            position: m,
            lhs: coords(m - 1),
            rhs: coords(m),
        });
    DeformationCertificate {
        ordered: violation.is_none(),
        marginals: marginals(spec),
        violation,
    }
}

/// Random deformation of the q-c channel with descending marginals `p`.
///
/// Each column `k` is `p_k ((1 - t_k)/n + t_k w^{(k)})` with `w^{(k)}` a random
/// descending distribution and `t_k = perturbation`. Where the boundary
/// `pi_{n-1,k} >= pi_{0,k+1}` fails, both neighbouring columns are averaged
/// halfway back towards their constant q-c value until the chain holds.
pub fn random_deformation(p: &ProbVector, perturbation: f64, seed: u64) -> Result<WeylChannelSpec> {
    let n = p.len();
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !p.is_non_increasing(0.0) {
        return Err(Error::NotDeformation("marginals must be non-increasing".into()));
    }
    let mut r = rng(seed, 11);
    let shapes: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut w: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            w.sort_by(|a, b| b.total_cmp(a));
            w
        })
        .collect();
    let mut t = vec![perturbation.clamp(0.0, 1.0); n];
    let column = |k: usize, tk: f64| -> Vec<f64> {
        let pk = p.weights()[k];
        shapes[k].iter().map(|&w| pk * ((1.0 - tk) / n as f64 + tk * w)).collect()
    };

    loop {
        let cols: Vec<Vec<f64>> = (0..n).map(|k| column(k, t[k])).collect();
        let mut clean = true;
        for k in 0..n - 1 {
            if cols[k][n - 1] < cols[k + 1][0] {
                clean = false;
                for i in [k, k + 1] {
                    t[i] = if t[i] > 1e-6 { 0.5 * t[i] } else { 0.0 };
                }
            }
        }
        if clean {
            let mut pi = vec![0.0; n * n];
            for (k, col) in cols.iter().enumerate() {
                for (j, &v) in col.iter().enumerate() {
                    pi[j * n + k] = v;
                }
            }
            // renormalize away roundoff so the table sums to one
            let total: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|x| *x /= total);
            return WeylChannelSpec::from_flat(n, pi);
        }
    }
}

/// `E(rho) = (1/n) sum_j U^j rho U^{j*}`.
pub fn expectation(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = rho.rows();
    let (u, _) = weyl_generators(n)?;
    let mut out = ComplexMatrix::zeros(n, n);
    let mut uj = ComplexMatrix::identity(n);
    for _ in 0..n {
        out.add_scaled(&rho.conjugate_by(&uj)?, Complex64::new(1.0 / n as f64, 0.0));
        uj = uj.matmul(&u)?;
    }
    Ok(out)
}

/// `Xi_k(rho) = (1/n) sum_j U^j V^k rho V^{k*} U^{j*}`.
pub fn xi_k(n: usize, k: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rho.rows(),
        });
    }
    let (_, v) = weyl_generators(n)?;
    expectation(&rho.conjugate_by(&v.pow(k % n)?)?)
}

/// `max_j |U^j Phi(rho) U^{j*} - Phi(rho)|_max`.
pub fn check_invariance(spec: &WeylChannelSpec, rho: &DensityMatrix) -> Result<f64> {
    let out = spec.apply(rho)?.into_matrix();
    let (u, _) = weyl_generators(spec.n())?;
    let mut residual: f64 = 0.0;
    let mut uj = ComplexMatrix::identity(spec.n());
    for _ in 0..spec.n() {
        residual = residual.max(out.conjugate_by(&uj)?.max_abs_diff(&out));
        uj = uj.matmul(&u)?;
    }
    Ok(residual)
}

/// `|Phi(W_ab rho W_ab*) - W_ab Phi(rho) W_ab*|_max`.
pub fn check_weyl_covariance(spec: &WeylChannelSpec, rho: &DensityMatrix, a: usize, b: usize) -> Result<f64> {
    let w = weyl_operator(spec.n(), a, b)?;
    let lhs = spec.apply_matrix(&rho.matrix().conjugate_by(&w)?)?;
    let rhs = spec.apply(rho)?.into_matrix().conjugate_by(&w)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// The q-c deformation table of the worked qutrit example, marginals `(1/2, 1/3, 1/6)`.
pub fn qutrit_example() -> WeylChannelSpec {
    WeylChannelSpec::new(
        3,
        &[
            vec![1.0 / 4.0, 1.0 / 8.0, 1.0 / 12.0],
            vec![1.0 / 8.0, 1.0 / 8.0, 1.0 / 24.0],
            vec![1.0 / 8.0, 1.0 / 12.0, 1.0 / 24.0],
        ],
    )
    .expect("valid table")
}
