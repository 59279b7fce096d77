//! Minimal output entropy over pure inputs.
//!
//! The objective `psi -> S(Phi^{(x)N}(|psi><psi|))` is minimized by projected
//! gradient descent on the unit sphere from seeded Haar-random starts. Pure
//! inputs suffice since entropy is concave and the channel linear. Gradients
//! are central finite differences in the real coordinates
//! `(Re psi_0, Im psi_0, Re psi_1, ...)` of the normalized state.
//!
//! Restarts are independent given `(seed, restart index)` and run on the
//! current rayon pool; the best value wins, ties going to the lower index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::eig::{hermitian_eigenvalues, DEFAULT_TOL};
use crate::linalg::entropy::{spectrum_entropy, LogBase};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::random::{derive_seed, haar_state, rng, SeededRng};
use crate::linalg::state::PureState;
use crate::weyl::{deformation_certificate, marginals, tensor_dim, WeylChannelSpec};

/// Central-difference step in amplitude coordinates.
pub const FD_STEP: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
const HALVINGS_PER_ATTEMPT: usize = 8;
const ATTEMPTS_BEFORE_PERTURB: usize = 5;
const MAX_STEP: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub value_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iterations: 500,
            step_tolerance: 1e-10,
            value_tolerance: 1e-12,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.step_tolerance > 0.0 && self.value_tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    pub value: f64,
    pub argmin: PureState,
    pub base: LogBase,
    pub restarts_used: usize,
    pub best_restart_seed: u64,
    pub best_restart_index: usize,
    /// Whether the winning restart stopped on a tolerance rather than the iteration cap.
    pub converged: bool,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

/// `S(Phi^{(x)N}(|psi><psi|))`.
pub fn output_entropy(spec: &WeylChannelSpec, copies: usize, psi: &PureState, base: LogBase) -> Result<f64> {
    let dim = tensor_dim(spec.n(), copies)?;
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: psi.dim(),
        });
    }
    Objective { spec, copies, base }.value(psi.amplitudes())
}

/// Finite-difference gradient of [`output_entropy`] in real coordinates
/// `(Re psi_0, Im psi_0, ...)`, length `2 * dim`.
pub fn entropy_gradient(spec: &WeylChannelSpec, copies: usize, psi: &PureState, base: LogBase) -> Result<Vec<f64>> {
    let dim = tensor_dim(spec.n(), copies)?;
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: psi.dim(),
        });
    }
    let g = Objective { spec, copies, base }.gradient(psi.amplitudes())?;
    Ok(g.iter().flat_map(|z| [z.re, z.im]).collect())
}

struct Objective<'a> {
    spec: &'a WeylChannelSpec,
    copies: usize,
    base: LogBase,
}

impl Objective<'_> {
    /// Entropy of the output for the normalized direction of `x`.
    fn value(&self, x: &[Complex64]) -> Result<f64> {
        let norm_sqr: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let rho = ComplexMatrix::outer(x, x).scale_real(1.0 / norm_sqr);
        let out = self.spec.apply_tensor_power_matrix(self.copies, &rho)?;
        let eigs = hermitian_eigenvalues(&out, DEFAULT_TOL)?;
        spectrum_entropy(&eigs, self.base)
    }

    /// Central differences; the real part of each entry is the derivative
    /// along `Re x_m`, the imaginary part along `Im x_m`.
    fn gradient(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut probe = x.to_vec();
        let mut g = Vec::with_capacity(x.len());
        for m in 0..x.len() {
            let mut parts = [0.0; 2];
            for (part, dir) in parts.iter_mut().zip([Complex64::new(FD_STEP, 0.0), Complex64::new(0.0, FD_STEP)]) {
                probe[m] = x[m] + dir;
                let plus = self.value(&probe)?;
                probe[m] = x[m] - dir;
                let minus = self.value(&probe)?;
                probe[m] = x[m];
                *part = (plus - minus) / (2.0 * FD_STEP);
            }
            g.push(Complex64::new(parts[0], parts[1]));
        }
        Ok(g)
    }
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
}

/// Real inner product of complex vectors viewed in `R^{2d}`.
fn real_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn random_tangent(r: &mut SeededRng, x: &[Complex64], size: f64) -> Vec<Complex64> {
    let mut t = crate::linalg::random::gaussian_vector(r, x.len());
    let radial = real_dot(&t, x);
    for (ti, xi) in t.iter_mut().zip(x) {
        *ti -= radial * xi;
    }
    let norm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    t.iter_mut().for_each(|z| *z *= size / norm);
    t
}

struct RestartOutcome {
    value: f64,
    state: Vec<Complex64>,
    converged: bool,
}

fn run_restart(obj: &Objective<'_>, dim: usize, config: &OptimizerConfig, seed: u64) -> Result<RestartOutcome> {
    let mut x = haar_state(&mut rng(seed, 0), dim).amplitudes().to_vec();
    let mut noise = rng(seed, 1);
    let mut f = obj.value(&x)?;
    let mut step0 = 1.0;
    let mut converged = false;

    for _ in 0..config.max_iterations {
        let mut g = obj.gradient(&x)?;
        let radial = real_dot(&g, &x);
        for (gi, xi) in g.iter_mut().zip(&x) {
            *gi -= radial * xi;
        }
        let g_sqr = real_dot(&g, &g);
        if g_sqr.sqrt() < 1e-14 {
            converged = true;
            break;
        }

        let mut accepted = None;
        let mut step = step0;
        'search: for _ in 0..ATTEMPTS_BEFORE_PERTURB {
            for _ in 0..HALVINGS_PER_ATTEMPT {
                let mut y: Vec<Complex64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
                normalize(&mut y);
                let fy = obj.value(&y)?;
                if fy <= f - ARMIJO * step * g_sqr {
                    accepted = Some((y, fy, step));
                    break 'search;
                }
                step *= 0.5;
            }
        }

        match accepted {
            Some((y, fy, step)) => {
                let moved = distance(&x, &y);
                let drop = f - fy;
                x = y;
                f = fy;
                step0 = (2.0 * step).min(MAX_STEP);
                if moved < config.step_tolerance || drop < config.value_tolerance {
                    converged = true;
                    break;
                }
            }
            None => {
                // stalled, likely at a spectral crossing: try a small random tangent kick
                let t = random_tangent(&mut noise, &x, config.step_tolerance);
                let mut y: Vec<Complex64> = x.iter().zip(&t).map(|(a, b)| a + b).collect();
                normalize(&mut y);
                let fy = obj.value(&y)?;
                if fy < f {
                    x = y;
                    f = fy;
                    step0 = 1.0;
                } else {
                    converged = true;
                    break;
                }
            }
        }
    }
    Ok(RestartOutcome {
        value: f,
        state: x,
        converged,
    })
}

/// Numerical estimate (an upper bound) of `inf S(Phi^{(x)N}(rho))`.
pub fn min_output_entropy(
    spec: &WeylChannelSpec,
    copies: usize,
    config: &OptimizerConfig,
    base: LogBase,
) -> Result<EntropyResult> {
    config.validate()?;
    let dim = tensor_dim(spec.n(), copies)?;
    let obj = Objective { spec, copies, base };
    let outcomes = (0..config.restarts)
        .into_par_iter()
        .map(|i| run_restart(&obj, dim, config, derive_seed(config.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value < outcomes[best].value {
            best = i;
        }
    }
    let winner = &outcomes[best];
    Ok(EntropyResult {
        value: winner.value,
        argmin: PureState::normalized(winner.state.clone())?,
        base,
        restarts_used: config.restarts,
        best_restart_seed: derive_seed(config.seed, best as u64),
        best_restart_index: best,
        converged: winner.converged,
        restart_values: outcomes.iter().map(|o| o.value).collect(),
    })
}

/// `N * H(p)` for a certified deformation with marginals `p`.
pub fn min_output_entropy_closed_form(spec: &WeylChannelSpec, copies: usize, base: LogBase) -> Result<f64> {
    let cert = deformation_certificate(spec);
    if let Some(v) = cert.violation {
        return Err(Error::NotDeformation(format!(
            "chain fails at position {} (pi{:?} < pi{:?})",
            v.position, v.lhs, v.rhs
        )));
    }
    Ok(copies as f64 * marginals(spec).entropy(base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ProbVector;
    use crate::weyl::{qc_spec_from_p, qutrit_example};

    const H_QUTRIT: f64 = 1.4591479170272448;

    fn small_config(restarts: usize) -> OptimizerConfig {
        OptimizerConfig::default().with_restarts(restarts).with_seed(7)
    }

    #[test]
    fn output_entropy_cases() {
        let spec = qutrit_example();
        let e0 = PureState::basis(3, 0);
        assert!((output_entropy(&spec, 1, &e0, LogBase::Bits).unwrap() - H_QUTRIT).abs() < 1e-12);

        let psi = crate::linalg::random::random_pure_state(3, 1);
        let id = WeylChannelSpec::identity(3).unwrap();
        assert!(output_entropy(&id, 1, &psi, LogBase::Bits).unwrap().abs() < 1e-9);
        let dep = WeylChannelSpec::uniform(3).unwrap();
        assert!((output_entropy(&dep, 1, &psi, LogBase::Bits).unwrap() - 3f64.log2()).abs() < 1e-12);
        assert!(output_entropy(&spec, 2, &psi, LogBase::Bits).is_err());
    }

    #[test]
    fn closed_form_values() {
        let spec = qutrit_example();
        let one = min_output_entropy_closed_form(&spec, 1, LogBase::Bits).unwrap();
        let two = min_output_entropy_closed_form(&spec, 2, LogBase::Bits).unwrap();
        assert!((one - 1.4591479170272448).abs() < 1e-12);
        assert!((two - 2.91829583405449).abs() < 1e-12);
        let uniform = WeylChannelSpec::uniform(4).unwrap();
        assert!((min_output_entropy_closed_form(&uniform, 3, LogBase::Bits).unwrap() - 6.0).abs() < 1e-12);

        let mut rows = spec.rows();
        rows[0][0] = 1.0 / 24.0;
        rows[2][2] = 1.0 / 4.0;
        let bad = WeylChannelSpec::new(3, &rows).unwrap();
        assert!(matches!(
            min_output_entropy_closed_form(&bad, 1, LogBase::Bits),
            Err(Error::NotDeformation(_))
        ));
    }

    #[test]
    fn finds_qutrit_minimum() {
        let r = min_output_entropy(&qutrit_example(), 1, &small_config(32), LogBase::Bits).unwrap();
        assert!((r.value - H_QUTRIT).abs() < 1e-6, "{}", r.value);
        assert_eq!(r.restart_values.len(), 32);
    }

    #[test]
    fn finds_qc_minimum() {
        let p = ProbVector::new(vec![0.5, 1.0 / 3.0, 1.0 / 6.0]).unwrap();
        let spec = qc_spec_from_p(&p).unwrap();
        let r = min_output_entropy(&spec, 1, &small_config(32), LogBase::Bits).unwrap();
        assert!((r.value - H_QUTRIT).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn identity_channel_has_zero_minimum() {
        let id = WeylChannelSpec::identity(2).unwrap();
        for copies in 1..=2 {
            let r = min_output_entropy(&id, copies, &small_config(4), LogBase::Bits).unwrap();
            assert!(r.value.abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let spec = qutrit_example();
        let config = small_config(6);
        let a = min_output_entropy(&spec, 1, &config, LogBase::Bits).unwrap();
        let b = min_output_entropy(&spec, 1, &config, LogBase::Bits).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| min_output_entropy(&spec, 1, &config, LogBase::Bits).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn config_validation() {
        let spec = qutrit_example();
        let bad = OptimizerConfig::default().with_restarts(0);
        assert!(matches!(
            min_output_entropy(&spec, 1, &bad, LogBase::Bits),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            min_output_entropy(&spec, 6, &OptimizerConfig::default(), LogBase::Bits),
            Err(Error::ResourceGuard { .. })
        ));
    }
}
