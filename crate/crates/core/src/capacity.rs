//! Classical capacity closed forms, additivity reports, and numerical checks
//! of the entropy bound for `Phi (x) Omega` and of data processing.
//!
//! For the covariant channels handled here `C = log n - min S(Phi(rho))`, and
//! for q-c channels and their deformations the minimum is `H(p)` with `p` the
//! column marginals of the Weyl table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::channel::KrausChannel;
use crate::linalg::eig::{hermitian_eig, DEFAULT_TOL};
use crate::linalg::entropy::{relative_entropy, von_neumann_entropy, LogBase};
use crate::linalg::matrix::{ComplexMatrix, ONE};
use crate::linalg::random::{derive_seed, random_channel, random_density_matrix, random_pure_state};
use crate::linalg::state::{partial_trace, DensityMatrix, Keep, PureState};
use crate::majorization::tensor_power_block_bound;
use crate::optimizer::{min_output_entropy, min_output_entropy_closed_form, OptimizerConfig};
use crate::prob::ProbVector;
use crate::weyl::{deformation_certificate, marginals, qc_spec_from_p, WeylChannelSpec};

/// Margins below this indicate a numerical bug rather than a counterexample.
pub const MARGIN_TOL: f64 = -1e-8;
/// Restarts landing this far below `N H(p)` are flagged.
pub const RED_ALERT_GAP: f64 = 1e-4;
/// Slack for the orderings asserted by [`AdditivityReport::invariant_violations`].
pub const BRACKET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityFormula {
    /// U-invariant q-c Weyl channel.
    Qc,
    /// Deformation of a q-c channel (ordered table).
    Deformed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub n: usize,
    pub base: LogBase,
    pub marginals: ProbVector,
    pub capacity: f64,
    pub min_output_entropy: f64,
    pub formula: CapacityFormula,
}

fn capacity_from(p: &ProbVector, base: LogBase, formula: CapacityFormula) -> CapacityReport {
    let n = p.len();
    let min_output_entropy = p.entropy(base);
    CapacityReport {
        n,
        base,
        marginals: p.clone(),
        capacity: base.log(n as f64) - min_output_entropy,
        min_output_entropy,
        formula,
    }
}

/// `C = log n + sum p_k log p_k` for the q-c channel built from `p`.
pub fn capacity_qc(p: &ProbVector, base: LogBase) -> CapacityReport {
    capacity_from(p, base, CapacityFormula::Qc)
}

/// Same formula with `p = marginals(spec)`; refuses tables that are not
/// ordered deformations.
pub fn capacity_deformed(spec: &WeylChannelSpec, base: LogBase) -> Result<CapacityReport> {
    let cert = deformation_certificate(spec);
    if let Some(v) = cert.violation {
        return Err(Error::NotDeformation(format!("chain fails at position {}", v.position)));
    }
    Ok(capacity_from(&cert.marginals, base, CapacityFormula::Deformed))
}

/// Whether every row of the table is the same, i.e. `pi_jk = p_k / n`.
pub fn is_qc_spec(spec: &WeylChannelSpec, tol: f64) -> bool {
    let n = spec.n();
    let p = marginals(spec);
    (0..n).all(|j| (0..n).all(|k| (spec.pi(j, k) - p.weights()[k] / n as f64).abs() <= tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    #[serde(rename = "N")]
    pub copies: usize,
    pub single_copy_min: f64,
    pub scaled_single: f64,
    pub numeric_min_at_n: f64,
    pub block_bound_at_n: f64,
    /// `numeric_min_at_n - scaled_single`.
    pub gap_numeric: f64,
    /// `scaled_single - block_bound_at_n`.
    pub gap_bound: f64,
    pub optimizer_config_digest: String,
    /// The block bound lies strictly below `N H(p)`, so it cannot certify the closed form alone.
    pub bound_below_closed_form: bool,
    /// Number of restarts that ended below `scaled_single - 1e-4`.
    pub red_alert_restarts: usize,
    pub optimizer_converged: bool,
    pub restarts: usize,
}

impl AdditivityReport {
    /// Descriptions of any broken ordering; empty on a consistent report.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.numeric_min_at_n > self.scaled_single + BRACKET_TOL {
            out.push(format!(
                "numeric minimum {} exceeds N H(p) = {}",
                self.numeric_min_at_n, self.scaled_single
            ));
        }
        if self.block_bound_at_n > self.numeric_min_at_n + BRACKET_TOL {
            out.push(format!(
                "block bound {} exceeds numeric minimum {}",
                self.block_bound_at_n, self.numeric_min_at_n
            ));
        }
        out
    }
}

/// Stable hex digest (FNV-1a) of the optimizer settings.
pub fn config_digest(config: &OptimizerConfig) -> String {
    let canonical = format!(
        "restarts={};max_iterations={};step_tolerance={:e};value_tolerance={:e};seed={}",
        config.restarts, config.max_iterations, config.step_tolerance, config.value_tolerance, config.seed
    );
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Closed form, numerical minimum and block bound for `Phi^{(x)N}`.
pub fn additivity_report(
    spec: &WeylChannelSpec,
    copies: usize,
    config: &OptimizerConfig,
    base: LogBase,
) -> Result<AdditivityReport> {
    let single_copy_min = min_output_entropy_closed_form(spec, 1, base)?;
    let bound = tensor_power_block_bound(spec, copies, base)?;
    let numeric = min_output_entropy(spec, copies, config, base)?;
    let scaled_single = copies as f64 * single_copy_min;
    Ok(AdditivityReport {
        copies,
        single_copy_min,
        scaled_single,
        numeric_min_at_n: numeric.value,
        block_bound_at_n: bound.entropy_bound,
        gap_numeric: numeric.value - scaled_single,
        gap_bound: scaled_single - bound.entropy_bound,
        optimizer_config_digest: config_digest(config),
        bound_below_closed_form: bound.entropy_bound < scaled_single - 1e-12,
        red_alert_restarts: numeric
            .restart_values
            .iter()
            .filter(|&&v| v < scaled_single - RED_ALERT_GAP)
            .count(),
        optimizer_converged: numeric.converged,
        restarts: numeric.restarts_used,
    })
}

/// Applies `channel` to the second factor of `C^left (x) C^d`.
fn apply_on_second(channel: &KrausChannel, m: &ComplexMatrix, left: usize) -> Result<ComplexMatrix> {
    let id = ComplexMatrix::identity(left);
    let lifted: Vec<ComplexMatrix> = channel.kraus_ops().iter().map(|k| id.kron(k)).collect();
    let mut out = ComplexMatrix::zeros(left * channel.out_dim(), left * channel.out_dim());
    for k in &lifted {
        out.add_scaled(&m.conjugate_by(k)?, ONE);
    }
    Ok(out)
}

fn check_bipartite(n: usize, omega: &KrausChannel, xi: &PureState) -> Result<()> {
    if omega.in_dim() != omega.out_dim() {
        return Err(Error::DimensionMismatch {
            expected: omega.in_dim(),
            actual: omega.out_dim(),
        });
    }
    if xi.dim() != n * omega.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: n * omega.in_dim(),
            actual: xi.dim(),
        });
    }
    Ok(())
}

/// `(Phi (x) Omega)(|xi><xi|)` where `Phi` is the Weyl channel `spec` on the first factor.
pub fn apply_product(spec: &WeylChannelSpec, omega: &KrausChannel, xi: &PureState) -> Result<DensityMatrix> {
    check_bipartite(spec.n(), omega, xi)?;
    let m = omega.in_dim();
    let after_phi = spec.apply_on_factor(xi.density().matrix(), 1, m)?;
    Ok(DensityMatrix::new_unchecked(apply_on_second(omega, &after_phi, spec.n())?))
}

/// `H(p) + S(Omega(Tr_H |xi><xi|))`.
pub fn prop1_bound(p: &ProbVector, omega: &KrausChannel, xi: &PureState, base: LogBase) -> Result<f64> {
    let n = p.len();
    check_bipartite(n, omega, xi)?;
    let reduced = partial_trace(&xi.density(), n, omega.in_dim(), Keep::B)?;
    Ok(p.entropy(base) + von_neumann_entropy(&omega.apply(&reduced)?, base))
}

/// The classical-to-quantum map
/// `rho -> sum_k <e_k, rho e_k> (Xi_k (x) Omega)(|xi><xi|)` from `C^n` to `C^n (x) K`.
#[derive(Debug, Clone)]
pub struct Upsilon {
    n: usize,
    /// `(Xi_k (x) Omega)(|xi><xi|)` for each `k`.
    outputs: Vec<ComplexMatrix>,
}

impl Upsilon {
    pub fn new(n: usize, omega: &KrausChannel, xi: &PureState) -> Result<Self> {
        check_bipartite(n, omega, xi)?;
        let outputs = (0..n)
            .map(|k| {
                let mut pi = vec![0.0; n * n];
                for j in 0..n {
                    pi[j * n + k] = 1.0 / n as f64;
                }
                let xi_k = WeylChannelSpec::from_flat(n, pi)?;
                let after = xi_k.apply_on_factor(xi.density().matrix(), 1, omega.in_dim())?;
                apply_on_second(omega, &after, n)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, outputs })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: rho.dim(),
            });
        }
        let dim = self.outputs[0].rows();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (k, tau) in self.outputs.iter().enumerate() {
            out.add_scaled(tau, rho.matrix()[(k, k)]);
        }
        Ok(DensityMatrix::new_unchecked(out))
    }

    /// Kraus form `sqrt(mu_l) |v_l><e_k|` from the spectral decompositions of the outputs.
    pub fn kraus_channel(&self) -> Result<KrausChannel> {
        let dim = self.outputs[0].rows();
        let mut ops = Vec::new();
        for (k, tau) in self.outputs.iter().enumerate() {
            let eig = hermitian_eig(tau, DEFAULT_TOL)?;
            for (l, &mu) in eig.eigenvalues.iter().enumerate() {
                if mu <= 0.0 {
                    continue;
                }
                let v = eig.eigenvector(l);
                let mut op = ComplexMatrix::zeros(dim, self.n);
                for (r, &vr) in v.iter().enumerate() {
                    op[(r, k)] = vr * mu.sqrt();
                }
                ops.push(op);
            }
        }
        KrausChannel::new(self.n, dim, ops)
    }
}

pub fn upsilon_apply(omega: &KrausChannel, xi: &PureState, rho: &DensityMatrix) -> Result<DensityMatrix> {
    Upsilon::new(rho.dim(), omega, xi)?.apply(rho)
}

/// `S(rho||sigma) - S(N rho||N sigma)`; `None` when `S(rho||sigma)` is infinite.
pub fn dpi_check(channel: &KrausChannel, rho: &DensityMatrix, sigma: &DensityMatrix, base: LogBase) -> Result<Option<f64>> {
    let before = relative_entropy(rho, sigma, base)?;
    if before.is_infinite() {
        return Ok(None);
    }
    let after = relative_entropy(&channel.apply(rho)?, &channel.apply(sigma)?, base)?;
    Ok(Some(before - after))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Report {
    pub samples: usize,
    pub min_margin: f64,
    pub bound_values: Vec<f64>,
    pub entropy_values: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Smallest data-processing margin of the classical-to-quantum map on
    /// `(diag(p), I/n)` across samples.
    pub upsilon_dpi_min_margin: f64,
}

impl Prop1Report {
    pub fn violations(&self) -> Vec<usize> {
        self.entropy_values
            .iter()
            .zip(&self.bound_values)
            .enumerate()
            .filter(|(_, (e, b))| *e - *b < MARGIN_TOL)
            .map(|(i, _)| i)
            .collect()
    }
}

struct Prop1Sample {
    entropy: f64,
    bound: f64,
    dpi_margin: f64,
}

/// Samples random `Omega` on `C^k_dim` (full Choi rank) and random pure
/// `xi` on `C^n (x) C^k_dim`, and compares `S((Phi (x) Omega)(xi))` with
/// `H(p) + S(Omega(Tr_H xi))` for the q-c channel `Phi` built from `p`.
pub fn prop1_verify(p: &ProbVector, samples: usize, k_dim: usize, seed: u64, base: LogBase) -> Result<Prop1Report> {
    if samples == 0 || k_dim == 0 {
        return Err(Error::InvalidConfig("samples and k_dim must be positive".into()));
    }
    let phi = qc_spec_from_p(p)?;
    let n = p.len();
    let seeds: Vec<u64> = (0..samples as u64).map(|i| derive_seed(seed, i)).collect();
    let diag_p = DensityMatrix::diagonal(p.weights())?;
    let mixed = DensityMatrix::maximally_mixed(n);

    let results = seeds
        .par_iter()
        .map(|&s| {
            let omega = random_channel(k_dim, k_dim * k_dim, s);
            let xi = random_pure_state(n * k_dim, derive_seed(s, 1));
            let entropy = von_neumann_entropy(&apply_product(&phi, &omega, &xi)?, base);
            let bound = prop1_bound(p, &omega, &xi, base)?;
            let upsilon = Upsilon::new(n, &omega, &xi)?.kraus_channel()?;
            let dpi_margin = dpi_check(&upsilon, &diag_p, &mixed, base)?.unwrap_or(f64::INFINITY);
            Ok(Prop1Sample {
                entropy,
                bound,
                dpi_margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Prop1Report {
        samples,
        min_margin: results.iter().map(|r| r.entropy - r.bound).fold(f64::INFINITY, f64::min),
        bound_values: results.iter().map(|r| r.bound).collect(),
        entropy_values: results.iter().map(|r| r.entropy).collect(),
        seeds,
        upsilon_dpi_min_margin: results.iter().map(|r| r.dpi_margin).fold(f64::INFINITY, f64::min),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpiReport {
    pub samples: usize,
    pub evaluated: usize,
    pub min_margin: f64,
    pub seeds: Vec<u64>,
}

/// Data-processing margins for random channels on `C^dim` (Choi rank `dim^2`)
/// and random full-rank `rho`, `sigma`.
pub fn dpi_batch(dim: usize, samples: usize, seed: u64, base: LogBase) -> Result<DpiReport> {
    let seeds: Vec<u64> = (0..samples as u64).map(|i| derive_seed(seed ^ 0xD1B1, i)).collect();
    let margins = seeds
        .par_iter()
        .map(|&s| {
            let channel = random_channel(dim, dim * dim, s);
            let rho = random_density_matrix(dim, derive_seed(s, 1));
            let sigma = random_density_matrix(dim, derive_seed(s, 2));
            dpi_check(&channel, &rho, &sigma, base)
        })
        .collect::<Result<Vec<_>>>()?;
    let evaluated: Vec<f64> = margins.into_iter().flatten().collect();
    Ok(DpiReport {
        samples,
        evaluated: evaluated.len(),
        min_margin: evaluated.iter().copied().fold(f64::INFINITY, f64::min),
        seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{qutrit_example, random_deformation};

    const H_QUTRIT: f64 = 1.4591479170272448;
    const LOG2_3: f64 = 1.584962500721156;

    fn qutrit_p() -> ProbVector {
        ProbVector::new(vec![0.5, 1.0 / 3.0, 1.0 / 6.0]).unwrap()
    }

    #[test]
    fn qc_capacity_values() {
        let r = capacity_qc(&qutrit_p(), LogBase::Bits);
        assert!((r.capacity - 0.1258145836939113).abs() < 1e-12);
        assert!((r.capacity + r.min_output_entropy - LOG2_3).abs() < 1e-12);
        assert!(capacity_qc(&ProbVector::uniform(4), LogBase::Bits).capacity.abs() < 1e-12);
        assert!((capacity_qc(&ProbVector::delta(4), LogBase::Bits).capacity - 2.0).abs() < 1e-12);
    }

    #[test]
    fn deformed_capacity_values() {
        let r = capacity_deformed(&qutrit_example(), LogBase::Bits).unwrap();
        assert!((r.capacity - 0.1258145836939113).abs() < 1e-12);
        assert_eq!(r.formula, CapacityFormula::Deformed);
        let id = capacity_deformed(&WeylChannelSpec::identity(5).unwrap(), LogBase::Bits).unwrap();
        assert!((id.capacity - 5f64.log2()).abs() < 1e-12);

        for seed in 0..20 {
            let n = 2 + seed as usize % 3;
            let spec = random_deformation(&ProbVector::random_descending(n, seed), 0.8, seed).unwrap();
            let a = capacity_deformed(&spec, LogBase::Nats).unwrap();
            let b = capacity_qc(&marginals(&spec), LogBase::Nats);
            assert!((a.capacity - b.capacity).abs() < 1e-12);
        }

        let mut rows = qutrit_example().rows();
        rows[0][0] = 1.0 / 24.0;
        rows[2][2] = 1.0 / 4.0;
        let bad = WeylChannelSpec::new(3, &rows).unwrap();
        assert!(capacity_deformed(&bad, LogBase::Bits).is_err());
    }

    #[test]
    fn qc_detection() {
        assert!(is_qc_spec(&qc_spec_from_p(&qutrit_p()).unwrap(), 1e-12));
        assert!(!is_qc_spec(&qutrit_example(), 1e-12));
    }

    #[test]
    fn prop1_bound_cases() {
        let p = qutrit_p();
        let phi_state = random_pure_state(2, 3);
        let product = PureState::basis(3, 0).tensor(&phi_state);
        let b = prop1_bound(&p, &KrausChannel::identity(2), &product, LogBase::Bits).unwrap();
        assert!((b - H_QUTRIT).abs() < 1e-9);

        let dep = KrausChannel::completely_depolarizing(2);
        let b = prop1_bound(&p, &dep, &random_pure_state(6, 1), LogBase::Bits).unwrap();
        assert!((b - H_QUTRIT - 1.0).abs() < 1e-12);

        let b = prop1_bound(&p, &KrausChannel::identity(3), &PureState::maximally_entangled(3), LogBase::Bits).unwrap();
        assert!((b - 3.0441104177483998).abs() < 1e-9);

        assert!(prop1_bound(&p, &KrausChannel::identity(2), &random_pure_state(5, 0), LogBase::Bits).is_err());
    }

    #[test]
    fn product_input_margin() {
        let p = qutrit_p();
        let phi = qc_spec_from_p(&p).unwrap();
        let id = KrausChannel::identity(2);
        // basis state on H: equality
        let xi = PureState::basis(3, 1).tensor(&random_pure_state(2, 4));
        let s = von_neumann_entropy(&apply_product(&phi, &id, &xi).unwrap(), LogBase::Bits);
        let b = prop1_bound(&p, &id, &xi, LogBase::Bits).unwrap();
        assert!((s - b).abs() < 1e-9);
        // generic product: margin = S(Phi(a)) - H(p) >= 0
        let a = random_pure_state(3, 8);
        let xi = a.tensor(&random_pure_state(2, 4));
        let s = von_neumann_entropy(&apply_product(&phi, &id, &xi).unwrap(), LogBase::Bits);
        let b = prop1_bound(&p, &id, &xi, LogBase::Bits).unwrap();
        let single = von_neumann_entropy(&phi.apply(&a.density()).unwrap(), LogBase::Bits);
        assert!((s - b - (single - H_QUTRIT)).abs() < 1e-9);
        assert!(s - b >= -1e-8);
    }

    #[test]
    fn upsilon_identities() {
        let p = qutrit_p();
        let omega = random_channel(2, 4, 21);
        let xi = random_pure_state(6, 22);
        let ups = Upsilon::new(3, &omega, &xi).unwrap();

        let diag_p = DensityMatrix::diagonal(p.weights()).unwrap();
        let lhs = ups.apply(&diag_p).unwrap();
        let rhs = apply_product(&qc_spec_from_p(&p).unwrap(), &omega, &xi).unwrap();
        assert!(lhs.matrix().approx_eq(rhs.matrix(), 1e-12));

        let mixed = ups.apply(&DensityMatrix::maximally_mixed(3)).unwrap();
        let reduced = partial_trace(&xi.density(), 3, 2, Keep::B).unwrap();
        let expected = ComplexMatrix::identity(3)
            .scale_real(1.0 / 3.0)
            .kron(omega.apply(&reduced).unwrap().matrix());
        assert!(mixed.matrix().approx_eq(&expected, 1e-10));

        let rho = random_density_matrix(3, 5);
        let out = ups.apply(&rho).unwrap();
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        let kraus = ups.kraus_channel().unwrap();
        assert!(kraus.apply(&rho).unwrap().matrix().approx_eq(out.matrix(), 1e-10));

        let margin = dpi_check(&kraus, &diag_p, &DensityMatrix::maximally_mixed(3), LogBase::Bits)
            .unwrap()
            .unwrap();
        assert!(margin >= -1e-8);
    }

    #[test]
    fn dpi_cases() {
        let rho = random_density_matrix(3, 1);
        let sigma = random_density_matrix(3, 2);
        let id = dpi_check(&KrausChannel::identity(3), &rho, &sigma, LogBase::Bits).unwrap().unwrap();
        assert!(id.abs() < 1e-10);
        let dep = KrausChannel::completely_depolarizing(3);
        let m = dpi_check(&dep, &rho, &sigma, LogBase::Bits).unwrap().unwrap();
        assert!(m > 1e-3);
        let pure = DensityMatrix::basis(3, 0);
        let kernel = DensityMatrix::basis(3, 1);
        assert_eq!(dpi_check(&dep, &pure, &kernel, LogBase::Bits).unwrap(), None);
    }

    #[test]
    fn prop1_small_runs() {
        let p = qutrit_p();
        for k_dim in 1..=2 {
            let r = prop1_verify(&p, 10, k_dim, 3, LogBase::Bits).unwrap();
            assert!(r.min_margin >= MARGIN_TOL);
            assert!(r.upsilon_dpi_min_margin >= MARGIN_TOL);
            assert!(r.violations().is_empty());
            assert_eq!(r, prop1_verify(&p, 10, k_dim, 3, LogBase::Bits).unwrap());
        }
        assert!(prop1_verify(&p, 0, 2, 3, LogBase::Bits).is_err());
    }

    #[test]
    fn additivity_single_copy() {
        let config = OptimizerConfig::default().with_restarts(8);
        let r = additivity_report(&qutrit_example(), 1, &config, LogBase::Bits).unwrap();
        assert!(r.gap_numeric.abs() < 1e-6);
        assert!(r.gap_bound.abs() < 1e-12);
        assert!(!r.bound_below_closed_form);
        assert!(r.invariant_violations().is_empty());
    }

    #[test]
    fn digest_is_stable() {
        let c = OptimizerConfig::default();
        assert_eq!(config_digest(&c), config_digest(&c.clone()));
        assert_ne!(config_digest(&c), config_digest(&c.clone().with_seed(1)));
    }
}
