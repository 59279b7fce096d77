use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use weylcap_core::capacity::{
    additivity_report, capacity_deformed, capacity_qc, dpi_batch, is_qc_spec, prop1_verify, AdditivityReport,
    MARGIN_TOL,
};
use weylcap_core::linalg::random::random_density_matrix;
use weylcap_core::majorization::tensor_power_block_bound;
use weylcap_core::optimizer::{min_output_entropy, min_output_entropy_closed_form, OptimizerConfig};
use weylcap_core::weyl::{
    check_invariance, check_weyl_covariance, deformation_certificate, marginals, qutrit_example, tensor_dim,
    DeformationCertificate,
};
use weylcap_core::{LogBase, ProbVector, WeylChannelSpec};

use crate::cli::{Cli, Command, FormulaChoice};
use crate::error::CliError;
use crate::report::{append_csv_row, inputs_digest, AdditivityCsvRow, ReportFile};
use crate::spec_file::{load, ChannelSpecFile};

/// Tolerance for recognising a table with identical rows as a q-c channel.
pub const QC_ROW_TOL: f64 = 1e-12;

/// A finished run: the report and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: ReportFile,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(report: ReportFile) -> Self {
        Self { report, exit_code: 0 }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results always serialize")
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let base = cli.base;
    match &cli.command {
        Command::Describe { spec, seed } => describe(spec, *seed, base).map(Outcome::ok),
        Command::Capacity { spec, formula } => capacity(spec, *formula, base).map(Outcome::ok),
        Command::MinEntropy {
            spec,
            copies,
            restarts,
            seed,
        } => min_entropy(spec, *copies, *restarts, *seed, base).map(Outcome::ok),
        Command::Additivity {
            spec,
            copies,
            restarts,
            seed,
            csv,
        } => additivity(spec, *copies, *restarts, *seed, csv.as_deref(), base).map(Outcome::ok),
        Command::Verify {
            spec,
            p,
            samples,
            kdim,
            seed,
        } => verify(spec.as_deref(), p.as_deref(), *samples, *kdim, *seed, base),
        Command::ExampleQutrit { restarts, seed } => example_qutrit(*restarts, *seed, base).map(Outcome::ok),
    }
}

fn optimizer_config(restarts: usize, seed: u64) -> Result<OptimizerConfig, CliError> {
    if restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    Ok(OptimizerConfig::default().with_restarts(restarts).with_seed(seed))
}

#[derive(Debug, Serialize)]
struct DescribeResults {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    n: usize,
    pi: Vec<Vec<f64>>,
    marginals: ProbVector,
    certificate: DeformationCertificate,
    is_qc: bool,
    /// `max_j |U^j Phi(rho) U^j* - Phi(rho)|` on the seeded random state.
    invariance_residual: f64,
    /// Largest Weyl-covariance residual over all displacements `(a, b)`.
    covariance_residual_max: f64,
    state_seed: u64,
}

fn describe_results(spec: &WeylChannelSpec, label: Option<String>, seed: u64) -> Result<DescribeResults, CliError> {
    let n = spec.n();
    let rho = random_density_matrix(n, seed);
    let mut covariance: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            covariance = covariance.max(check_weyl_covariance(spec, &rho, a, b)?);
        }
    }
    Ok(DescribeResults {
        label,
        n,
        pi: spec.rows(),
        marginals: marginals(spec),
        certificate: deformation_certificate(spec),
        is_qc: is_qc_spec(spec, QC_ROW_TOL),
        invariance_residual: check_invariance(spec, &rho)?,
        covariance_residual_max: covariance,
        state_seed: seed,
    })
}

pub fn describe(path: &Path, seed: u64, base: LogBase) -> Result<ReportFile, CliError> {
    let loaded = load(path)?;
    let results = describe_results(&loaded.spec, loaded.file.label.clone(), seed)?;
    let digest = inputs_digest("describe", &loaded.bytes, &format!("base={base};seed={seed}"));
    Ok(ReportFile::new("describe", digest, base, seed, to_value(&results)))
}

fn capacity_value(spec: &WeylChannelSpec, formula: FormulaChoice, base: LogBase) -> Result<Value, CliError> {
    let deformed = || capacity_deformed(spec, base).map_err(|e| CliError::FormulaNotApplicable(e.to_string()));
    let qc = || {
        if is_qc_spec(spec, QC_ROW_TOL) {
            Ok(capacity_qc(&marginals(spec), base))
        } else {
            Err(CliError::FormulaNotApplicable("rows of pi are not identical".into()))
        }
    };
    let report = match formula {
        FormulaChoice::Deformed => deformed()?,
        FormulaChoice::Qc => qc()?,
        FormulaChoice::Auto => {
            if deformation_certificate(spec).ordered {
                deformed()?
            } else if is_qc_spec(spec, QC_ROW_TOL) {
                qc()?
            } else {
                return Err(CliError::FormulaNotApplicable(
                    "table is neither an ordered deformation nor a q-c channel".into(),
                ));
            }
        }
    };
    Ok(to_value(&report))
}

pub fn capacity(path: &Path, formula: FormulaChoice, base: LogBase) -> Result<ReportFile, CliError> {
    let loaded = load(path)?;
    let results = capacity_value(&loaded.spec, formula, base)?;
    let digest = inputs_digest("capacity", &loaded.bytes, &format!("base={base};formula={formula:?}"));
    Ok(ReportFile::new("capacity", digest, base, 0, results))
}

fn min_entropy_value(spec: &WeylChannelSpec, copies: usize, config: &OptimizerConfig, base: LogBase) -> Result<Value, CliError> {
    tensor_dim(spec.n(), copies)?;
    let result = min_output_entropy(spec, copies, config, base)?;
    let bound = tensor_power_block_bound(spec, copies, base)?;
    let mut value = json!({
        "N": copies,
        "value": result.value,
        "converged": result.converged,
        "restarts_used": result.restarts_used,
        "best_restart_seed": result.best_restart_seed,
        "best_restart_index": result.best_restart_index,
        "argmin": result.argmin,
        "restart_values": result.restart_values,
        "block_bound": bound,
    });
    if let Ok(closed_form) = min_output_entropy_closed_form(spec, copies, base) {
        value["closed_form"] = json!(closed_form);
    }
    Ok(value)
}

pub fn min_entropy(path: &Path, copies: usize, restarts: usize, seed: u64, base: LogBase) -> Result<ReportFile, CliError> {
    let loaded = load(path)?;
    let config = optimizer_config(restarts, seed)?;
    let results = min_entropy_value(&loaded.spec, copies, &config, base)?;
    let digest = inputs_digest(
        "min-entropy",
        &loaded.bytes,
        &format!("base={base};N={copies};restarts={restarts};seed={seed}"),
    );
    Ok(ReportFile::new("min-entropy", digest, base, seed, results))
}

fn additivity_value(spec: &WeylChannelSpec, copies: usize, config: &OptimizerConfig, base: LogBase) -> Result<AdditivityReport, CliError> {
    tensor_dim(spec.n(), copies)?;
    Ok(additivity_report(spec, copies, config, base)?)
}

pub fn additivity(
    path: &Path,
    copies: usize,
    restarts: usize,
    seed: u64,
    csv: Option<&Path>,
    base: LogBase,
) -> Result<ReportFile, CliError> {
    let loaded = load(path)?;
    let config = optimizer_config(restarts, seed)?;
    let report = additivity_value(&loaded.spec, copies, &config, base)?;
    if let Some(csv) = csv {
        append_csv_row(
            csv,
            &AdditivityCsvRow {
                label: loaded.file.label.clone().unwrap_or_default(),
                n: loaded.spec.n(),
                copies,
                scaled_single: report.scaled_single,
                numeric_min: report.numeric_min_at_n,
                block_bound: report.block_bound_at_n,
                gap_numeric: report.gap_numeric,
                gap_bound: report.gap_bound,
                seed,
            },
        )?;
    }
    let digest = inputs_digest(
        "additivity",
        &loaded.bytes,
        &format!("base={base};N={copies};restarts={restarts};seed={seed}"),
    );
    Ok(ReportFile::new("additivity", digest, base, seed, to_value(&report)))
}

pub fn verify(
    path: Option<&Path>,
    p: Option<&[f64]>,
    samples: usize,
    kdim: usize,
    seed: u64,
    base: LogBase,
) -> Result<Outcome, CliError> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if kdim == 0 {
        return Err(CliError::Usage("--kdim must be at least 1".into()));
    }
    let (p, input) = match (path, p) {
        (Some(path), _) => {
            let loaded = load(path)?;
            (marginals(&loaded.spec), loaded.bytes)
        }
        (None, Some(p)) => {
            let p = ProbVector::new(p.to_vec()).map_err(|e| CliError::Validation(e.to_string()))?;
            if p.len() < 2 {
                return Err(CliError::Validation("p needs at least two entries".into()));
            }
            let bytes = serde_json::to_vec(&p).expect("serializable");
            (p, bytes)
        }
        (None, None) => return Err(CliError::Usage("give a spec file or --p".into())),
    };
    let prop1 = prop1_verify(&p, samples, kdim, seed, base)?;
    let dpi = dpi_batch(p.len(), samples, seed, base)?;

    let violations = prop1.violations();
    let mut exit_code = 0;
    if !violations.is_empty() || prop1.upsilon_dpi_min_margin < MARGIN_TOL || dpi.min_margin < MARGIN_TOL {
        let dump: Vec<Value> = violations
            .iter()
            .map(|&i| {
                json!({
                    "sample": i,
                    "seed": prop1.seeds[i],
                    "entropy": prop1.entropy_values[i],
                    "bound": prop1.bound_values[i],
                })
            })
            .collect();
        eprintln!(
            "{}",
            CliError::MarginViolation(format!(
                "min_margin {:e}, c-q data-processing margin {:e}, dpi margin {:e}; p = {:?}, kdim = {kdim}, seed = {seed}; failing samples: {}",
                prop1.min_margin,
                prop1.upsilon_dpi_min_margin,
                dpi.min_margin,
                p.weights(),
                Value::Array(dump)
            ))
        );
        exit_code = 6;
    }

    let results = json!({
        "n": p.len(),
        "k_dim": kdim,
        "p": p,
        "prop1": prop1,
        "dpi": dpi,
    });
    let digest = inputs_digest(
        "verify",
        &input,
        &format!("base={base};samples={samples};kdim={kdim};seed={seed}"),
    );
    Ok(Outcome {
        report: ReportFile::new("verify", digest, base, seed, results),
        exit_code,
    })
}

pub fn example_qutrit(restarts: usize, seed: u64, base: LogBase) -> Result<ReportFile, CliError> {
    let spec = qutrit_example();
    let config = optimizer_config(restarts, seed)?;
    let label = "qutrit deformation".to_string();
    let results = json!({
        "spec": ChannelSpecFile::from_spec(&spec, Some(label.clone())),
        "describe": to_value(&describe_results(&spec, Some(label), seed)?),
        "capacity": capacity_value(&spec, FormulaChoice::Auto, base)?,
        "min_entropy": [
            min_entropy_value(&spec, 1, &config, base)?,
            min_entropy_value(&spec, 2, &config, base)?,
        ],
        "additivity": to_value(&additivity_value(&spec, 2, &config, base)?),
    });
    let spec_json = ChannelSpecFile::from_spec(&spec, None).to_json();
    let digest = inputs_digest(
        "example-qutrit",
        spec_json.as_bytes(),
        &format!("base={base};restarts={restarts};seed={seed}"),
    );
    Ok(ReportFile::new("example-qutrit", digest, base, seed, results))
}
