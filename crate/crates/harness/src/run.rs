//! Single-configuration evaluation and exit-code policy.

use fermi_engine::{certify, run_to_limit_cycle_with_trace, BoundReport, CycleReport, Tolerances};

use crate::config::{ConfigError, RunConfig};

/// CLI exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NON_CONVERGENCE: i32 = 2;
    pub const VIOLATION: i32 = 3;
}

/// A converged run with its certification.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: CycleReport,
    pub bounds: BoundReport,
    /// Ledger checks that failed when re-verified for output.
    pub ledger_failures: Vec<String>,
}

impl Evaluation {
    pub fn is_clean(&self) -> bool {
        self.bounds.is_clean() && self.ledger_failures.is_empty()
    }
}

/// Runs the configured cycle to its limit cycle and certifies it.
pub fn evaluate(cfg: &RunConfig) -> Result<Evaluation, EvaluationError> {
    let cycle = cfg.build_cycle()?;
    let (report, trace) = run_to_limit_cycle_with_trace(&cycle, cfg.p_init, &cfg.limit_cycle_config())?;
    let bounds = certify(&report, Some(&trace));
    let ledger_failures = recheck_ledger(&report);
    Ok(Evaluation { report, bounds, ledger_failures })
}

/// First- and second-law checks applied to every emitted ledger.
pub fn recheck_ledger(report: &CycleReport) -> Vec<String> {
    let tol = Tolerances::<f64>::default();
    let mut failures = Vec::new();
    let residual = report.first_law_residual();
    if residual.abs() > tol.ledger * report.heat_scale() {
        failures.push(format!("first law: |W + W_chem - sum Q| = {:e}", residual.abs()));
    }
    if report.entropy_production < -tol.second_law {
        failures.push(format!("second law: entropy production {:e} < 0", report.entropy_production));
    }
    failures
}

#[derive(Debug, thiserror::Error)]
pub enum EvaluationError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] fermi_engine::Error),
}

impl EvaluationError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => exit::CONFIG,
            Self::Engine(
                fermi_engine::Error::LimitCycleNonConvergence { .. }
                | fermi_engine::Error::IntegratorNonConvergence { .. },
            ) => exit::NON_CONVERGENCE,
            Self::Engine(_) => exit::CONFIG,
        }
    }
}

/// Outcome of `run`: the evaluation (if it converged) and the exit code.
pub struct SingleRun {
    pub evaluation: Result<Evaluation, EvaluationError>,
    pub exit_code: i32,
}

pub fn run_single(cfg: &RunConfig) -> Result<SingleRun, ConfigError> {
    if cfg.sweep.is_some() {
        return Err(ConfigError::invalid("sweep", "`run` takes a config without a sweep section; use `sweep`"));
    }
    let evaluation = evaluate(cfg);
    let exit_code = match &evaluation {
        Ok(e) if e.is_clean() => exit::OK,
        Ok(_) => exit::VIOLATION,
        Err(e) => e.exit_code(),
    };
    Ok(SingleRun { evaluation, exit_code })
}
