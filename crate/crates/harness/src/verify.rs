//! Invariant suite run by the `verify` subcommand.

use fermi_engine::{
    certify, propagate_stroke, relax_constant, run_to_limit_cycle, Bath, CycleReport, IntegratorConfig,
    LimitCycleConfig, ProtocolKind, Regime,
};

use crate::config::RunConfig;
use crate::run::{exit, recheck_ledger, EvaluationError};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {:<28} {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub struct VerifyOutcome {
    pub checks: Vec<Check>,
    pub exit_code: i32,
}

fn max_ledger_gap(a: &CycleReport, b: &CycleReport) -> f64 {
    let heat_gap = a.heats.iter().zip(&b.heats).map(|(x, y)| (x.heat - y.heat).abs()).fold(0.0, f64::max);
    heat_gap
        .max((a.work - b.work).abs())
        .max((a.chemical_work - b.chemical_work).abs())
        .max((a.entropy_production - b.entropy_production).abs())
}

/// Runs the invariant checks on the configured cycle (sweep section ignored).
pub fn verify(cfg: &RunConfig) -> Result<VerifyOutcome, EvaluationError> {
    let cycle = cfg.build_cycle()?;
    let lc = cfg.limit_cycle_config();
    let mut checks = Vec::new();

    let base = match run_to_limit_cycle(&cycle, cfg.p_init, &lc) {
        Ok(r) => r,
        Err(e @ fermi_engine::Error::LimitCycleNonConvergence { .. }) => {
            checks.push(Check::new("limit_cycle", false, e.to_string()));
            return Ok(VerifyOutcome { checks, exit_code: exit::NON_CONVERGENCE });
        }
        Err(e) => return Err(e.into()),
    };
    checks.push(Check::new(
        "limit_cycle",
        true,
        format!("converged after {} periods, residual {:.1e}", base.converged_after, base.residual),
    ));

    let plain = LimitCycleConfig { accelerate: false, ..lc.clone() };
    let from_empty = run_to_limit_cycle(&cycle, 0.0, &plain)?;
    let from_full = run_to_limit_cycle(&cycle, 1.0, &plain)?;
    let gap = max_ledger_gap(&from_empty, &from_full);
    checks.push(Check::new("initial_state_independence", gap <= 1e-9, format!("max ledger gap {gap:.2e} (tol 1e-9)")));

    let again = run_to_limit_cycle(&cycle, base.limit_state, &plain)?;
    let gap = max_ledger_gap(&base, &again);
    checks.push(Check::new("periodicity", gap <= 1e-10, format!("extra period moves ledger by {gap:.2e} (tol 1e-10)")));

    let failures = recheck_ledger(&base);
    checks.push(Check::new(
        "cycle_first_and_second_law",
        failures.is_empty(),
        if failures.is_empty() {
            format!("residual {:.2e}, Sigma_irr {:.3e}", base.first_law_residual().abs(), base.entropy_production)
        } else {
            failures.join("; ")
        },
    ));

    let worst = base
        .strokes
        .iter()
        .map(|s| s.first_law_residual().abs() / s.energy_change().abs().max(1.0))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "stroke_first_law",
        worst <= 1e-8,
        format!("worst relative residual {worst:.2e} (tol 1e-8)"),
    ));

    if lc.regime == Regime::FiniteTime {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (stroke, result) in cycle.strokes().iter().zip(&base.strokes) {
            let (ProtocolKind::Constant(level), Some(label)) = (stroke.protocol.kind(), &stroke.bath) else {
                continue;
            };
            let bath: &Bath = cycle.baths().iter().find(|b| &b.label == label).expect("validated label");
            let exact = relax_constant(result.initial_occupation, *level, bath, stroke.protocol.duration());
            worst = worst.max((exact - result.final_occupation).abs());
            count += 1;
        }
        if count > 0 {
            checks.push(Check::new(
                "closed_form_relaxation",
                worst <= 1e-9,
                format!("{count} constant strokes, max gap {worst:.2e} (tol 1e-9)"),
            ));
        }

        let mut worst: f64 = 0.0;
        let halved = IntegratorConfig { max_step: lc.integrator.max_step / 2.0, ..lc.integrator.clone() };
        for (stroke, result) in cycle.strokes().iter().zip(&base.strokes) {
            let bath = stroke.bath.as_ref().and_then(|l| cycle.baths().iter().find(|b| &b.label == l));
            let fine = propagate_stroke(result.initial_occupation, &stroke.protocol, bath, &halved)?;
            worst = worst
                .max((fine.final_occupation - result.final_occupation).abs())
                .max((fine.work - result.work).abs())
                .max((fine.heat - result.heat).abs());
        }
        checks.push(Check::new("step_halving", worst <= 1e-8, format!("max ledger change {worst:.2e} (tol 1e-8)")));
    }

    let bounds = certify(&base, None);
    checks.push(Check::new(
        "bound_ordering",
        bounds.is_clean(),
        if bounds.is_clean() {
            format!(
                "eta {} <= clausius {} <= carnot {:.6}",
                base.efficiency.map(|x| format!("{x:.6}")).unwrap_or_else(|| "undefined".into()),
                bounds.clausius.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into()),
                bounds.carnot
            )
        } else {
            bounds
                .violations
                .iter()
                .map(|v| format!("{} by {:.2e}", v.name, v.magnitude))
                .collect::<Vec<_>>()
                .join("; ")
        },
    ));

    if cycle.baths().len() == 1 {
        checks.push(Check::new("kelvin", base.work <= 1e-12, format!("single bath, W_net = {:.3e}", base.work)));
    }

    let exit_code = if checks.iter().all(|c| c.passed) { exit::OK } else { exit::VIOLATION };
    Ok(VerifyOutcome { checks, exit_code })
}
