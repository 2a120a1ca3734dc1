//! Cycles of strokes, their periodic steady state, and the per-cycle ledger.

use crate::dynamics::{
    propagate_stroke, quasistatic_stroke_with, IntegratorConfig, PropagationResult, Protocol, TrajectoryPoint,
};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerances};
use crate::thermo::{as_f64, fermi_occupation, occupation_entropy, Bath, DiagonalState, LevelSpectrum};

/// One segment of a cycle: a level drive with at most one bath attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke<T> {
    pub protocol: Protocol<T>,
    pub bath: Option<String>,
}

impl<T: Scalar> Stroke<T> {
    pub fn coupled(protocol: Protocol<T>, bath: impl Into<String>) -> Self {
        Self { protocol, bath: Some(bath.into()) }
    }

    pub fn isolated(protocol: Protocol<T>) -> Self {
        Self { protocol, bath: None }
    }
}

/// A closed sequence of strokes over a registry of baths.
///
/// The level is continuous across every stroke junction, including the wrap
/// from the last stroke back to the first; level jumps are written as
/// isolated [`Protocol::quench`] strokes.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle<T> {
    baths: Vec<Bath<T>>,
    strokes: Vec<Stroke<T>>,
    bath_index: Vec<Option<usize>>,
}

impl<T: Scalar> Cycle<T> {
    pub fn new(baths: Vec<Bath<T>>, strokes: Vec<Stroke<T>>) -> Result<Self> {
        let tol = Tolerances::<T>::default().continuity;
        if strokes.is_empty() {
            return Err(Error::InvalidCycle("a cycle needs at least one stroke".into()));
        }
        for (i, b) in baths.iter().enumerate() {
            if baths[..i].iter().any(|o| o.label == b.label) {
                return Err(Error::InvalidCycle(format!("duplicate bath label `{}`", b.label)));
            }
        }
        let mut bath_index = Vec::with_capacity(strokes.len());
        for (i, s) in strokes.iter().enumerate() {
            let idx = match &s.bath {
                None => None,
                Some(label) => {
                    let idx = baths
                        .iter()
                        .position(|b| &b.label == label)
                        .ok_or_else(|| Error::UnknownBath(label.clone()))?;
                    if s.protocol.is_instantaneous() {
                        return Err(Error::InvalidCycle(format!(
                            "stroke {i} is coupled to `{label}` but has zero duration"
                        )));
                    }
                    Some(idx)
                }
            };
            bath_index.push(idx);
        }
        if bath_index.iter().all(Option::is_none) {
            return Err(Error::InvalidCycle("no stroke is coupled to a bath".into()));
        }
        if let Some(b) = baths.iter().enumerate().find(|(i, _)| !bath_index.contains(&Some(*i))).map(|(_, b)| b) {
            return Err(Error::InvalidCycle(format!("bath `{}` is never attached", b.label)));
        }
        let n = strokes.len();
        for i in 0..n {
            let end = strokes[i].protocol.end_level();
            let next = strokes[(i + 1) % n].protocol.start_level();
            if (end - next).abs() > tol * T::one().max(end.abs()) {
                return Err(Error::InvalidCycle(format!(
                    "level jumps from {end} to {next} between strokes {i} and {}; insert a quench",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { baths, strokes, bath_index })
    }

    pub fn baths(&self) -> &[Bath<T>] {
        &self.baths
    }

    pub fn strokes(&self) -> &[Stroke<T>] {
        &self.strokes
    }

    pub fn period(&self) -> T {
        self.strokes.iter().fold(T::zero(), |acc, s| acc + s.protocol.duration())
    }

    fn stroke_bath(&self, i: usize) -> Option<&Bath<T>> {
        self.bath_index[i].map(|b| &self.baths[b])
    }
}

/// How bath-coupled strokes are evolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regime {
    /// Finite coupling: the rate equation is integrated over the stroke.
    #[default]
    FiniteTime,
    /// Infinitely slow strokes: on contact the level equilibrates with the
    /// bath, then the occupation tracks the instantaneous Fermi function.
    Quasistatic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCycleConfig<T> {
    /// Bound on `|p(start) − p(start + τ)|`.
    pub tolerance: T,
    pub max_periods: usize,
    /// Solve the affine period map for its fixed point before iterating.
    pub accelerate: bool,
    pub regime: Regime,
    pub integrator: IntegratorConfig<T>,
}

impl<T: Scalar> Default for LimitCycleConfig<T> {
    fn default() -> Self {
        Self {
            tolerance: T::floored(1e-12, 8.0),
            max_periods: 100_000,
            accelerate: true,
            regime: Regime::FiniteTime,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl<T: Scalar> LimitCycleConfig<T> {
    pub fn quasistatic() -> Self {
        Self { regime: Regime::Quasistatic, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) {
            return Err(Error::InvalidConfig(format!("limit-cycle tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.max_periods == 0 {
            return Err(Error::InvalidConfig("max_periods must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathHeat<T> {
    pub label: String,
    pub temperature: T,
    /// Heat absorbed by the dot from this bath over one period.
    pub heat: T,
}

/// Thermodynamic ledger of one period at the limit cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport<T> {
    /// Net work extracted over the period.
    pub work: T,
    /// Per-bath heat in bath-registry order.
    pub heats: Vec<BathHeat<T>>,
    /// Net chemical work extracted, `−Σ μ Δp`, so that `W + W_chem = Σ Q` at the limit cycle.
    pub chemical_work: T,
    pub entropy_change: T,
    /// `ΔS − Σ_b Q_b / T_b`.
    pub entropy_production: T,
    pub efficiency: Option<T>,
    pub period: T,
    /// Periods evaluated before the measured one.
    pub converged_after: usize,
    /// Occupation at the start of the measured period.
    pub limit_state: T,
    /// Fixed-point residual of the last pre-measurement period.
    pub residual: T,
    pub strokes: Vec<PropagationResult<T>>,
}

impl<T: Scalar> CycleReport<T> {
    pub fn total_heat(&self) -> T {
        self.heats.iter().fold(T::zero(), |acc, h| acc + h.heat)
    }

    pub fn heat_in(&self) -> T {
        self.heats.iter().filter(|h| h.heat > T::zero()).fold(T::zero(), |acc, h| acc + h.heat)
    }

    /// `W + W_chem − Σ Q`; zero at the limit cycle.
    pub fn first_law_residual(&self) -> T {
        self.work + self.chemical_work - self.total_heat()
    }

    /// Scale for relative first-law checks, `max(1, Σ |Q_b|)`.
    pub fn heat_scale(&self) -> T {
        let sum = self.heats.iter().fold(T::zero(), |acc, h| acc + h.heat.abs());
        T::one().max(sum)
    }

    pub fn heat_of(&self, label: &str) -> Option<T> {
        self.heats.iter().find(|h| h.label == label).map(|h| h.heat)
    }

    pub fn temperature_range(&self) -> (T, T) {
        self.heats
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), h| (lo.min(h.temperature), hi.max(h.temperature)))
    }
}

/// One sample of the engine along a period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample<T> {
    pub time: T,
    pub level: T,
    pub occupation: T,
    /// Index into [`CycleTrace::baths`] of the attached bath.
    pub bath: Option<usize>,
}

impl<T: Scalar> TraceSample<T> {
    pub fn state(&self) -> Result<DiagonalState<T>> {
        DiagonalState::from_occupation(self.occupation)
    }

    pub fn spectrum(&self) -> Result<LevelSpectrum<T>> {
        LevelSpectrum::single_level(self.level)
    }
}

/// Sampled state and Hamiltonian over exactly one period at the limit cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrace<T> {
    pub samples: Vec<TraceSample<T>>,
    pub baths: Vec<Bath<T>>,
    pub period: T,
}

struct PeriodLedger<T> {
    end: T,
    work: T,
    heats: Vec<T>,
    chemical_input: T,
    strokes: Vec<PropagationResult<T>>,
}

fn run_period<T: Scalar>(
    cycle: &Cycle<T>,
    p0: T,
    cfg: &LimitCycleConfig<T>,
    mut trace: Option<&mut Vec<TraceSample<T>>>,
) -> Result<PeriodLedger<T>> {
    let record = trace.is_some();
    let integrator = IntegratorConfig { record_trajectory: record, ..cfg.integrator.clone() };
    let mut p = p0;
    let mut work = T::zero();
    let mut heats = vec![T::zero(); cycle.baths.len()];
    let mut chemical_input = T::zero();
    let mut strokes = Vec::with_capacity(cycle.strokes.len());
    let mut clock = T::zero();

    for (i, stroke) in cycle.strokes.iter().enumerate() {
        let bath = cycle.stroke_bath(i);
        let mut result = match (bath, cfg.regime) {
            (Some(b), Regime::Quasistatic) => contact_quasistatic(p, &stroke.protocol, b, record),
            _ => propagate_stroke(p, &stroke.protocol, bath, &integrator)?,
        };
        if let (Some(samples), Some(tr)) = (trace.as_deref_mut(), result.trajectory.take()) {
            samples.extend(tr.into_iter().map(|pt: TrajectoryPoint<T>| TraceSample {
                time: clock + pt.time,
                level: pt.level,
                occupation: pt.occupation,
                bath: cycle.bath_index[i],
            }));
        }
        clock = clock + stroke.protocol.duration();
        work = work + result.work;
        chemical_input = chemical_input + result.chemical_work;
        if let Some(idx) = cycle.bath_index[i] {
            heats[idx] = heats[idx] + result.heat;
        }
        p = result.final_occupation;
        strokes.push(result);
    }
    Ok(PeriodLedger { end: p, work, heats, chemical_input, strokes })
}

/// Quasistatic contact: instantaneous equilibration at the stroke's initial
/// level, followed by the reversible tracking stroke.
fn contact_quasistatic<T: Scalar>(p0: T, protocol: &Protocol<T>, bath: &Bath<T>, record: bool) -> PropagationResult<T> {
    let mut r = quasistatic_stroke_with(protocol, bath, record);
    let f0 = fermi_occupation(protocol.start_level(), bath);
    let jump = f0 - p0;
    r.heat = r.heat + (protocol.start_level() - bath.chemical_potential) * jump;
    r.chemical_work = r.chemical_work + bath.chemical_potential * jump;
    r.initial_occupation = p0;
    if let Some(tr) = r.trajectory.as_mut() {
        tr.insert(0, TrajectoryPoint { time: T::zero(), level: protocol.start_level(), occupation: p0 });
    }
    r
}

/// `W / Q_in` with `Q_in` the sum of positive heats; `None` unless both are positive.
pub fn efficiency_of<T: Scalar>(work: T, heat_in: T) -> Option<T> {
    (work > T::zero() && heat_in > T::zero()).then(|| work / heat_in)
}

pub fn efficiency<T: Scalar>(report: &CycleReport<T>) -> Option<T> {
    efficiency_of(report.work, report.heat_in())
}

pub fn entropy_production<T: Scalar>(report: &CycleReport<T>) -> T {
    report.entropy_production
}

/// Drives the engine to its periodic steady state and reports one period.
pub fn run_to_limit_cycle<T: Scalar>(cycle: &Cycle<T>, p_init: T, cfg: &LimitCycleConfig<T>) -> Result<CycleReport<T>> {
    limit_cycle(cycle, p_init, cfg, false).map(|(r, _)| r)
}

/// As [`run_to_limit_cycle`], also returning the sampled trajectory of the measured period.
pub fn run_to_limit_cycle_with_trace<T: Scalar>(
    cycle: &Cycle<T>,
    p_init: T,
    cfg: &LimitCycleConfig<T>,
) -> Result<(CycleReport<T>, CycleTrace<T>)> {
    limit_cycle(cycle, p_init, cfg, true).map(|(r, t)| (r, t.expect("trace requested")))
}

fn limit_cycle<T: Scalar>(
    cycle: &Cycle<T>,
    p_init: T,
    cfg: &LimitCycleConfig<T>,
    want_trace: bool,
) -> Result<(CycleReport<T>, Option<CycleTrace<T>>)> {
    cfg.validate()?;
    if !(p_init >= T::zero() && p_init <= T::one()) {
        return Err(Error::OccupationOutOfRange { time: 0.0, value: as_f64(p_init) });
    }
    let mut periods = 0usize;
    let mut p = p_init;

    // The period map is affine in the start occupation (linear rate equation,
    // and RK4 preserves that), so two probes pin down its fixed point.
    if cfg.accelerate && cfg.max_periods >= 3 {
        let intercept = run_period(cycle, T::zero(), cfg, None)?.end;
        let slope = run_period(cycle, T::one(), cfg, None)?.end - intercept;
        periods += 2;
        if T::one() - slope > T::epsilon() * T::lit(1e3) {
            p = (intercept / (T::one() - slope)).max(T::zero()).min(T::one());
        }
    }

    let mut residual = T::infinity();
    while residual > cfg.tolerance {
        if periods >= cfg.max_periods {
            return Err(Error::LimitCycleNonConvergence { periods, residual: as_f64(residual) });
        }
        let next = run_period(cycle, p, cfg, None)?.end;
        periods += 1;
        residual = (next - p).abs();
        p = next;
    }

    let mut samples = want_trace.then(Vec::new);
    let ledger = run_period(cycle, p, cfg, samples.as_mut())?;
    let heats: Vec<BathHeat<T>> = cycle
        .baths
        .iter()
        .zip(&ledger.heats)
        .map(|(b, &q)| BathHeat { label: b.label.clone(), temperature: b.temperature, heat: q })
        .collect();
    let entropy_change = occupation_entropy(ledger.end) - occupation_entropy(p);
    let entropy_flow = heats.iter().fold(T::zero(), |acc, h| acc + h.heat / h.temperature);
    let heat_in = heats.iter().filter(|h| h.heat > T::zero()).fold(T::zero(), |acc, h| acc + h.heat);

    let report = CycleReport {
        work: ledger.work,
        chemical_work: T::zero() - ledger.chemical_input,
        entropy_change,
        entropy_production: entropy_change - entropy_flow,
        efficiency: efficiency_of(ledger.work, heat_in),
        period: cycle.period(),
        converged_after: periods,
        limit_state: p,
        residual,
        heats,
        strokes: ledger.strokes,
    };
    let trace = samples.map(|samples| CycleTrace { samples, baths: cycle.baths.clone(), period: cycle.period() });
    Ok((report, trace))
}
