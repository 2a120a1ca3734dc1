//! Efficiency bounds and their certification against measured cycles.
//!
//! The hierarchy evaluated here:
//!
//! * Carnot, `1 − T_min / T_max` over the bath set;
//! * the Clausius multi-bath bound `1 − T_min S_in / Q_in`, where `Q_in` and
//!   `S_in = Σ Q_b / T_b` run over the absorbing baths;
//! * the generalized Carnot bound for reversible multi-bath cycles;
//! * the information-theoretic bound built from state–Hamiltonian correlations
//!   along the cycle.
//!
//! The last two are transcription points. They validate their inputs and
//! return [`BoundValue::NotTranscribed`] until their closed forms are encoded;
//! everything downstream (reports, CSV, certification) already carries the
//! value through.

use crate::cycle::{CycleReport, CycleTrace};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerances};
use crate::thermo::as_f64;

/// A bound that may not have a closed form encoded yet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue<T> {
    Value(T),
    NotTranscribed,
}

impl<T: Copy> BoundValue<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Self::Value(v) => Some(*v),
            Self::NotTranscribed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatEntry<T> {
    pub temperature: T,
    /// Heat absorbed by the engine from this bath (negative when rejected).
    pub heat: T,
}

/// Per-bath heats exchanged over one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProfile<T> {
    entries: Vec<HeatEntry<T>>,
}

impl<T: Scalar> HeatProfile<T> {
    pub fn new(entries: Vec<HeatEntry<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProfile("no entries".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if !(e.temperature.is_finite() && e.temperature > T::zero()) {
                return Err(Error::InvalidProfile(format!("entry {i}: temperature {} must be > 0", e.temperature)));
            }
            if !e.heat.is_finite() {
                return Err(Error::InvalidProfile(format!("entry {i}: heat is not finite")));
            }
        }
        Ok(Self { entries })
    }

    /// Builds a profile from `(temperature, heat)` pairs.
    pub fn from_pairs(pairs: &[(T, T)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(temperature, heat)| HeatEntry { temperature, heat }).collect())
    }

    /// Realized profile of a cycle, dropping baths whose heat is below
    /// `zero_heat · max(1, Σ|Q|)`.
    pub fn from_report(report: &CycleReport<T>) -> Result<Self> {
        let cutoff = Tolerances::<T>::default().zero_heat * report.heat_scale();
        Self::new(
            report
                .heats
                .iter()
                .filter(|h| h.heat.abs() >= cutoff)
                .map(|h| HeatEntry { temperature: h.temperature, heat: h.heat })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[HeatEntry<T>] {
        &self.entries
    }

    pub fn min_temperature(&self) -> T {
        self.entries.iter().map(|e| e.temperature).fold(T::infinity(), T::min)
    }

    pub fn max_temperature(&self) -> T {
        self.entries.iter().map(|e| e.temperature).fold(T::neg_infinity(), T::max)
    }

    /// `(Q_in, S_in)` over absorbing entries.
    pub fn absorbed(&self) -> (T, T) {
        self.entries
            .iter()
            .filter(|e| e.heat > T::zero())
            .fold((T::zero(), T::zero()), |(q, s), e| (q + e.heat, s + e.heat / e.temperature))
    }
}

pub fn carnot_bound<T: Scalar>(t_hot: T, t_cold: T) -> Result<T> {
    if !(t_cold > T::zero() && t_hot >= t_cold) {
        return Err(Error::TemperatureOrder { hot: as_f64(t_hot), cold: as_f64(t_cold) });
    }
    Ok(T::one() - t_cold / t_hot)
}

/// Tightest efficiency allowed by the Clausius inequality given where heat is
/// absorbed: `1 − T_min S_in / Q_in`.
pub fn clausius_multibath_bound<T: Scalar>(profile: &HeatProfile<T>) -> Result<T> {
    let (q_in, s_in) = profile.absorbed();
    if !(q_in > T::zero()) {
        return Err(Error::NoHeatAbsorbed);
    }
    Ok(T::one() - profile.min_temperature() * s_in / q_in)
}

/// Exact maximal efficiency of reversible cycles with many baths.
///
/// Transcription point: returns [`BoundValue::NotTranscribed`] after input
/// validation.
pub fn generalized_carnot_bound<T: Scalar>(profile: &HeatProfile<T>) -> Result<BoundValue<T>> {
    if profile.entries().len() < 2 {
        return Err(Error::InvalidProfile("engine analysis needs at least two baths".into()));
    }
    if !(profile.absorbed().0 > T::zero()) {
        return Err(Error::NoHeatAbsorbed);
    }
    Ok(BoundValue::NotTranscribed)
}

/// Efficiency bound from correlations between the engine state and its
/// Hamiltonian over one limit-cycle period.
///
/// Transcription point: the trace is checked for periodicity, then
/// [`BoundValue::NotTranscribed`] is returned. The building blocks are in
/// [`crate::thermo`] (`state_hamiltonian_covariance`, `energy_variance`,
/// `relative_entropy`) and each sample exposes its state and spectrum.
pub fn info_theoretic_bound<T: Scalar>(trace: &CycleTrace<T>) -> Result<BoundValue<T>> {
    check_trace_periodic(trace)?;
    Ok(BoundValue::NotTranscribed)
}

fn check_trace_periodic<T: Scalar>(trace: &CycleTrace<T>) -> Result<()> {
    let (Some(first), Some(last)) = (trace.samples.first(), trace.samples.last()) else {
        return Err(Error::TraceNotPeriodic { residual: f64::INFINITY });
    };
    let tol = T::floored(1e-9, 64.0);
    let residual = (last.occupation - first.occupation).abs();
    let level_gap = (last.level - first.level).abs();
    let span_gap = (last.time - first.time - trace.period).abs();
    if residual > tol
        || level_gap > tol * T::one().max(first.level.abs())
        || span_gap > tol * T::one().max(trace.period)
    {
        return Err(Error::TraceNotPeriodic { residual: as_f64(residual.max(level_gap)) });
    }
    Ok(())
}

/// A named inequality that failed, with how far it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation<T> {
    pub name: String,
    pub magnitude: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub measured: Option<T>,
    pub carnot: T,
    /// `None` when no bath delivers heat.
    pub clausius: Option<T>,
    pub generalized_carnot: BoundValue<T>,
    pub info: BoundValue<T>,
    pub violations: Vec<Violation<T>>,
}

impl<T: Scalar> BoundReport<T> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates every bound for a converged run and checks the orderings
/// `η ≤ η_clausius ≤ η_C`, `η ≤ η_info ≤ η_C`, `η_generalized ≤ η_C`, plus the
/// second law. Without a trace the information bound is `NotTranscribed`.
pub fn certify<T: Scalar>(report: &CycleReport<T>, trace: Option<&CycleTrace<T>>) -> BoundReport<T> {
    let tol = Tolerances::<T>::default();
    let (t_min, t_max) = report.temperature_range();
    let carnot = carnot_bound(t_max, t_min).unwrap_or_else(|_| T::zero());
    let measured = report.efficiency;
    let profile = HeatProfile::from_report(report).ok();
    let clausius = profile.as_ref().and_then(|p| clausius_multibath_bound(p).ok());
    let generalized =
        profile.as_ref().and_then(|p| generalized_carnot_bound(p).ok()).unwrap_or(BoundValue::NotTranscribed);

    let mut violations = Vec::new();
    let mut check = |name: &str, lhs: Option<T>, rhs: Option<T>, slack: T| {
        if let (Some(l), Some(r)) = (lhs, rhs) {
            if l > r + slack {
                violations.push(Violation { name: name.to_owned(), magnitude: l - r });
            }
        }
    };

    let info = match trace.map(info_theoretic_bound) {
        Some(Ok(v)) => v,
        Some(Err(e)) => {
            let magnitude = match e {
                Error::TraceNotPeriodic { residual } => T::from_f64(residual).unwrap_or_else(T::infinity),
                _ => T::infinity(),
            };
            check("trace_periodicity", Some(magnitude), Some(T::zero()), T::zero());
            BoundValue::NotTranscribed
        }
        None => BoundValue::NotTranscribed,
    };

    check("efficiency_le_carnot", measured, Some(carnot), tol.bound);
    check("efficiency_le_clausius", measured, clausius, tol.bound);
    check("clausius_le_carnot", clausius, Some(carnot), tol.bound);
    check("generalized_le_carnot", generalized.value(), Some(carnot), tol.bound);
    check("efficiency_le_generalized", measured, generalized.value(), tol.bound);
    check("efficiency_le_info", measured, info.value(), tol.bound);
    check("info_le_carnot", info.value(), Some(carnot), tol.bound);
    check("second_law", Some(-report.entropy_production), Some(T::zero()), tol.second_law);

    BoundReport { measured, carnot, clausius, generalized_carnot: generalized, info, violations }
}
