//! Finite-time thermodynamic cycles of a driven single-level fermionic dot.
//!
//! The dot's occupation relaxes toward the Fermi function of whichever bath is
//! attached while its level is driven by a [`dynamics::Protocol`]. Strokes
//! compose into a [`cycle::Cycle`], which is driven to its periodic steady
//! state and booked into a [`cycle::CycleReport`]. [`bounds::certify`] then
//! compares the measured efficiency against the bound hierarchy.
//!
//! All physics is generic over [`Scalar`] (`f32`, `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

// `!(x > 0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cycle;
pub mod dynamics;
pub mod error;
pub mod scalar;
pub mod thermo;

pub use error::{Error, Result};
pub use scalar::{Scalar, Tolerances};

pub use bounds::{
    carnot_bound, certify, clausius_multibath_bound, generalized_carnot_bound, info_theoretic_bound, BoundValue,
    HeatEntry, Violation,
};
pub use cycle::{
    efficiency, efficiency_of, entropy_production, run_to_limit_cycle, run_to_limit_cycle_with_trace, BathHeat, Regime,
    Stroke,
};
pub use dynamics::{propagate_stroke, quasistatic_stroke, relax_constant, ProtocolKind, TrajectoryPoint};
pub use thermo::{
    energy_variance, fermi_occupation, logistic_occupation, mean_energy, nonequilibrium_free_energy,
    occupation_entropy, relative_entropy, shannon_entropy, state_hamiltonian_covariance,
};

pub type DiagonalState = thermo::DiagonalState<f64>;
pub type LevelSpectrum = thermo::LevelSpectrum<f64>;
pub type Bath = thermo::Bath<f64>;
pub type ThermalState = thermo::ThermalState<f64>;
pub type Protocol = dynamics::Protocol<f64>;
pub type IntegratorConfig = dynamics::IntegratorConfig<f64>;
pub type PropagationResult = dynamics::PropagationResult<f64>;
pub type Cycle = cycle::Cycle<f64>;
pub type CycleReport = cycle::CycleReport<f64>;
pub type CycleTrace = cycle::CycleTrace<f64>;
pub type TraceSample = cycle::TraceSample<f64>;
pub type LimitCycleConfig = cycle::LimitCycleConfig<f64>;
pub type HeatProfile = bounds::HeatProfile<f64>;
pub type BoundReport = bounds::BoundReport<f64>;
