use thiserror::Error;

/// Errors produced by the thermodynamic core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a state needs at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("population p[{index}] = {value} is outside [0, 1]")]
    InvalidPopulation { index: usize, value: f64 },
    #[error("populations sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("energy e[{index}] = {value} is not finite")]
    NonFiniteEnergy { index: usize, value: f64 },
    #[error("invalid bath `{label}`: {reason}")]
    InvalidBath { label: String, reason: String },
    #[error("reference has zero weight at level {index} where the state does not")]
    SupportViolation { index: usize },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("occupation {value} left [0, 1] at t = {time}")]
    OccupationOutOfRange { time: f64, value: f64 },
    #[error("integrator did not converge after {steps} steps (residual {residual:e})")]
    IntegratorNonConvergence { steps: usize, residual: f64 },
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("unknown bath label `{0}`")]
    UnknownBath(String),
    #[error("limit cycle not reached after {periods} periods (last residual {residual:e})")]
    LimitCycleNonConvergence { periods: usize, residual: f64 },
    #[error("temperatures out of order: hot {hot} < cold {cold}")]
    TemperatureOrder { hot: f64, cold: f64 },
    #[error("invalid heat profile: {0}")]
    InvalidProfile(String),
    #[error("heat profile has no absorbing entry")]
    NoHeatAbsorbed,
    #[error("trace is not periodic: start/end occupation differ by {residual:e}")]
    TraceNotPeriodic { residual: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
