//! Scalar abstraction and the shared tolerance record.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point type the physics is generic over.
///
/// Implemented for `f32` and `f64`. Public results of the `f64` aliases at the
/// crate root are the reference precision; `f32` is supported for bulk sweeps
/// where ledger tolerances are relaxed to the type's epsilon.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    /// `max(x, k·epsilon)`, used to floor tolerances for narrow types.
    #[inline]
    fn floored(x: f64, k: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(k))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Every numeric threshold used by the library, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Allowed `|Σ p_i − 1|` for a population vector.
    pub normalization: T,
    /// Relative first-law closure budget for strokes and cycles.
    pub ledger: T,
    /// Absolute tolerance for comparing efficiencies and bounds.
    pub bound: T,
    /// Allowed negative entropy production before it counts as a breach.
    pub second_law: T,
    /// Heats below `zero_heat · scale` are dropped when building a heat profile.
    pub zero_heat: T,
    /// Allowed level discontinuity between consecutive strokes.
    pub continuity: T,
    /// `Γ·t` beyond which relaxation is treated as complete.
    pub relaxation_saturation: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            normalization: T::floored(1e-12, 16.0),
            ledger: T::floored(1e-8, 64.0),
            bound: T::floored(1e-9, 64.0),
            second_law: T::floored(1e-10, 64.0),
            zero_heat: T::floored(1e-12, 16.0),
            continuity: T::floored(1e-12, 16.0),
            relaxation_saturation: T::lit(700.0),
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    pub fn standard() -> Self {
        Self::default()
    }
}
