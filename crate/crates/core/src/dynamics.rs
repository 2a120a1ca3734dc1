//! Occupation dynamics of a single driven fermionic level.
//!
//! The level `ε(t)` follows a [`Protocol`]. While a bath is attached the
//! occupation obeys the rate equation `dp/dt = −Γ (p − f(ε(t)))`, with `f` the
//! bath's Fermi function. Each stroke produces an energy ledger:
//!
//! * work extracted `W = −∫ p dε`,
//! * heat absorbed `Q = ∫ (ε − μ) dp`,
//! * chemical work `W_chem = μ Δp`,
//!
//! so that `ΔU = Q + W_chem − W` with `U = p ε`.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerances};
use crate::thermo::{as_f64, fermi, fermi_occupation, Bath};

/// Shape of the level drive during one stroke.
#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolKind<T> {
    Constant(T),
    Linear {
        from: T,
        to: T,
    },
    /// `(t, ε)` knots, linearly interpolated; times start at 0 and end at the duration.
    Sampled(Vec<(T, T)>),
}

/// A level drive over a fixed duration.
///
/// Durations are strictly positive, except for a [`Protocol::quench`]: a
/// linear drive of zero duration, which is only meaningful with no bath
/// attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol<T> {
    kind: ProtocolKind<T>,
    duration: T,
}

/// One linear piece of a protocol, on the stroke-local time axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece<T> {
    pub t0: T,
    pub t1: T,
    pub e0: T,
    pub e1: T,
}

impl<T: Scalar> Piece<T> {
    fn level_at(&self, t: T) -> T {
        if self.t1 > self.t0 {
            self.e0 + (self.e1 - self.e0) * (t - self.t0) / (self.t1 - self.t0)
        } else {
            self.e1
        }
    }

    fn slope(&self) -> T {
        if self.t1 > self.t0 {
            (self.e1 - self.e0) / (self.t1 - self.t0)
        } else {
            T::zero()
        }
    }
}

impl<T: Scalar> Protocol<T> {
    pub fn new(kind: ProtocolKind<T>, duration: T) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidProtocol(msg));
        if !(duration.is_finite() && duration >= T::zero()) {
            return invalid(format!("duration must be finite and non-negative, got {duration}"));
        }
        match &kind {
            ProtocolKind::Constant(e) => {
                if !e.is_finite() {
                    return invalid(format!("level {e} is not finite"));
                }
                if duration == T::zero() {
                    return invalid("a constant stroke needs a positive duration".into());
                }
            }
            ProtocolKind::Linear { from, to } => {
                if !(from.is_finite() && to.is_finite()) {
                    return invalid(format!("levels {from} -> {to} are not finite"));
                }
            }
            ProtocolKind::Sampled(knots) => {
                if duration == T::zero() {
                    return invalid("a sampled stroke needs a positive duration".into());
                }
                if knots.len() < 2 {
                    return invalid(format!("sampled protocol needs at least 2 knots, got {}", knots.len()));
                }
                if knots[0].0 != T::zero() {
                    return invalid(format!("first knot must be at t = 0, got {}", knots[0].0));
                }
                for (i, w) in knots.windows(2).enumerate() {
                    if !(w[1].0 > w[0].0) {
                        return invalid(format!("knot times must increase strictly (knot {})", i + 1));
                    }
                }
                if let Some(&(t, _)) = knots.iter().find(|(t, e)| !t.is_finite() || !e.is_finite()) {
                    return invalid(format!("non-finite knot at t = {t}"));
                }
                let last = knots[knots.len() - 1].0;
                if last != duration {
                    return invalid(format!("last knot at t = {last} does not match duration {duration}"));
                }
            }
        }
        Ok(Self { kind, duration })
    }

    pub fn constant(level: T, duration: T) -> Result<Self> {
        Self::new(ProtocolKind::Constant(level), duration)
    }

    pub fn linear(from: T, to: T, duration: T) -> Result<Self> {
        Self::new(ProtocolKind::Linear { from, to }, duration)
    }

    /// Instantaneous level jump.
    pub fn quench(from: T, to: T) -> Result<Self> {
        Self::new(ProtocolKind::Linear { from, to }, T::zero())
    }

    /// Piecewise-linear drive; the duration is the last knot time.
    pub fn sampled(knots: Vec<(T, T)>) -> Result<Self> {
        let duration = knots.last().map(|k| k.0).unwrap_or_else(T::zero);
        Self::new(ProtocolKind::Sampled(knots), duration)
    }

    pub fn kind(&self) -> &ProtocolKind<T> {
        &self.kind
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn is_instantaneous(&self) -> bool {
        self.duration == T::zero()
    }

    pub fn start_level(&self) -> T {
        match &self.kind {
            ProtocolKind::Constant(e) => *e,
            ProtocolKind::Linear { from, .. } => *from,
            ProtocolKind::Sampled(k) => k[0].1,
        }
    }

    pub fn end_level(&self) -> T {
        match &self.kind {
            ProtocolKind::Constant(e) => *e,
            ProtocolKind::Linear { to, .. } => *to,
            ProtocolKind::Sampled(k) => k[k.len() - 1].1,
        }
    }

    /// Level at stroke-local time `t`, clamped to `[0, duration]`.
    pub fn level_at(&self, t: T) -> T {
        let t = t.max(T::zero()).min(self.duration);
        let pieces = self.pieces();
        let piece = pieces.iter().find(|p| t <= p.t1).unwrap_or(&pieces[pieces.len() - 1]);
        piece.level_at(t)
    }

    pub(crate) fn pieces(&self) -> Vec<Piece<T>> {
        match &self.kind {
            ProtocolKind::Constant(e) => vec![Piece { t0: T::zero(), t1: self.duration, e0: *e, e1: *e }],
            ProtocolKind::Linear { from, to } => {
                vec![Piece { t0: T::zero(), t1: self.duration, e0: *from, e1: *to }]
            }
            ProtocolKind::Sampled(k) => {
                k.windows(2).map(|w| Piece { t0: w[0].0, t1: w[1].0, e0: w[0].1, e1: w[1].1 }).collect()
            }
        }
    }
}

/// Step-size control for the fixed-step RK4 propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T> {
    /// Upper bound on `max(Γ Δt, |Δε| / T)` per step.
    pub max_step: T,
    /// Minimum number of steps per protocol piece.
    pub min_steps: usize,
    /// Exact number of steps per piece; overrides `max_step` and `min_steps`.
    pub fixed_steps: Option<usize>,
    /// Repeat each stroke at half the step size and require agreement.
    pub verify: bool,
    pub verify_tolerance: T,
    pub max_refinements: u32,
    pub record_trajectory: bool,
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            max_step: T::lit(0.01),
            min_steps: 1,
            fixed_steps: None,
            verify: false,
            verify_tolerance: Tolerances::<T>::default().ledger,
            max_refinements: 6,
            record_trajectory: false,
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn with_fixed_steps(steps: usize) -> Self {
        Self { fixed_steps: Some(steps.max(1)), ..Self::default() }
    }

    pub fn verified() -> Self {
        Self { verify: true, ..Self::default() }
    }

    fn steps_for(&self, piece: &Piece<T>, bath: &Bath<T>, refinement: u32) -> usize {
        let base = match self.fixed_steps {
            Some(n) => n,
            None => {
                let stiffness = bath.coupling * (piece.t1 - piece.t0);
                let sweep = (piece.e1 - piece.e0).abs() / bath.temperature;
                let n = (stiffness.max(sweep) / self.max_step).ceil().to_usize().unwrap_or(usize::MAX);
                n.max(self.min_steps).max(1)
            }
        };
        base.saturating_mul(1usize << refinement.min(30))
    }
}

/// A sample of a stroke or cycle trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint<T> {
    pub time: T,
    pub level: T,
    pub occupation: T,
}

/// Energy ledger of one stroke.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult<T> {
    pub initial_occupation: T,
    pub final_occupation: T,
    pub initial_level: T,
    pub final_level: T,
    /// Work extracted from the dot (positive when the level descends while occupied).
    pub work: T,
    /// Heat absorbed from the bath, measured against `ε − μ`.
    pub heat: T,
    /// `μ Δp`: energy carried in by particles at the bath's chemical potential.
    pub chemical_work: T,
    /// RK4 steps taken (zero for algebraic strokes).
    pub steps: usize,
    pub trajectory: Option<Vec<TrajectoryPoint<T>>>,
}

impl<T: Scalar> PropagationResult<T> {
    pub fn energy_change(&self) -> T {
        self.final_occupation * self.final_level - self.initial_occupation * self.initial_level
    }

    /// `ΔU − (Q + W_chem − W)`.
    pub fn first_law_residual(&self) -> T {
        self.energy_change() - (self.heat + self.chemical_work - self.work)
    }
}

/// Closed-form relaxation at fixed level: `p(t) = f + (p0 − f) e^{−Γ t}`.
pub fn relax_constant<T: Scalar>(p0: T, level: T, bath: &Bath<T>, t: T) -> T {
    let f = fermi_occupation(level, bath);
    let decay = bath.coupling * t;
    if decay >= Tolerances::<T>::default().relaxation_saturation {
        return f;
    }
    f + (p0 - f) * (-decay).exp()
}

/// Propagates the occupation through one stroke and books its energy ledger.
///
/// With no bath the occupation is frozen and the work is exactly `−p Δε`.
pub fn propagate_stroke<T: Scalar>(
    p0: T,
    protocol: &Protocol<T>,
    bath: Option<&Bath<T>>,
    cfg: &IntegratorConfig<T>,
) -> Result<PropagationResult<T>> {
    if !(p0 >= T::zero() && p0 <= T::one()) {
        return Err(Error::OccupationOutOfRange { time: 0.0, value: as_f64(p0) });
    }
    let Some(bath) = bath else {
        return Ok(drive_only(p0, protocol, cfg.record_trajectory));
    };
    if protocol.is_instantaneous() {
        return Err(Error::InvalidProtocol(format!(
            "stroke coupled to bath `{}` needs a positive duration",
            bath.label
        )));
    }

    let mut refinement = 0;
    let mut current = integrate(p0, protocol, bath, cfg, refinement)?;
    if !cfg.verify {
        return Ok(current);
    }
    loop {
        let finer = integrate(p0, protocol, bath, cfg, refinement + 1)?;
        let scale = T::one().max(current.work.abs()).max(current.heat.abs());
        let residual = (finer.final_occupation - current.final_occupation)
            .abs()
            .max((finer.work - current.work).abs())
            .max((finer.heat - current.heat).abs())
            / scale;
        if residual <= cfg.verify_tolerance {
            return Ok(finer);
        }
        refinement += 1;
        if refinement >= cfg.max_refinements {
            return Err(Error::IntegratorNonConvergence { steps: finer.steps, residual: as_f64(residual) });
        }
        current = finer;
    }
}

fn drive_only<T: Scalar>(p0: T, protocol: &Protocol<T>, record: bool) -> PropagationResult<T> {
    let (e0, e1) = (protocol.start_level(), protocol.end_level());
    let trajectory = record.then(|| {
        let mut pts = vec![TrajectoryPoint { time: T::zero(), level: e0, occupation: p0 }];
        pts.extend(protocol.pieces().iter().map(|pc| TrajectoryPoint { time: pc.t1, level: pc.e1, occupation: p0 }));
        pts
    });
    PropagationResult {
        initial_occupation: p0,
        final_occupation: p0,
        initial_level: e0,
        final_level: e1,
        work: -p0 * (e1 - e0),
        heat: T::zero(),
        chemical_work: T::zero(),
        steps: 0,
        trajectory,
    }
}

#[derive(Clone, Copy)]
struct Ledger<T> {
    p: T,
    work: T,
    heat: T,
}

fn integrate<T: Scalar>(
    p0: T,
    protocol: &Protocol<T>,
    bath: &Bath<T>,
    cfg: &IntegratorConfig<T>,
    refinement: u32,
) -> Result<PropagationResult<T>> {
    let (gamma, temp, mu) = (bath.coupling, bath.temperature, bath.chemical_potential);
    let rhs = |piece: &Piece<T>, t: T, p: T| -> (T, T, T) {
        let e = piece.level_at(t);
        let dp = -gamma * (p - fermi(e, temp, mu));
        (dp, -p * piece.slope(), (e - mu) * dp)
    };

    let mut y = Ledger { p: p0, work: T::zero(), heat: T::zero() };
    let mut steps = 0usize;
    let mut trajectory = cfg
        .record_trajectory
        .then(|| vec![TrajectoryPoint { time: T::zero(), level: protocol.start_level(), occupation: p0 }]);
    let half = T::half();
    let sixth = T::one() / T::lit(6.0);

    for piece in protocol.pieces() {
        let n = cfg.steps_for(&piece, bath, refinement);
        let h = (piece.t1 - piece.t0) / T::from_usize(n).unwrap_or_else(T::one);
        for i in 0..n {
            let t = piece.t0 + h * T::from_usize(i).unwrap_or_else(T::zero);
            let k1 = rhs(&piece, t, y.p);
            let k2 = rhs(&piece, t + half * h, y.p + half * h * k1.0);
            let k3 = rhs(&piece, t + half * h, y.p + half * h * k2.0);
            let k4 = rhs(&piece, t + h, y.p + h * k3.0);
            y.p = y.p + h * sixth * (k1.0 + T::two() * (k2.0 + k3.0) + k4.0);
            y.work = y.work + h * sixth * (k1.1 + T::two() * (k2.1 + k3.1) + k4.1);
            y.heat = y.heat + h * sixth * (k1.2 + T::two() * (k2.2 + k3.2) + k4.2);
            steps += 1;
            let t_next = if i + 1 == n { piece.t1 } else { t + h };
            if !(y.p >= T::zero() && y.p <= T::one()) {
                return Err(Error::OccupationOutOfRange { time: as_f64(t_next), value: as_f64(y.p) });
            }
            if let Some(tr) = trajectory.as_mut() {
                tr.push(TrajectoryPoint { time: t_next, level: piece.level_at(t_next), occupation: y.p });
            }
        }
    }

    Ok(PropagationResult {
        initial_occupation: p0,
        final_occupation: y.p,
        initial_level: protocol.start_level(),
        final_level: protocol.end_level(),
        work: y.work,
        heat: y.heat,
        chemical_work: mu * (y.p - p0),
        steps,
        trajectory,
    })
}

// Five-point Gauss–Legendre rule on [-1, 1].
const GL_NODES: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Reference limit of infinitely slow driving: the occupation sits at
/// `f(ε(t))` throughout, starting from `f(ε(0))`.
pub fn quasistatic_stroke<T: Scalar>(protocol: &Protocol<T>, bath: &Bath<T>) -> PropagationResult<T> {
    quasistatic_stroke_with(protocol, bath, false)
}

pub(crate) fn quasistatic_stroke_with<T: Scalar>(
    protocol: &Protocol<T>,
    bath: &Bath<T>,
    record: bool,
) -> PropagationResult<T> {
    let (temp, mu) = (bath.temperature, bath.chemical_potential);
    let f = |e: T| fermi(e, temp, mu);
    let nodes = GL_NODES.map(T::lit);
    let weights = GL_WEIGHTS.map(T::lit);
    let chunk = T::lit(0.05);

    let p0 = f(protocol.start_level());
    let mut work = T::zero();
    let mut heat = T::zero();
    let mut trajectory =
        record.then(|| vec![TrajectoryPoint { time: T::zero(), level: protocol.start_level(), occupation: p0 }]);

    for piece in protocol.pieces() {
        let span = piece.e1 - piece.e0;
        let n = ((span.abs() / temp) / chunk).ceil().to_usize().unwrap_or(1).max(1);
        let nf = T::from_usize(n).unwrap_or_else(T::one);
        let de = span / nf;
        let dt = (piece.t1 - piece.t0) / nf;
        for i in 0..n {
            let a = piece.e0 + de * T::from_usize(i).unwrap_or_else(T::zero);
            let mid = a + T::half() * de;
            for (x, w) in nodes.iter().zip(weights.iter()) {
                let e = mid + T::half() * de * *x;
                let occ = f(e);
                let dfde = -occ * (T::one() - occ) / temp;
                work = work - T::half() * de * *w * occ;
                heat = heat + T::half() * de * *w * (e - mu) * dfde;
            }
            if let Some(tr) = trajectory.as_mut() {
                let t = piece.t0 + dt * T::from_usize(i + 1).unwrap_or_else(T::one);
                let e = a + de;
                tr.push(TrajectoryPoint { time: t, level: e, occupation: f(e) });
            }
        }
    }

    let p1 = f(protocol.end_level());
    PropagationResult {
        initial_occupation: p0,
        final_occupation: p1,
        initial_level: protocol.start_level(),
        final_level: protocol.end_level(),
        work,
        heat,
        chemical_work: mu * (p1 - p0),
        steps: 0,
        trajectory,
    }
}
