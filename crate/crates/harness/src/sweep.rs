//! Parameter grids, parameter paths, and the parallel sweep runner.

use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{ConfigError, ProtocolSpec, RunConfig};
use crate::run::{evaluate, Evaluation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Lin,
    Log,
}

/// One path, or several paths that all receive the swept value.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PathSpec {
    One(String),
    Many(Vec<String>),
}

impl PathSpec {
    pub fn paths(&self) -> Vec<&str> {
        match self {
            Self::One(p) => vec![p.as_str()],
            Self::Many(ps) => ps.iter().map(String::as_str).collect(),
        }
    }

    pub fn label(&self) -> String {
        self.paths().join("+")
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub path: PathSpec,
    pub scale: Scale,
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        if self.count < 2 {
            return Err(ConfigError::InvalidGrid(format!("count must be >= 2, got {}", self.count)));
        }
        if !(self.from.is_finite() && self.to.is_finite() && self.from < self.to) {
            return Err(ConfigError::InvalidGrid(format!(
                "endpoints must be finite with from < to, got {} .. {}",
                self.from, self.to
            )));
        }
        let last = (self.count - 1) as f64;
        Ok(match self.scale {
            Scale::Lin => (0..self.count)
                .map(
                    |k| if k + 1 == self.count { self.to } else { self.from + (self.to - self.from) * k as f64 / last },
                )
                .collect(),
            Scale::Log => {
                if self.from <= 0.0 {
                    return Err(ConfigError::InvalidGrid("log grid needs from > 0".into()));
                }
                let (a, b) = (self.from.ln(), self.to.ln());
                (0..self.count)
                    .map(|k| match k {
                        0 => self.from,
                        k if k + 1 == self.count => self.to,
                        k => (a + (b - a) * k as f64 / last).exp(),
                    })
                    .collect()
            }
        })
    }

    pub(crate) fn parsed_paths(&self, cfg: &RunConfig) -> Result<Vec<ParamPath>, ConfigError> {
        let paths = self.path.paths();
        if paths.is_empty() {
            return Err(ConfigError::InvalidGrid("sweep.path is empty".into()));
        }
        paths.into_iter().map(|p| ParamPath::parse(p, cfg)).collect()
    }
}

pub const SUPPORTED_PATHS: &str = "strokes[i].duration, strokes[i].protocol.eps, strokes[i].protocol.from, \
strokes[i].protocol.to, baths[<label or i>].T, baths[<label or i>].mu, baths[<label or i>].Gamma";

/// A resolved reference to one numeric field of a [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamPath {
    Duration(usize),
    Level(usize),
    From(usize),
    To(usize),
    Temperature(usize),
    ChemicalPotential(usize),
    Coupling(usize),
}

impl ParamPath {
    pub fn parse(path: &str, cfg: &RunConfig) -> Result<Self, ConfigError> {
        let unsupported =
            || ConfigError::UnsupportedPath { path: path.to_owned(), supported: SUPPORTED_PATHS.to_owned() };
        let (head, rest) = path.split_once('[').ok_or_else(unsupported)?;
        let (index, field) = rest.split_once(']').ok_or_else(unsupported)?;
        let field = field.strip_prefix('.').ok_or_else(unsupported)?;
        match head {
            "strokes" => {
                let i: usize = index.parse().map_err(|_| unsupported())?;
                let stroke = cfg.strokes.get(i).ok_or_else(unsupported)?;
                match (field, &stroke.protocol) {
                    ("duration", _) => Ok(Self::Duration(i)),
                    ("protocol.eps", ProtocolSpec::Constant { .. }) => Ok(Self::Level(i)),
                    ("protocol.from", ProtocolSpec::Linear { .. } | ProtocolSpec::Sampled { .. }) => Ok(Self::From(i)),
                    ("protocol.to", ProtocolSpec::Linear { .. } | ProtocolSpec::Sampled { .. }) => Ok(Self::To(i)),
                    _ => Err(unsupported()),
                }
            }
            "baths" => {
                let i = match index.parse::<usize>() {
                    Ok(i) if i < cfg.baths.len() => i,
                    _ => cfg.baths.iter().position(|b| b.label == index).ok_or_else(unsupported)?,
                };
                match field {
                    "T" => Ok(Self::Temperature(i)),
                    "mu" => Ok(Self::ChemicalPotential(i)),
                    "Gamma" => Ok(Self::Coupling(i)),
                    _ => Err(unsupported()),
                }
            }
            _ => Err(unsupported()),
        }
    }

    pub fn apply(&self, cfg: &mut RunConfig, value: f64) {
        match *self {
            Self::Duration(i) => {
                let s = &mut cfg.strokes[i];
                if let ProtocolSpec::Sampled { knots } = &mut s.protocol {
                    if s.duration > 0.0 {
                        let stretch = value / s.duration;
                        knots.iter_mut().for_each(|k| k[0] *= stretch);
                        if let Some(last) = knots.last_mut() {
                            last[0] = value;
                        }
                    }
                }
                s.duration = value;
            }
            Self::Level(i) => {
                if let ProtocolSpec::Constant { eps } = &mut cfg.strokes[i].protocol {
                    *eps = value;
                }
            }
            Self::From(i) => match &mut cfg.strokes[i].protocol {
                ProtocolSpec::Linear { from, .. } => *from = value,
                ProtocolSpec::Sampled { knots } => knots[0][1] = value,
                ProtocolSpec::Constant { .. } => {}
            },
            Self::To(i) => match &mut cfg.strokes[i].protocol {
                ProtocolSpec::Linear { to, .. } => *to = value,
                ProtocolSpec::Sampled { knots } => {
                    if let Some(k) = knots.last_mut() {
                        k[1] = value;
                    }
                }
                ProtocolSpec::Constant { .. } => {}
            },
            Self::Temperature(i) => cfg.baths[i].temperature = value,
            Self::ChemicalPotential(i) => cfg.baths[i].mu = value,
            Self::Coupling(i) => cfg.baths[i].coupling = value,
        }
    }
}

/// Result of evaluating one grid point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<Evaluation, String>,
}

/// Evaluates every grid point on a pool of `workers` threads; results come
/// back in grid order.
pub fn run_sweep(cfg: &RunConfig, workers: usize) -> Result<Vec<SweepPoint>, ConfigError> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| ConfigError::invalid("sweep", "config has no sweep section"))?;
    let grid = spec.grid()?;
    let paths = spec.parsed_paths(cfg)?;
    let mut base = cfg.clone();
    base.sweep = None;

    let point = |value: f64| -> SweepPoint {
        let mut local = base.clone();
        paths.iter().for_each(|p| p.apply(&mut local, value));
        let outcome =
            local.validate().map_err(|e| e.to_string()).and_then(|()| evaluate(&local).map_err(|e| e.to_string()));
        SweepPoint { value, outcome }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ConfigError::invalid("workers", e.to_string()))?;
    Ok(pool.install(|| grid.par_iter().map(|&v| point(v)).collect()))
}
