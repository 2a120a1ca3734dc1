//! JSON run configuration.
//!
//! ```json
//! {
//!   "baths":   [{"label": "hot", "T": 2.0, "mu": 0.0, "Gamma": 1.0}, ...],
//!   "strokes": [{"duration": 0.0, "bath": null,
//!                "protocol": {"kind": "linear", "from": 2.0, "to": 3.0}}, ...],
//!   "limit_cycle": {"tol": 1e-12, "max_periods": 100000, "accelerate": true},
//!   "mode": "finite_time",
//!   "p_init": 0.5,
//!   "sweep": {"path": "strokes[1].duration", "scale": "log", "from": 0.1, "to": 100, "count": 10},
//!   "out": "run.csv"
//! }
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use fermi_engine::{Bath, Cycle, IntegratorConfig, LimitCycleConfig, Protocol, Regime, Stroke};
use serde::Deserialize;
use thiserror::Error;

use crate::sweep::{ParamPath, SweepSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: unknown bath label \"{label}\"")]
    UnknownBath { field: String, label: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
    #[error("unsupported parameter path `{path}`; supported: {supported}")]
    UnsupportedPath { path: String, supported: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub label: String,
    #[serde(rename = "T")]
    pub temperature: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(rename = "Gamma")]
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProtocolSpec {
    Constant {
        eps: f64,
    },
    Linear {
        from: f64,
        to: f64,
    },
    /// `[t, eps]` pairs; the last time must equal the stroke duration.
    Sampled {
        knots: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrokeSpec {
    pub duration: f64,
    #[serde(default)]
    pub bath: Option<String>,
    pub protocol: ProtocolSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitCycleSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_periods")]
    pub max_periods: usize,
    #[serde(default = "default_true")]
    pub accelerate: bool,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_periods() -> usize {
    100_000
}

fn default_true() -> bool {
    true
}

fn default_p_init() -> f64 {
    0.5
}

impl Default for LimitCycleSpec {
    fn default() -> Self {
        Self { tol: default_tol(), max_periods: default_max_periods(), accelerate: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    FiniteTime,
    Quasistatic,
}

/// A parsed and validated run configuration.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub baths: Vec<BathSpec>,
    pub strokes: Vec<StrokeSpec>,
    #[serde(default)]
    pub limit_cycle: LimitCycleSpec,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_p_init")]
    pub p_init: f64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (i, b) in self.baths.iter().enumerate() {
            let field = |name: &str| format!("baths[{i}].{name}");
            if !(b.temperature.is_finite() && b.temperature > 0.0) {
                return Err(ConfigError::invalid(field("T"), format!("must be > 0, got {}", b.temperature)));
            }
            if !b.mu.is_finite() {
                return Err(ConfigError::invalid(field("mu"), "must be finite"));
            }
            if !(b.coupling.is_finite() && b.coupling > 0.0) {
                return Err(ConfigError::invalid(field("Gamma"), format!("must be > 0, got {}", b.coupling)));
            }
            if self.baths[..i].iter().any(|o| o.label == b.label) {
                return Err(ConfigError::invalid(field("label"), format!("duplicate label \"{}\"", b.label)));
            }
        }
        if self.strokes.is_empty() {
            return Err(ConfigError::invalid("strokes", "at least one stroke is required"));
        }
        for (i, s) in self.strokes.iter().enumerate() {
            if let Some(label) = &s.bath {
                if !self.baths.iter().any(|b| &b.label == label) {
                    return Err(ConfigError::UnknownBath { field: format!("strokes[{i}].bath"), label: label.clone() });
                }
            }
            let quench = s.bath.is_none() && matches!(s.protocol, ProtocolSpec::Linear { .. });
            let ok = s.duration.is_finite() && (s.duration > 0.0 || (quench && s.duration == 0.0));
            if !ok {
                let why = if quench { "must be >= 0" } else { "must be > 0" };
                return Err(ConfigError::invalid(
                    format!("strokes[{i}].duration"),
                    format!("{why}, got {}", s.duration),
                ));
            }
        }
        if !(self.limit_cycle.tol.is_finite() && self.limit_cycle.tol > 0.0) {
            return Err(ConfigError::invalid("limit_cycle.tol", "must be > 0"));
        }
        if self.limit_cycle.max_periods == 0 {
            return Err(ConfigError::invalid("limit_cycle.max_periods", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.p_init) {
            return Err(ConfigError::invalid("p_init", format!("must lie in [0, 1], got {}", self.p_init)));
        }
        self.build_cycle()?;
        if let Some(sweep) = &self.sweep {
            let grid = sweep.grid()?;
            let paths = sweep.parsed_paths(self)?;
            for value in [grid[0], grid[grid.len() - 1]] {
                let mut probe = self.clone();
                probe.sweep = None;
                for p in &paths {
                    p.apply(&mut probe, value);
                }
                probe.validate().map_err(|e| ConfigError::invalid("sweep", format!("at value {value}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn build_cycle(&self) -> Result<Cycle, ConfigError> {
        let baths = self
            .baths
            .iter()
            .enumerate()
            .map(|(i, b)| {
                Bath::new(b.label.clone(), b.temperature, b.mu, b.coupling)
                    .map_err(|e| ConfigError::invalid(format!("baths[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let strokes = self
            .strokes
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let field = format!("strokes[{i}].protocol");
                let protocol = match &s.protocol {
                    ProtocolSpec::Constant { eps } => Protocol::constant(*eps, s.duration),
                    ProtocolSpec::Linear { from, to } => Protocol::linear(*from, *to, s.duration),
                    ProtocolSpec::Sampled { knots } => Protocol::new(
                        fermi_engine::ProtocolKind::Sampled(knots.iter().map(|k| (k[0], k[1])).collect()),
                        s.duration,
                    ),
                }
                .map_err(|e| ConfigError::invalid(field, e.to_string()))?;
                Ok(Stroke { protocol, bath: s.bath.clone() })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        Cycle::new(baths, strokes).map_err(|e| match e {
            fermi_engine::Error::UnknownBath(label) => ConfigError::UnknownBath { field: "strokes".into(), label },
            other => ConfigError::invalid("strokes", other.to_string()),
        })
    }

    pub fn limit_cycle_config(&self) -> LimitCycleConfig {
        LimitCycleConfig {
            tolerance: self.limit_cycle.tol,
            max_periods: self.limit_cycle.max_periods,
            accelerate: self.limit_cycle.accelerate,
            regime: match self.mode {
                Mode::FiniteTime => Regime::FiniteTime,
                Mode::Quasistatic => Regime::Quasistatic,
            },
            integrator: IntegratorConfig::default(),
        }
    }

    /// Sets one parameter, addressed the same way as sweep paths.
    pub fn set(&mut self, path: &str, value: f64) -> Result<(), ConfigError> {
        ParamPath::parse(path, self)?.apply(self, value);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "baths": [{"label": "b", "T": 1.0, "mu": 0.0, "Gamma": 1.0}],
        "strokes": [{"duration": 1.0, "bath": "b", "protocol": {"kind": "constant", "eps": 1.0}}]
    }"#;

    #[test]
    fn minimal_config_loads() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.limit_cycle, LimitCycleSpec::default());
        assert_eq!(cfg.mode, Mode::FiniteTime);
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn missing_bath_is_named() {
        let text = MINIMAL.replace(r#""bath": "b""#, r#""bath": "hot""#);
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(&err, ConfigError::UnknownBath { label, .. } if label == "hot"));
        assert!(err.to_string().contains("\"hot\""));
        assert!(err.to_string().contains("strokes[0].bath"));
    }

    #[test]
    fn non_positive_duration_is_rejected() {
        for d in ["0.0", "-1.0"] {
            let text = MINIMAL.replace(r#""duration": 1.0"#, &format!(r#""duration": {d}"#));
            let err = parse_config(&text).unwrap_err();
            assert!(matches!(&err, ConfigError::Invalid { field, .. } if field == "strokes[0].duration"), "{err}");
        }
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = MINIMAL.replace(r#""mu": 0.0"#, r#""mu": 0.0, "gamma": 2"#);
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(&err, ConfigError::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("gamma"));
        let text = MINIMAL.replace(r#""eps": 1.0"#, r#""eps": 1.0, "slope": 1"#);
        assert!(matches!(parse_config(&text), Err(ConfigError::Parse { .. })));
        let text = MINIMAL.replacen('{', r#"{"extra": 1,"#, 1);
        assert!(matches!(parse_config(&text), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_config("{\n  \"baths\": [\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn level_jumps_need_a_quench() {
        let text = r#"{
            "baths": [{"label": "b", "T": 1.0, "Gamma": 1.0}],
            "strokes": [
                {"duration": 1.0, "bath": "b", "protocol": {"kind": "constant", "eps": 1.0}},
                {"duration": 1.0, "bath": "b", "protocol": {"kind": "constant", "eps": 2.0}}
            ]
        }"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("quench"), "{err}");
    }

    #[test]
    fn sampled_knots_must_end_at_duration() {
        let text = r#"{
            "baths": [{"label": "b", "T": 1.0, "Gamma": 1.0}],
            "strokes": [{"duration": 2.0, "bath": "b",
                         "protocol": {"kind": "sampled", "knots": [[0, 1.0], [0.5, 2.0], [1.0, 1.0]]}}]
        }"#;
        let err = parse_config(text).unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { field, .. } if field == "strokes[0].protocol"), "{err}");
    }

    #[test]
    fn p_init_is_range_checked() {
        let text = MINIMAL.replacen('{', r#"{"p_init": 1.5,"#, 1);
        assert!(matches!(parse_config(&text), Err(ConfigError::Invalid { field, .. }) if field == "p_init"));
    }
}
