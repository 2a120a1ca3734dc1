//! Config-driven runner for `fermi-engine`: single runs, parameter sweeps with
//! deterministic CSV output, and an invariant-checking `verify` mode.

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use output::{csv_string, write_csv, SweepRow};
pub use run::{evaluate, exit, run_single, Evaluation, EvaluationError, SingleRun};
pub use sweep::{run_sweep, SweepPoint};
pub use verify::{verify, Check};
