use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fermi_engine_harness::{
    csv_string, exit, load_config, run_single, run_sweep, verify, write_csv, RunConfig, SweepRow,
};

#[derive(Parser)]
#[command(name = "fermi-engine", version, about = "Finite-time fermionic dot engine: runs, sweeps and bound checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration to its limit cycle and certify it.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV row here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the configured sweep grid and write one CSV row per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
    /// Run the invariant suite on a configuration.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn labels(cfg: &RunConfig) -> Vec<String> {
    cfg.baths.iter().map(|b| b.label.clone()).collect()
}

fn write_file(path: &Path, labels: &[String], rows: &[SweepRow]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, labels, rows)?;
    w.flush()?;
    Ok(())
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> anyhow::Result<i32> {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::CONFIG);
        }
    };
    let single = match run_single(&cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::CONFIG);
        }
    };
    let labels = labels(&cfg);
    let row = match &single.evaluation {
        Ok(e) => {
            print!("{}", fermi_engine_harness::output::render_text(e));
            SweepRow::from_evaluation(None, e)
        }
        Err(e) => {
            eprintln!("error: {e}");
            SweepRow::empty(None, labels.len())
        }
    };
    match out.or(cfg.out.clone()) {
        Some(path) => write_file(&path, &labels, &[row])?,
        None => print!("\n{}", csv_string(&labels, &[row])),
    }
    Ok(single.exit_code)
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>, workers: usize) -> anyhow::Result<i32> {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::CONFIG);
        }
    };
    let points = match run_sweep(&cfg, workers) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::CONFIG);
        }
    };
    let labels = labels(&cfg);
    let rows: Vec<SweepRow> = points.iter().map(|p| SweepRow::from_point(p, labels.len())).collect();
    let Some(path) = out.or(cfg.out.clone()) else {
        eprintln!("error: sweep needs --out <csv> (or `out` in the config)");
        return Ok(exit::CONFIG);
    };
    write_file(&path, &labels, &rows)?;

    let mut code = exit::OK;
    for p in &points {
        match &p.outcome {
            Err(msg) => {
                eprintln!("point {}: {msg}", p.value);
                code = code.max(exit::NON_CONVERGENCE);
            }
            Ok(e) if !e.is_clean() => {
                for v in &e.bounds.violations {
                    eprintln!("point {}: violation {} by {:e}", p.value, v.name, v.magnitude);
                }
                for f in &e.ledger_failures {
                    eprintln!("point {}: violation {f}", p.value);
                }
                code = exit::VIOLATION;
            }
            Ok(_) => {}
        }
    }
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    Ok(code)
}

fn cmd_verify(config: &Path) -> anyhow::Result<i32> {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::CONFIG);
        }
    };
    match verify(&cfg) {
        Ok(outcome) => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            for c in &outcome.checks {
                writeln!(lock, "{}", c.line())?;
            }
            Ok(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(e.exit_code())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors; 2 is reserved for non-convergence here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(exit::CONFIG as u8) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Sweep { config, out, workers } => cmd_sweep(&config, out, workers),
        Command::Verify { config } => cmd_verify(&config),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::CONFIG as u8)
        }
    }
}
