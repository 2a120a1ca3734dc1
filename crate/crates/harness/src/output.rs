//! CSV rows and human-readable reports.
//!
//! Numbers are written with 17 significant digits in scientific notation;
//! undefined efficiencies and untranscribed bounds are empty fields.

use std::fmt::Write as _;
use std::io::Write;

use fermi_engine::BoundValue;

use crate::run::Evaluation;
use crate::sweep::SweepPoint;

/// One CSV row: a grid point (or a single run) and its ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: Option<f64>,
    pub work: Option<f64>,
    pub heats: Vec<Option<f64>>,
    pub efficiency: Option<f64>,
    pub entropy_production: Option<f64>,
    pub carnot: Option<f64>,
    pub clausius: Option<f64>,
    pub generalized: Option<f64>,
    pub info: Option<f64>,
    pub converged_after: Option<usize>,
}

impl SweepRow {
    pub fn from_evaluation(value: Option<f64>, e: &Evaluation) -> Self {
        Self {
            value,
            work: Some(e.report.work),
            heats: e.report.heats.iter().map(|h| Some(h.heat)).collect(),
            efficiency: e.report.efficiency,
            entropy_production: Some(e.report.entropy_production),
            carnot: Some(e.bounds.carnot),
            clausius: e.bounds.clausius,
            generalized: bound(e.bounds.generalized_carnot),
            info: bound(e.bounds.info),
            converged_after: Some(e.report.converged_after),
        }
    }

    /// Row for a grid point that produced no ledger.
    pub fn empty(value: Option<f64>, baths: usize) -> Self {
        Self {
            value,
            work: None,
            heats: vec![None; baths],
            efficiency: None,
            entropy_production: None,
            carnot: None,
            clausius: None,
            generalized: None,
            info: None,
            converged_after: None,
        }
    }

    pub fn from_point(point: &SweepPoint, baths: usize) -> Self {
        match &point.outcome {
            Ok(e) => Self::from_evaluation(Some(point.value), e),
            Err(_) => Self::empty(Some(point.value), baths),
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![num(self.value), num(self.work)];
        out.extend(self.heats.iter().map(|h| num(*h)));
        out.extend([
            num(self.efficiency),
            num(self.entropy_production),
            num(self.carnot),
            num(self.clausius),
            num(self.generalized),
            num(self.info),
            self.converged_after.map(|n| n.to_string()).unwrap_or_default(),
        ]);
        out
    }
}

fn bound(v: BoundValue<f64>) -> Option<f64> {
    v.value()
}

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn num(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn header(bath_labels: &[String]) -> Vec<String> {
    let mut h = vec!["param".to_owned(), "W_net".to_owned()];
    h.extend(bath_labels.iter().map(|l| format!("Q_{l}")));
    h.extend(
        ["eta", "Sigma_irr", "eta_C", "eta_clausius", "eta_generalized", "eta_info", "converged_after"]
            .map(str::to_owned),
    );
    h
}

pub fn write_csv<W: Write>(out: W, bath_labels: &[String], rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header(bath_labels))?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(bath_labels: &[String], rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, bath_labels, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.10}")).unwrap_or_else(|| "undefined".into())
}

fn bound_text(v: BoundValue<f64>) -> String {
    match v {
        BoundValue::Value(x) => format!("{x:.10}"),
        BoundValue::NotTranscribed => "not transcribed".into(),
    }
}

pub fn render_text(e: &Evaluation) -> String {
    let r = &e.report;
    let b = &e.bounds;
    let mut s = String::new();
    let _ = writeln!(s, "limit cycle reached after {} periods (residual {:.3e})", r.converged_after, r.residual);
    let _ = writeln!(s, "  period            {:.10}", r.period);
    let _ = writeln!(s, "  start occupation  {:.12}", r.limit_state);
    let _ = writeln!(s, "  W_net             {:.10e}", r.work);
    if r.work <= 0.0 {
        let _ = writeln!(s, "                    (no net work extracted: W_net <= 0)");
    }
    let _ = writeln!(s, "  W_chem            {:.10e}", r.chemical_work);
    for h in &r.heats {
        let name = format!("Q[{}] (T = {})", h.label, h.temperature);
        let _ = writeln!(s, "  {name:<17} {:.10e}", h.heat);
    }
    let _ = writeln!(s, "  dS_cycle          {:.3e}", r.entropy_change);
    let _ = writeln!(s, "  Sigma_irr         {:.10e}", r.entropy_production);
    let _ = writeln!(s, "efficiency          {}", opt(r.efficiency));
    let _ = writeln!(s, "  carnot            {:.10}", b.carnot);
    let _ = writeln!(s, "  clausius          {}", opt(b.clausius));
    let _ = writeln!(s, "  generalized       {}", bound_text(b.generalized_carnot));
    let _ = writeln!(s, "  information       {}", bound_text(b.info));
    if e.is_clean() {
        let _ = writeln!(s, "no bound violations");
    } else {
        for v in &b.violations {
            let _ = writeln!(s, "VIOLATION {} by {:e}", v.name, v.magnitude);
        }
        for f in &e.ledger_failures {
            let _ = writeln!(s, "VIOLATION {f}");
        }
    }
    s
}
