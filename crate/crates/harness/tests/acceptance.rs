//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.
//!
//! Run with `cargo test -p fermi-engine-harness --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use fermi_engine::{
    carnot_bound, certify, clausius_multibath_bound, generalized_carnot_bound, info_theoretic_bound,
    occupation_entropy, propagate_stroke, relax_constant, run_to_limit_cycle, run_to_limit_cycle_with_trace, Bath,
    BoundValue, Cycle, CycleReport, HeatProfile, IntegratorConfig, LimitCycleConfig, Protocol, Stroke,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIRST_LAW_TOL: f64 = 1e-8;
const SECOND_LAW_TOL: f64 = 1e-10;
const STRICT_PRODUCTION: f64 = 1e-6;
const PROPAGATOR_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-9;
const OTTO_ETA_TOL: f64 = 1e-9;
const OTTO_LEDGER_TOL: f64 = 1e-6;
const REVERSIBLE_GAP_TOL: f64 = 1e-3;
const REVERSIBLE_WORK_TOL: f64 = 1e-6;
const MULTIBATH_TOL: f64 = 1e-6;
const SATURATION_TOL: f64 = 1e-6;

enum Verdict {
    Pass(String),
    Fail(String),
    /// Criterion is inactive until its inputs exist; see the message.
    Deferred(String),
}

fn timed(limit: Duration, start: Instant, detail: String, ok: bool) -> Verdict {
    let elapsed = start.elapsed();
    let detail = format!("{detail}; {:.3}s (limit {:.0}s)", elapsed.as_secs_f64(), limit.as_secs_f64());
    if ok && elapsed <= limit {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

/// Random cycle over two or three baths with mixed constant/linear/sampled
/// strokes, isolated quenches between them, and every Γτ_s in [0.05, 10].
fn random_multibath_cycle(rng: &mut ChaCha8Rng, n_baths: usize) -> Cycle {
    let labels = ["a", "b", "c"];
    let baths: Vec<Bath> = (0..n_baths)
        .map(|i| {
            Bath::new(labels[i], rng.gen_range(0.3..4.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.2..5.0)).unwrap()
        })
        .collect();
    let mut strokes = Vec::new();
    let first = rng.gen_range(-1.0..4.0);
    let mut level = first;
    for bath in &baths {
        let gamma_tau: f64 = rng.gen_range(0.05..10.0);
        let tau = gamma_tau / bath.coupling;
        let start: f64 = rng.gen_range(-1.0..4.0);
        strokes.push(Stroke::isolated(Protocol::quench(level, start).unwrap()));
        let protocol = match rng.gen_range(0..3) {
            0 => Protocol::constant(start, tau).unwrap(),
            1 => Protocol::linear(start, rng.gen_range(-1.0..4.0), tau).unwrap(),
            _ => Protocol::sampled(vec![
                (0.0, start),
                (0.5 * tau, rng.gen_range(-1.0..4.0)),
                (tau, rng.gen_range(-1.0..4.0)),
            ])
            .unwrap(),
        };
        level = protocol.end_level();
        strokes.push(Stroke::coupled(protocol, bath.label.clone()));
    }
    strokes.push(Stroke::isolated(Protocol::quench(level, first).unwrap()));
    Cycle::new(baths, strokes).unwrap()
}

fn random_grid() -> Vec<CycleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..120)
        .map(|i| {
            let cycle = random_multibath_cycle(&mut rng, 2 + i % 2);
            run_to_limit_cycle(&cycle, rng.gen_range(0.0..1.0), &LimitCycleConfig::default()).unwrap()
        })
        .collect()
}

fn criterion_1(grid: &[CycleReport], start: Instant) -> Verdict {
    let worst = grid.iter().map(|r| r.first_law_residual().abs() / r.heat_scale()).fold(0.0, f64::max);
    let ok = grid.len() >= 100 && worst <= FIRST_LAW_TOL;
    timed(
        Duration::from_secs(10),
        start,
        format!(
            "{} random 2/3-bath cycles, worst |W+W_chem-ΣQ|/max(1,Σ|Q|) = {worst:.2e} (tol {FIRST_LAW_TOL:e})",
            grid.len()
        ),
        ok,
    )
}

fn criterion_2(grid: &[CycleReport]) -> Verdict {
    let min = grid.iter().map(|r| r.entropy_production).fold(f64::INFINITY, f64::min);
    let negative = grid.iter().filter(|r| r.entropy_production < -SECOND_LAW_TOL).count();
    let not_strict = grid.iter().filter(|r| r.entropy_production <= STRICT_PRODUCTION).count();
    let ok = negative == 0 && not_strict == 0;
    let detail = format!(
        "min Σ_irr = {min:.3e} over {} finite-time runs with Γτ_s ≤ 10; {negative} below -{SECOND_LAW_TOL:e}, \
         {not_strict} not above {STRICT_PRODUCTION:e}",
        grid.len()
    );
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let bath = Bath::new("b", 0.8, 0.25, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let gamma_tau = 10f64.powf(-3.0 + 6.0 * k as f64 / 49.0);
        let protocol = Protocol::constant(1.1, gamma_tau).unwrap();
        for p0 in [0.0, 0.4, 1.0] {
            let rk4 = propagate_stroke(p0, &protocol, Some(&bath), &IntegratorConfig::default()).unwrap();
            worst = worst.max((rk4.final_occupation - relax_constant(p0, 1.1, &bath, gamma_tau)).abs());
        }
    }
    timed(
        Duration::from_secs(1),
        start,
        format!("50-point log grid Γτ_s ∈ [1e-3, 1e3], max |RK4 - closed form| = {worst:.2e} (tol {PROPAGATOR_TOL:e})"),
        worst <= PROPAGATOR_TOL,
    )
}

fn otto(t_hot: f64, t_cold: f64, e_hot: f64, e_cold: f64, gamma_tau: f64) -> Cycle {
    Cycle::new(
        vec![Bath::new("hot", t_hot, 0.0, 1.0).unwrap(), Bath::new("cold", t_cold, 0.0, 1.0).unwrap()],
        vec![
            Stroke::isolated(Protocol::quench(e_cold, e_hot).unwrap()),
            Stroke::coupled(Protocol::constant(e_hot, gamma_tau).unwrap(), "hot"),
            Stroke::isolated(Protocol::quench(e_hot, e_cold).unwrap()),
            Stroke::coupled(Protocol::constant(e_cold, gamma_tau).unwrap(), "cold"),
        ],
    )
    .unwrap()
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    // Two-point fixed-point oracle at 30 digits: Δp = (f_h − f_c)(1 − x)/(1 + x), x = e^{−1},
    // Q_h = ε_h Δp, Σ_irr = −Q_h/T_h + ε_c Δp/T_c.
    const Q_HOT: f64 = 0.087_648_747_033_342_14;
    const SIGMA: f64 = 0.014_608_124_505_557_024;
    let mut worst_eta: f64 = 0.0;
    let mut at_one = None;
    for gamma_tau in [0.1, 1.0, 10.0, 100.0] {
        let r = run_to_limit_cycle(&otto(2.0, 1.0, 3.0, 2.0, gamma_tau), 0.5, &LimitCycleConfig::default()).unwrap();
        worst_eta = worst_eta.max(r.efficiency.map_or(f64::INFINITY, |e| (e - 1.0 / 3.0).abs()));
        if gamma_tau == 1.0 {
            at_one = Some(r);
        }
    }
    let r = at_one.unwrap();
    let q_gap = (r.heat_of("hot").unwrap() - Q_HOT).abs();
    let s_gap = (r.entropy_production - SIGMA).abs();
    timed(
        Duration::from_secs(1),
        start,
        format!(
            "max |η - 1/3| = {worst_eta:.1e}; Q_h = {:.9} (|Δ| {q_gap:.1e}); Σ_irr = {:.9} (|Δ| {s_gap:.1e})",
            r.heat_of("hot").unwrap(),
            r.entropy_production
        ),
        worst_eta <= OTTO_ETA_TOL && q_gap <= OTTO_LEDGER_TOL && s_gap <= OTTO_LEDGER_TOL,
    )
}

fn random_two_bath_cycle(rng: &mut ChaCha8Rng) -> Cycle {
    let t_hot = rng.gen_range(0.5..5.0);
    let t_cold = rng.gen_range(0.05..1.0) * t_hot;
    let mu = rng.gen_range(-1.0..1.0);
    let e: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..5.0)).collect();
    let hot = Bath::new("hot", t_hot, mu, rng.gen_range(0.2..5.0)).unwrap();
    let cold = Bath::new("cold", t_cold, mu, rng.gen_range(0.2..5.0)).unwrap();
    let (tau_h, tau_c) = (rng.gen_range(0.05..8.0) / hot.coupling, rng.gen_range(0.05..8.0) / cold.coupling);
    Cycle::new(
        vec![hot, cold],
        vec![
            Stroke::coupled(Protocol::linear(e[0], e[1], tau_h).unwrap(), "hot"),
            Stroke::isolated(Protocol::quench(e[1], e[2]).unwrap()),
            Stroke::coupled(Protocol::linear(e[2], e[3], tau_c).unwrap(), "cold"),
            Stroke::isolated(Protocol::quench(e[3], e[0]).unwrap()),
        ],
    )
    .unwrap()
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut exceptions = 0;
    let mut engines = 0;
    let mut closest = f64::INFINITY;
    for _ in 0..1000 {
        let r = run_to_limit_cycle(&random_two_bath_cycle(&mut rng), 0.5, &LimitCycleConfig::default()).unwrap();
        if let Some(eta) = r.efficiency {
            engines += 1;
            let (lo, hi) = r.temperature_range();
            let carnot = carnot_bound(hi, lo).unwrap();
            closest = closest.min(carnot - eta);
            if eta > carnot + BOUND_TOL {
                exceptions += 1;
            }
        }
    }
    // Quasistatic Otto approaching ε_c/ε_h = T_c/T_h = 1/2 from the engine side.
    let mut approach = Vec::new();
    for delta in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        let r =
            run_to_limit_cycle(&otto(2.0, 1.0, 4.0 - delta, 2.0, 1.0), 0.5, &LimitCycleConfig::quasistatic()).unwrap();
        approach.push((delta, r.efficiency, r.work));
    }
    let at_point = run_to_limit_cycle(&otto(2.0, 1.0, 4.0, 2.0, 1.0), 0.5, &LimitCycleConfig::quasistatic()).unwrap();
    let (delta, eta, work) = *approach.last().unwrap();
    let gap = eta.map_or(f64::INFINITY, |e| 0.5 - e);
    let ok = exceptions == 0
        && engines > 50
        && gap <= REVERSIBLE_GAP_TOL
        && work <= REVERSIBLE_WORK_TOL
        && at_point.work.abs() <= REVERSIBLE_WORK_TOL;
    let detail = format!(
        "{engines} engines in 1000 two-bath cycles, {exceptions} with η > η_C + 1e-9 (min η_C - η = {closest:.2e}); \
         quasistatic ε_h = 4 - {delta:e}: η_C - η = {gap:.2e}, W_net = {work:.2e}; at ε_h = 4: W_net = {:.1e}",
        at_point.work
    );
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

/// Occupation whose binary entropy is `target`, for levels with x = ε/T > 0.
fn level_for_entropy(target: f64) -> f64 {
    let entropy = |x: f64| occupation_entropy(1.0 / (x.exp() + 1.0));
    let (mut lo, mut hi) = (1e-9, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // Entropy decreases with x on x > 0.
        if entropy(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Reversible cycle absorbing heat in ratio 8 : 2 at T = 4, 2 and rejecting 3 at T = 1.
fn clausius_completion_cycle() -> Cycle {
    let entropy = |x: f64| occupation_entropy(1.0 / (x.exp() + 1.0));
    let x0 = 3.0;
    let x2 = 0.5;
    let c = (entropy(x2) - entropy(x0)) / 3.0;
    let x1 = level_for_entropy(entropy(x0) + 2.0 * c);
    let baths = vec![
        Bath::new("T4", 4.0, 0.0, 1.0).unwrap(),
        Bath::new("T2", 2.0, 0.0, 1.0).unwrap(),
        Bath::new("T1", 1.0, 0.0, 1.0).unwrap(),
    ];
    Cycle::new(
        baths,
        vec![
            Stroke::coupled(Protocol::linear(4.0 * x0, 4.0 * x1, 1.0).unwrap(), "T4"),
            Stroke::isolated(Protocol::quench(4.0 * x1, 2.0 * x1).unwrap()),
            Stroke::coupled(Protocol::linear(2.0 * x1, 2.0 * x2, 1.0).unwrap(), "T2"),
            Stroke::isolated(Protocol::quench(2.0 * x2, x2).unwrap()),
            Stroke::coupled(Protocol::linear(x2, x0, 1.0).unwrap(), "T1"),
            Stroke::isolated(Protocol::quench(x0, 4.0 * x0).unwrap()),
        ],
    )
    .unwrap()
}

fn criterion_6() -> Verdict {
    let profile = HeatProfile::from_pairs(&[(4.0, 8.0), (2.0, 2.0), (1.0, -3.0)]).unwrap();
    let bound = clausius_multibath_bound(&profile).unwrap();
    let r = run_to_limit_cycle(&clausius_completion_cycle(), 0.5, &LimitCycleConfig::quasistatic()).unwrap();
    let eta = r.efficiency.unwrap_or(f64::NAN);
    let carnot = carnot_bound(4.0, 1.0).unwrap();
    let realized = clausius_multibath_bound(&HeatProfile::from_report(&r).unwrap()).unwrap();
    let ratio =
        (r.heat_of("T4").unwrap() / r.heat_of("T2").unwrap(), r.heat_of("T1").unwrap() / r.heat_of("T2").unwrap());
    let ok = (bound - 0.7).abs() <= 1e-15
        && (eta - 0.7).abs() <= MULTIBATH_TOL
        && (realized - 0.7).abs() <= MULTIBATH_TOL
        && eta < carnot
        && r.entropy_production.abs() <= 1e-10;
    let detail = format!(
        "bound{{(4,+8),(2,+2),T_min=1}} = {bound}; reversible 3-bath cycle η = {eta:.10} (heat ratios {:.6}:1:{:.6}, Σ_irr {:.1e}) < η_C = {carnot}",
        ratio.0, ratio.1, r.entropy_production
    );
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_7() -> Verdict {
    // Finite-time sweep grid: Otto duration and spacing axes plus the random two-bath set.
    let mut runs = Vec::new();
    for gamma_tau in [0.1, 0.3, 1.0, 3.0, 10.0, 30.0] {
        for e_hot in [2.5, 3.0, 3.5] {
            runs.push(otto(2.0, 1.0, e_hot, 2.0, gamma_tau));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    runs.extend((0..40).map(|_| random_two_bath_cycle(&mut rng)));

    let mut transcribed = 0;
    let mut violations = 0;
    let mut best_gap = f64::INFINITY;
    for cycle in &runs {
        let (r, trace) = run_to_limit_cycle_with_trace(cycle, 0.5, &LimitCycleConfig::default()).unwrap();
        let info = match info_theoretic_bound(&trace) {
            Ok(v) => v,
            Err(e) => return Verdict::Fail(format!("trace rejected: {e}")),
        };
        let certified = certify(&r, Some(&trace));
        if certified.info != info {
            return Verdict::Fail("certify did not carry the information bound through".into());
        }
        if let (BoundValue::Value(bound), Some(eta)) = (info, r.efficiency) {
            transcribed += 1;
            if eta > bound + BOUND_TOL {
                violations += 1;
            }
            best_gap = best_gap.min(bound - eta);
        }
    }

    // Two-bath reversible limit: quasistatic Otto next to the Carnot point.
    let (rev, rev_trace) =
        run_to_limit_cycle_with_trace(&otto(2.0, 1.0, 4.0 - 1e-4, 2.0, 1.0), 0.5, &LimitCycleConfig::quasistatic())
            .unwrap();
    let rev_info = info_theoretic_bound(&rev_trace).ok().and_then(|v| v.value());
    let profile = HeatProfile::from_pairs(&[(2.0, 1.0), (1.0, -0.5)]).unwrap();
    let generalized = generalized_carnot_bound(&profile).ok().and_then(|v| v.value());

    if transcribed == 0 && rev_info.is_none() && generalized.is_none() {
        return Verdict::Deferred(format!(
            "information-theoretic and generalized Carnot bounds are not transcribed; {} grid traces validated \
             and NotTranscribed propagated through certify",
            runs.len()
        ));
    }
    let carnot = 0.5;
    let rev_ok = rev_info.is_some_and(|b| (b - carnot).abs() <= 1e-3)
        && generalized.is_some_and(|g| (g - carnot).abs() <= BOUND_TOL);
    let ok = violations == 0 && rev_ok && best_gap <= SATURATION_TOL;
    let detail = format!(
        "{transcribed} transcribed points, {violations} with η > η_info + 1e-9; reversible η_info = {rev_info:?} vs η_C = {carnot}; \
         generalized two-bath = {generalized:?}; min η_info - η = {best_gap:.2e} (saturation tol {SATURATION_TOL:e}), η_C = {}",
        rev.efficiency.map_or(f64::NAN, |_| carnot)
    );
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_8() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_fermi-engine");
    let dir = tempfile::tempdir().unwrap();
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/otto_duration_sweep.json");
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("sweep{i}.csv"));
        let status = Command::new(bin)
            .args(["sweep", "--config", config, "--out"])
            .arg(&out)
            .args(["--workers", workers])
            .status()
            .unwrap();
        if !status.success() {
            return Verdict::Fail(format!("sweep exited with {status}"));
        }
        outputs.push(std::fs::read(&out).unwrap());
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    let rows = outputs[0].iter().filter(|&&b| b == b'\n').count() - 1;
    let detail = format!(
        "3 sweep invocations (1, 4, 4 workers), {rows} rows, {} bytes each, identical = {identical}",
        outputs[0].len()
    );
    if identical {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn main() {
    let start = Instant::now();
    let grid = random_grid();
    let c1 = criterion_1(&grid, start);
    let verdicts = [
        ("1 first-law closure", c1),
        ("2 second law", criterion_2(&grid)),
        ("3 propagator equivalence", criterion_3()),
        ("4 Otto physics", criterion_4()),
        ("5 Carnot consistency", criterion_5()),
        ("6 multi-bath bound", criterion_6()),
        ("7 information bound", criterion_7()),
        ("8 determinism", criterion_8()),
    ];
    let mut failed = 0;
    println!();
    for (name, verdict) in &verdicts {
        match verdict {
            Verdict::Pass(d) => println!("PASS     criterion {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("FAIL     criterion {name}: {d}");
            }
            Verdict::Deferred(d) => println!("DEFERRED criterion {name}: {d}"),
        }
    }
    println!();
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all active criteria passed");
}
