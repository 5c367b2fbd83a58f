//! Acceptance checks, one PASS/FAIL line each.
//!
//! `cargo test --test acceptance` runs the default set; pass `--extended`
//! (after `--`) or set `ABCD_EXTENDED=1` to add the long runs and the
//! finest convergence meshes. The process fails only on a FAIL that is not
//! listed in `KNOWN_DEVIATIONS`.

use std::time::{Duration, Instant};

use abcd_cli::commands::convergence_parallel;
use abcd_cli::suite::{identity_suite, solver_suite, DEFAULT_SEED};
use abcd_core::exact::cell_average_initial;
use abcd_core::experiments::{
    assemble_collision, consistency_residual, run_linear_conservation, run_longtime, run_tracked, CollisionSetup,
    ConvergenceSetup, LadderDt, LongtimeSetup,
};
use abcd_core::presets::{lookup, Preset, CONVERGENCE_CELLS, EXTENDED_CONVERGENCE_CELLS};
use abcd_core::{DtPolicy, Grid};

/// Criteria that fail for documented reasons; they are reported but do not fail the run.
const KNOWN_DEVIATIONS: [u32; 2] = [5, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { pass, detail })
}

fn preset(name: &str) -> Preset {
    lookup(name).unwrap_or_else(|| panic!("missing preset {name}"))
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn fmt_rates(r: &[f64]) -> String {
    r.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
}

fn identities() -> Result<Outcome, String> {
    let rep = identity_suite(200, &[8, 64, 1024], DEFAULT_SEED).map_err(|e| e.to_string())?;
    let worst_id = rep.identities.iter().map(|l| l.worst).fold(0.0, f64::max);
    let failed: Vec<&str> = rep.lines().filter(|l| !l.passed()).map(|l| l.name).collect();
    outcome(
        rep.passed(),
        format!("worst identity residual {worst_id:.2e}, failures: [{}]", failed.join(", ")),
    )
}

fn solvers() -> Result<Outcome, String> {
    let rep = solver_suite(50, 64, DEFAULT_SEED).map_err(|e| e.to_string())?;
    outcome(
        rep.worst_helmholtz <= 1e-10 && rep.worst_coupled <= 1e-10,
        format!(
            "{} systems, worst helmholtz {:.2e}, worst coupled {:.2e}",
            rep.systems, rep.worst_helmholtz, rep.worst_coupled
        ),
    )
}

fn linear_energy() -> Result<Outcome, String> {
    let p = preset("linear");
    let grid = p.grid().map_err(|e| e.to_string())?;
    let init = cell_average_initial(&p.spec(), &grid, &Default::default());
    let dt = match p.scheme.dt_policy {
        DtPolicy::Fixed(dt) => dt,
        _ => return Err("linear preset needs a fixed step".into()),
    };
    let drift = run_linear_conservation(p.params(), 0.5, &init, dt, p.t_final).map_err(|e| e.to_string())?;
    outcome(drift <= 1e-9, format!("relative energy drift {drift:.3e}"))
}

fn ladder(case: &str, dt: LadderDt, cells: &[usize]) -> Result<Vec<f64>, String> {
    let mut setup = ConvergenceSetup::from_preset(&preset(case));
    setup.dt = dt;
    let rep = convergence_parallel(&setup, cells).map_err(|e| e.to_string())?;
    Ok(rep.rows.iter().skip(1).map(|r| r.rate.unwrap_or(f64::NAN)).collect())
}

fn rates_ok(rates: &[f64], lo: f64, hi: f64) -> bool {
    !rates.is_empty() && rates.iter().all(|r| within(*r, lo, hi))
}

fn convergence_a(extended: bool) -> Result<Outcome, String> {
    let cells: &[usize] = if extended { &EXTENDED_CONVERGENCE_CELLS } else { &CONVERGENCE_CELLS };
    let rates = ladder("A", LadderDt::Adaptive, cells)?;
    let last = *rates.last().unwrap_or(&f64::NAN);
    outcome(
        rates_ok(&rates, 0.95, 1.20) && within(last, 0.98, 1.10),
        format!("rates [{}]", fmt_rates(&rates)),
    )
}

fn second_order_a() -> Result<Outcome, String> {
    // dx = 1/4 .. 1/32 on [0, 40]
    let rates = ladder("A", LadderDt::DxSquared, &[160, 320, 640, 1280])?;
    outcome(rates_ok(&rates, 1.85, 2.15), format!("rates [{}] (nan: row next to a blow-up)", fmt_rates(&rates)))
}

fn convergence_e(extended: bool) -> Result<Outcome, String> {
    let cells: &[usize] = if extended { &EXTENDED_CONVERGENCE_CELLS } else { &CONVERGENCE_CELLS };
    let rates = ladder("E", LadderDt::Adaptive, cells)?;
    outcome(rates_ok(&rates, 0.90, 1.05), format!("rates [{}]", fmt_rates(&rates)))
}

fn consistency_ratios(case: &str, dt: LadderDt, cells: &[usize]) -> Result<Vec<(f64, f64)>, String> {
    let p = preset(case);
    let mut prev: Option<(f64, f64)> = None;
    let mut ratios = Vec::new();
    for &n in cells {
        let grid = Grid::with_origin(p.origin, p.length, n).map_err(|e| e.to_string())?;
        let policy = dt.policy(grid.dx());
        let step = match policy {
            DtPolicy::Fixed(s) => s,
            _ => return Err("consistency needs a fixed step".into()),
        };
        let scheme = p.scheme.with_dt(policy);
        let (e1, e2) =
            consistency_residual(&p.spec(), &grid, scheme, step, &Default::default()).map_err(|e| e.to_string())?;
        if let Some((p1, p2)) = prev {
            ratios.push((p1 / e1, p2 / e2));
        }
        prev = Some((e1, e2));
    }
    Ok(ratios)
}

fn consistency() -> Result<Outcome, String> {
    let cells = [320, 640, 1280];
    let c = consistency_ratios("C", LadderDt::DxSquared, &cells)?;
    let e = consistency_ratios("E", LadderDt::Dx, &cells)?;
    let ok = c.iter().all(|(a, b)| within(*a, 3.2, 4.8) && within(*b, 3.2, 4.8))
        && e.iter().all(|(a, b)| within(*a, 1.6, 2.4) && within(*b, 1.6, 2.4));
    let show = |v: &[(f64, f64)]| v.iter().map(|(a, b)| format!("{a:.3}/{b:.3}")).collect::<Vec<_>>().join(", ");
    outcome(ok, format!("C (dt = dx^2): {}; E (dt = dx): {}", show(&c), show(&e)))
}

fn blow_up_g() -> Result<Outcome, String> {
    let setup = CollisionSetup::from_preset(&preset("G")).map_err(|e| e.to_string())?;
    let run = run_tracked(&setup, &setup.spec).map_err(|e| e.to_string())?;
    match run.blow_up {
        Some(b) => outcome(within(b.t, 4.0, 5.0), format!("blow-up at t = {:.4}", b.t)),
        None => outcome(false, "no blow-up".into()),
    }
}

fn collision_j() -> Result<Outcome, String> {
    let setup = CollisionSetup::from_preset(&preset("J")).map_err(|e| e.to_string())?;
    let run = run_tracked(&setup, &setup.spec).map_err(|e| e.to_string())?;
    let s = assemble_collision(&setup, run, None, None).summary;
    match (s.collision_time, s.peak_excess) {
        (Some(tc), Some(ex)) => outcome(
            (tc - 54.88).abs() <= 0.02 * 54.88 && within(ex, 0.08, 0.13),
            format!("collision time {tc:.4}, peak excess {:.3} %", 100.0 * ex),
        ),
        _ => outcome(false, format!("no collision detected ({s:?})")),
    }
}

fn longtime_f() -> Result<Outcome, String> {
    let setup = LongtimeSetup::from_preset(&preset("longtime-F")).map_err(|e| e.to_string())?;
    let rep = run_longtime(&setup).map_err(|e| e.to_string())?;
    let (Some(eta), Some(u)) = (rep.eta, rep.u) else {
        return outcome(false, "crest not tracked".into());
    };
    let pos = 100.0 * eta.position_error;
    let amp = 100.0 * u.amplitude_error;
    outcome(
        (pos - 1.79).abs() <= 0.5 && (amp - 3.26).abs() <= 0.7,
        format!("eta position error {pos:.4} %, u amplitude error {amp:.4} %"),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let extended = args.iter().any(|a| a == "--extended")
        || std::env::var("ABCD_EXTENDED").map_or(false, |v| !v.is_empty() && v != "0");
    // libtest-style filters and flags are ignored
    type Check = Box<dyn Fn() -> Result<Outcome, String>>;
    let mut checks: Vec<(u32, &str, Duration, Check)> = vec![
        (1, "operator identities", Duration::from_secs(5), Box::new(identities)),
        (2, "solver oracle", Duration::from_secs(5), Box::new(solvers)),
        (3, "linear energy conservation", Duration::from_secs(30), Box::new(linear_energy)),
        (4, "convergence rates, case A", Duration::from_secs(120), Box::new(move || convergence_a(extended))),
        (5, "second-order rates, case A", Duration::from_secs(120), Box::new(second_order_a)),
        (6, "convergence rates, case E", Duration::from_secs(120), Box::new(move || convergence_e(extended))),
        (10, "consistency order", Duration::from_secs(30), Box::new(consistency)),
    ];
    if extended {
        checks.push((7, "blow-up, case G", Duration::from_secs(300), Box::new(blow_up_g)));
        checks.push((8, "collision, case J", Duration::from_secs(600), Box::new(collision_j)));
        checks.push((9, "long-time fidelity, case F", Duration::from_secs(600), Box::new(longtime_f)));
    }
    checks.sort_by_key(|c| c.0);

    let mut unexpected = 0;
    for (id, name, budget, check) in &checks {
        let start = Instant::now();
        let res = check();
        let took = start.elapsed();
        let (pass, detail) = match res {
            Ok(o) => (o.pass && took <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let slow = if took > *budget { " (over time budget)" } else { "" };
        let known = !pass && KNOWN_DEVIATIONS.contains(id);
        println!(
            "{} #{id} {name}: {detail} [{:.1} s / {} s]{slow}{}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            if known { " (known deviation)" } else { "" }
        );
        if !pass && !known {
            unexpected += 1;
        }
    }
    if !extended {
        println!("skipped #7, #8, #9 (run with --extended or ABCD_EXTENDED=1)");
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
