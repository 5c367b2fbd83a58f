//! The subcommands. Each returns its exit code or an error (exit code 1).

use std::path::{Path, PathBuf};
use std::time::Instant;

use abcd_core::exact::cell_average_initial;
use abcd_core::experiments::{
    assemble_collision, assemble_report, check_ladder, consistency_residual, run_convergence_row, run_linear_conservation,
    run_longtime, run_tracked, CollisionSetup, ConvergenceReport, ConvergenceSetup, CrestErrors, LadderDt, LongtimeSetup,
};
use abcd_core::{energy_error, DtPolicy, EnergyKind, Error, Regime, SimState, Stepper};
use serde_json::{json, Map, Value};

use crate::config::{parse_ladder, parse_sizes, resolve, DtSetting, Resolved, RunConfig};
use crate::error::CliError;
use crate::output::{
    write_convergence_csv, write_json_summary, write_peak_csv, write_snapshots_csv, write_table_csv, write_track_csv,
    FieldSnapshot, JsonSummary,
};
use crate::suite::{identity_suite, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_SIZES};

pub fn dispatch(name: &str, cfg: &RunConfig) -> Result<i32, CliError> {
    match name {
        "simulate" => simulate(cfg),
        "converge" => converge(cfg),
        "collide" => collide(cfg),
        "longtime" => longtime(cfg),
        "linear-energy" => linear_energy(cfg),
        "consistency" => consistency(cfg),
        "identities" => identities(cfg),
        other => Err(CliError::Config(format!("unknown subcommand '{other}'"))),
    }
}

struct Output {
    dir: PathBuf,
    prefix: String,
}

impl Output {
    fn new(cfg: &RunConfig, prefix: &str) -> Self {
        Self {
            dir: cfg.output_dir(),
            prefix: prefix.to_string(),
        }
    }

    fn path(&self, kind: &str) -> PathBuf {
        self.dir.join(format!("{}-{kind}", self.prefix))
    }
}

fn run_info(r: &Resolved) -> Value {
    let (a, b, c, d) = r.params.as_tuple();
    json!({
        "case": r.preset.name,
        "family": r.preset.family.name(),
        "abcd": [a, b, c, d],
        "regime": r.params.regime().name(),
        "origin": r.grid.origin(),
        "length": r.grid.length(),
        "cells": r.grid.cells(),
        "dx": r.grid.dx(),
        "t_final": r.t_final,
        "theta": r.scheme.theta,
        "dt_policy": format!("{:?}", r.scheme.dt_policy),
        "rusanov": format!("{:?}", r.scheme.rusanov),
    })
}

fn summary(command: &str, cfg: &RunConfig, started: Instant, diagnostics: Value, path: &Path) -> Result<(), CliError> {
    let diagnostics = match diagnostics {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    let s = JsonSummary {
        command: command.to_string(),
        config: cfg.clone(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        diagnostics,
    };
    write_json_summary(&s, path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn due(t_final: f64, k: usize, n: usize) -> f64 {
    t_final * k as f64 / n as f64
}

fn simulate(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let r = resolve(cfg, "A")?;
    let out = Output::new(cfg, r.preset.name);
    let stepper = Stepper::new(r.params, r.scheme, r.grid)?;
    let mut state = cell_average_initial(&r.spec, &r.grid, &r.quadrature);
    let n = r.snapshots;
    let eps = 1e-9 * r.t_final.max(1.0);
    let mut snaps = vec![FieldSnapshot::from_state(&state)];
    let mut next = 1usize;
    let res = stepper.march_with(&mut state, r.t_final, |s| {
        if r.every_step {
            snaps.push(FieldSnapshot::from_state(s));
        } else if n > 0 && next <= n && s.t >= due(r.t_final, next, n) - eps {
            snaps.push(FieldSnapshot::from_state(s));
            while next <= n && due(r.t_final, next, n) <= s.t + eps {
                next += 1;
            }
        }
        true
    });
    let blow_up = match res {
        Ok(()) => None,
        Err(Error::BlowUp { t, quantity, value }) => {
            if snaps.last().map_or(true, |s| s.t != state.t) {
                snaps.push(FieldSnapshot::from_state(&state));
            }
            Some((t, quantity, value))
        }
        Err(e) => return Err(e.into()),
    };
    let snap_path = out.path("snapshots.csv");
    write_snapshots_csv(&snaps, &snap_path)?;
    println!("wrote {}", snap_path.display());

    let energy_err = if blow_up.is_none() && !r.preset.family.is_collision() {
        let reference = abcd_core::exact::reference_state(&r.spec, &r.grid, state.t, &r.quadrature);
        energy_error(EnergyKind::General, &r.params, &state, &reference).ok()
    } else {
        None
    };
    let diag = json!({
        "run": run_info(&r),
        "final_time": state.t,
        "steps": state.step_index,
        "max_abs_eta": state.eta.linf_norm(),
        "max_abs_u": state.u.linf_norm(),
        "energy_error": energy_err,
        "snapshots": snaps.len(),
        "blow_up": blow_up.map(|(t, q, v)| json!({"t": t, "quantity": q, "value": v})),
    });
    summary("simulate", cfg, started, diag, &out.path("summary.json"))?;
    println!("steps = {}, t = {}", state.step_index, state.t);
    if let Some(e) = energy_err {
        println!("energy error = {e:.6e}");
    }
    match blow_up {
        Some((t, ..)) => {
            println!("blow-up at t = {t}");
            Ok(2)
        }
        None => Ok(0),
    }
}

fn ladder_dt(cfg: &RunConfig, default: LadderDt) -> Result<LadderDt, CliError> {
    Ok(match &cfg.dt {
        None => default,
        Some(DtSetting::Number(v)) => LadderDt::Fixed(*v),
        Some(DtSetting::Text(t)) => match t.trim().to_ascii_lowercase().as_str() {
            "adaptive" => LadderDt::Adaptive,
            "dx" => LadderDt::Dx,
            "dx2" => LadderDt::DxSquared,
            other => LadderDt::Fixed(crate::config::parse_number(other)?),
        },
    })
}

fn ladder(cfg: &RunConfig, first: usize, rows: usize) -> Result<Vec<usize>, CliError> {
    match &cfg.ladder {
        Some(s) => parse_ladder(s),
        None => {
            let cells: Vec<usize> = (0..rows).map(|k| first << k).collect();
            check_ladder(&cells)?;
            Ok(cells)
        }
    }
}

/// Rows solved concurrently, assembled in ladder order.
pub fn convergence_parallel(setup: &ConvergenceSetup, cells: &[usize]) -> Result<ConvergenceReport, CliError> {
    check_ladder(cells)?;
    let rows = std::thread::scope(|s| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&n| s.spawn(move || run_convergence_row(setup, n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ladder row panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(assemble_report(setup, rows)?)
}

fn converge(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let r = resolve(cfg, "A")?;
    if r.preset.family.is_collision() {
        return Err(CliError::Config("converge needs a single-wave case (A..F)".into()));
    }
    let out = Output::new(cfg, r.preset.name);
    let mut setup = ConvergenceSetup::from_preset(&r.preset);
    setup.quadrature = r.quadrature;
    setup.dt = ladder_dt(cfg, LadderDt::Adaptive)?;
    let cells = ladder(cfg, r.grid.cells(), 4)?;
    let report = convergence_parallel(&setup, &cells)?;

    println!("{:>8} {:>14} {:>24} {:>10}", "J", "dx", "error", "rate");
    for row in &report.rows {
        let err = match row.outcome {
            abcd_core::experiments::RowOutcome::Error(e) => format!("{e:.6e}"),
            abcd_core::experiments::RowOutcome::BlowUp { t } => format!("blow-up at t = {t:.4}"),
        };
        let rate = row.rate.map(|v| format!("{v:.5}")).unwrap_or_default();
        println!("{:>8} {:>14.6e} {:>24} {:>10}", row.cells, row.dx, err, rate);
    }
    let path = out.path("convergence.csv");
    write_convergence_csv(&report, &path)?;
    println!("wrote {}", path.display());
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|row| {
            json!({
                "cells": row.cells,
                "dx": row.dx,
                "error": row.error(),
                "blow_up_t": match row.outcome {
                    abcd_core::experiments::RowOutcome::BlowUp { t } => Some(t),
                    _ => None,
                },
                "rate": row.rate,
                "steps": row.steps,
            })
        })
        .collect();
    let diag = json!({
        "run": run_info(&r),
        "ladder_dt": setup.dt.label(),
        "energy": setup.energy.name(),
        "rows": rows,
    });
    summary("converge", cfg, started, diag, &out.path("summary.json"))?;
    Ok(0)
}

fn collide(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let r = resolve(cfg, "J")?;
    if !r.preset.family.is_collision() {
        return Err(CliError::Config("collide needs a collision case (G, H, I, I-long, J)".into()));
    }
    let out = Output::new(cfg, r.preset.name);
    let setup = CollisionSetup {
        spec: r.spec,
        grid: r.grid,
        scheme: r.scheme,
        t_final: r.t_final,
        quadrature: r.quadrature,
        snapshots: r.snapshots,
    };
    let specs = [setup.spec, setup.spec.solo(1.0), setup.spec.solo(-1.0)];
    let (main, right, left) = std::thread::scope(|s| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| {
                let setup = &setup;
                s.spawn(move || run_tracked(setup, spec))
            })
            .collect();
        let mut res = handles.into_iter().map(|h| h.join().expect("collision run panicked"));
        (res.next().unwrap(), res.next().unwrap(), res.next().unwrap())
    });
    let (right, left) = (right?, left?);
    let outcome = assemble_collision(&setup, main?, Some(&right), Some(&left));
    let sm = outcome.summary;

    for (w, name) in [(0, "right"), (1, "left")] {
        let p = out.path(&format!("track-{name}.csv"));
        write_track_csv(&outcome.tracks[w], &p)?;
        println!("wrote {}", p.display());
    }
    let p = out.path("peak.csv");
    write_peak_csv(&outcome.run.peak, &p)?;
    println!("wrote {}", p.display());
    let snaps: Vec<FieldSnapshot> = outcome.run.snapshots.iter().map(FieldSnapshot::from_state).collect();
    let p = out.path("snapshots.csv");
    write_snapshots_csv(&snaps, &p)?;
    println!("wrote {}", p.display());

    let diag = json!({
        "run": run_info(&r),
        "collision_time": sm.collision_time,
        "peak_amplitude": sm.peak_amplitude,
        "peak_excess": sm.peak_excess,
        "pre_amplitudes": sm.pre_amplitudes,
        "post_amplitudes": sm.post_amplitudes,
        "phase_shifts": sm.phase_shifts,
        "velocity_errors": sm.velocity_errors,
        "blow_up": sm.blow_up.map(|b| json!({"t": b.t, "quantity": b.quantity, "value": b.value})),
    });
    summary("collide", cfg, started, diag, &out.path("summary.json"))?;
    let show = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
    println!("collision time = {}", show(sm.collision_time));
    println!("peak amplitude = {:.6}", sm.peak_amplitude);
    println!("peak excess = {}", show(sm.peak_excess.map(|e| 100.0 * e)) + " %");
    println!("phase shifts = {} / {}", show(sm.phase_shifts[0]), show(sm.phase_shifts[1]));
    if let Some(b) = sm.blow_up {
        println!("blow-up at t = {}", b.t);
    }
    Ok(0)
}

fn crest_json(e: &Option<CrestErrors>) -> Value {
    match e {
        Some(e) => json!({
            "position": e.position,
            "exact_position": e.exact_position,
            "position_error": e.position_error,
            "amplitude": e.amplitude,
            "exact_amplitude": e.exact_amplitude,
            "amplitude_error": e.amplitude_error,
        }),
        None => Value::Null,
    }
}

fn longtime(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let r = resolve(cfg, "longtime-F")?;
    if r.preset.family.is_collision() {
        return Err(CliError::Config("longtime needs a single-wave case".into()));
    }
    let out = Output::new(cfg, r.preset.name);
    let setup = LongtimeSetup {
        spec: r.spec,
        grid: r.grid,
        scheme: r.scheme,
        t_final: r.t_final,
        quadrature: r.quadrature,
        snapshots: r.snapshots,
        tail_gap: (0.25 * r.grid.length()).min(20.0),
    };
    let rep = run_longtime(&setup)?;
    if let Some(tr) = &rep.eta_track {
        let p = out.path("track-eta.csv");
        write_track_csv(tr, &p)?;
        println!("wrote {}", p.display());
    }
    let p = out.path("track-u.csv");
    write_track_csv(&rep.u_track, &p)?;
    println!("wrote {}", p.display());
    let snaps: Vec<FieldSnapshot> = rep.snapshots.iter().map(FieldSnapshot::from_state).collect();
    let p = out.path("snapshots.csv");
    write_snapshots_csv(&snaps, &p)?;
    println!("wrote {}", p.display());

    for (name, e) in [("eta", &rep.eta), ("u", &rep.u)] {
        if let Some(e) = e {
            println!(
                "{name}: position {:.6} (exact {:.6}, error {:.4} %), amplitude {:.6} (exact {:.6}, error {:.4} %)",
                e.position,
                e.exact_position,
                100.0 * e.position_error,
                e.amplitude,
                e.exact_amplitude,
                100.0 * e.amplitude_error
            );
        }
    }
    if let Some(t) = rep.tail_amplitude {
        println!("tail amplitude = {t:.6e}");
    }
    let diag = json!({
        "run": run_info(&r),
        "final_time": rep.final_state.t,
        "steps": rep.final_state.step_index,
        "eta": crest_json(&rep.eta),
        "u": crest_json(&rep.u),
        "tail_amplitude": rep.tail_amplitude,
        "blow_up": rep.blow_up.map(|b| json!({"t": b.t, "quantity": b.quantity, "value": b.value})),
    });
    summary("longtime", cfg, started, diag, &out.path("summary.json"))?;
    if let Some(b) = rep.blow_up {
        println!("blow-up at t = {}", b.t);
    }
    Ok(0)
}

fn linear_energy(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let r = resolve(cfg, "linear")?;
    let dt = match r.scheme.dt_policy {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::AdaptiveCfl { .. } => {
            return Err(CliError::Config("linear-energy needs a fixed step; pass --dt <value>".into()))
        }
    };
    let out = Output::new(cfg, r.preset.name);
    let init: SimState = cell_average_initial(&r.spec, &r.grid, &r.quadrature);
    let drift = run_linear_conservation(r.params, r.scheme.theta, &init, dt, r.t_final)?;
    println!("relative energy drift = {drift:.6e}");
    let diag = json!({
        "run": run_info(&r),
        "dt": dt,
        "relative_energy_drift": drift,
    });
    summary("linear-energy", cfg, started, diag, &out.path("linear-energy.json"))?;
    Ok(0)
}

fn consistency(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let r = resolve(cfg, "C")?;
    if r.preset.family.is_collision() {
        return Err(CliError::Config("consistency needs a single-wave case (A..F)".into()));
    }
    let out = Output::new(cfg, r.preset.name);
    let default = if r.params.regime() == Regime::BothPositive {
        LadderDt::DxSquared
    } else {
        LadderDt::Dx
    };
    let rule = ladder_dt(cfg, default)?;
    let cells = ladder(cfg, r.grid.cells() / 2, 3)?;
    let mut table = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    println!("{:>8} {:>14} {:>14} {:>14} {:>14} {:>8} {:>8}", "J", "dx", "dt", "eps1", "eps2", "ratio1", "ratio2");
    for &n in &cells {
        let grid = abcd_core::Grid::with_origin(r.grid.origin(), r.grid.length(), n)?;
        let dt = match rule.policy(grid.dx()) {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::AdaptiveCfl { .. } => {
                return Err(CliError::Config("consistency needs --dt dx, dx2 or a number".into()))
            }
        };
        let mut scheme = r.scheme;
        scheme.dt_policy = DtPolicy::Fixed(dt);
        let (e1, e2) = consistency_residual(&r.spec, &grid, scheme, dt, &r.quadrature)?;
        let ratios = prev.map(|(p1, p2)| (p1 / e1, p2 / e2));
        let show = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
        println!(
            "{:>8} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>8} {:>8}",
            n,
            grid.dx(),
            dt,
            e1,
            e2,
            show(ratios.map(|r| r.0)),
            show(ratios.map(|r| r.1))
        );
        table.push(vec![Some(grid.dx()), Some(dt), Some(e1), Some(e2), ratios.map(|r| r.0), ratios.map(|r| r.1)]);
        prev = Some((e1, e2));
    }
    let path = out.path("consistency.csv");
    write_table_csv(&["dx", "dt", "eps1", "eps2", "ratio1", "ratio2"], &table, &path)?;
    println!("wrote {}", path.display());
    let diag = json!({
        "run": run_info(&r),
        "dt_rule": rule.label(),
        "rows": table,
    });
    summary("consistency", cfg, started, diag, &out.path("consistency.json"))?;
    Ok(0)
}

fn identities(cfg: &RunConfig) -> Result<i32, CliError> {
    let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let sizes = match &cfg.sizes {
        Some(s) => parse_sizes(s)?,
        None => DEFAULT_SIZES.to_vec(),
    };
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let rep = identity_suite(samples, &sizes, seed)?;
    for l in rep.lines() {
        println!(
            "{} {:<22} worst {:.3e} ({} of {} failed)",
            if l.passed() { "PASS" } else { "FAIL" },
            l.name,
            l.worst,
            l.failures,
            l.checks
        );
    }
    let ok = rep.passed();
    println!("{}", if ok { "all identities hold" } else { "some identities failed" });
    Ok(if ok { 0 } else { 1 })
}
