use std::path::Path;
use std::process::Command;

use abcd_cli::output::{read_csv, read_snapshots_csv, write_convergence_csv, write_snapshots_csv, FieldSnapshot};
use abcd_core::exact::{cell_average_initial, CellAverageConfig};
use abcd_core::experiments::{ConvergenceReport, ConvergenceRow, ConvergenceSetup, RowOutcome};
use abcd_core::presets::lookup;
use abcd_core::scheme::EXCLUDED_CASES;

fn abcd(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_abcd"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn setup_a() -> ConvergenceSetup {
    ConvergenceSetup::from_preset(&lookup("A").unwrap())
}

#[test]
fn snapshot_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = lookup("C").unwrap();
    let grid = p.grid().unwrap();
    let s = cell_average_initial(&p.spec(), &grid, &CellAverageConfig::default());
    let mut later = s.clone();
    later.t = 0.1 + 0.2;
    later.u.values_mut()[3] = f64::NAN;
    let snaps = vec![FieldSnapshot::from_state(&s), FieldSnapshot::from_state(&later)];
    let path = dir.path().join("snap.csv");
    write_snapshots_csv(&snaps, &path).unwrap();
    let back = read_snapshots_csv(&path).unwrap();
    assert_eq!(back.len(), 2);
    for (a, b) in snaps.iter().zip(&back) {
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        assert_eq!(b.len(), grid.cells());
        assert!(b.x.windows(2).all(|w| w[0] < w[1]));
        for j in 0..a.len() {
            assert_eq!(a.x[j].to_bits(), b.x[j].to_bits());
            assert_eq!(a.eta[j].to_bits(), b.eta[j].to_bits());
            assert!(a.u[j].to_bits() == b.u[j].to_bits() || (a.u[j].is_nan() && b.u[j].is_nan()));
        }
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.contains(",nan\n"));
}

#[test]
fn empty_report_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let setup = setup_a();
    let report = ConvergenceReport {
        setup,
        params: setup.spec.params(),
        rows: Vec::new(),
    };
    let path = dir.path().join("empty.csv");
    write_convergence_csv(&report, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "dx,error,rate\n");
}

#[test]
fn three_row_report_leaves_first_rate_empty() {
    let dir = tempfile::tempdir().unwrap();
    let setup = setup_a();
    let row = |cells: usize, e: f64, rate: Option<f64>| ConvergenceRow {
        cells,
        dx: 40.0 / cells as f64,
        outcome: RowOutcome::Error(e),
        rate,
        steps: 1,
    };
    let report = ConvergenceReport {
        setup,
        params: setup.spec.params(),
        rows: vec![row(640, 4.0, None), row(1280, 2.0, Some(1.0)), row(2560, 1.0, Some(1.0))],
    };
    let path = dir.path().join("three.csv");
    write_convergence_csv(&report, &path).unwrap();
    let (header, rows) = read_csv(&path).unwrap();
    assert_eq!(header, ["dx", "error", "rate"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0], [Some(0.0625), Some(4.0), None]);
    assert_eq!(rows[2][2], Some(1.0));
}

#[test]
fn converge_writes_identical_bytes_twice() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["converge", "--case", "A", "--ladder", "64:256", "--T", "0.25"];
    for d in [&a, &b] {
        let out = abcd(&args, d.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("A-convergence.csv")).unwrap();
    let first = read(&a);
    assert_eq!(first, read(&b));
    let (_, rows) = read_csv(&a.path().join("A-convergence.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0][2].is_none() && rows[1][2].is_some());
}

#[test]
fn validation_errors_exit_one_with_a_message() {
    let d = tempfile::tempdir().unwrap();
    let out = abcd(&["simulate", "--abcd", "0,0,0,0"], d.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(EXCLUDED_CASES));

    let out = abcd(&["simulate", "--J", "1000"], d.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power of two"));

    let out = abcd(&["collide", "--case", "K"], d.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown case"));

    let out = abcd(&["simulate", "--case", "E", "--dt", "1"], d.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CFL"));
}

#[test]
fn simulate_reports_blow_up_with_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let out = abcd(&["simulate", "--case", "G", "--dt", "0.5"], d.path());
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.trim_end().lines().last().unwrap().starts_with("blow-up at t = "), "{stdout}");
    let snaps = read_snapshots_csv(&d.path().join("G-snapshots.csv")).unwrap();
    assert!(snaps.last().unwrap().eta.iter().chain(&snaps.last().unwrap().u).any(|v| !v.is_finite() || v.abs() > 1e3));
}

#[test]
fn config_file_values_yield_to_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "case = \"E\"\nt_final = 5.0\nladder = \"64:128\"\n").unwrap();
    let out = abcd(&["converge", "--config", cfg.to_str().unwrap(), "--T", "0.1"], d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("E-summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["t_final"], 0.1);
    assert_eq!(summary["diagnostics"]["run"]["case"], "E");
    assert_eq!(summary["diagnostics"]["rows"].as_array().unwrap().len(), 2);
    assert!(summary["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn identities_pass_on_a_small_run() {
    let d = tempfile::tempdir().unwrap();
    let out = abcd(&["identities", "--samples", "10", "--sizes", "8,32"], d.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS ")).count(), 14);
}
