use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ddr_escape::game::GameParams;
use ddr_escape::inverse::CellClass;
use ddr_escape::io::{read_partition, read_trajectory, ScenarioConfig};
use ddr_escape::simulator::{simulate, OptimalEvader, OptimalPursuer};
use ddr_escape::synthesis::TrajectoryPhase;

const REFERENCE: &str = "# reference scenario\nv_r_max = 1\nv_d_max = 0.6\nb = 1\nr_d = 2\ns = 0.3\ntau = 3.84\ndt = 0.001\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddr-escape"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_reference_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("reference.cfg");
    let csv = dir.path().join("reference.csv");
    let svg = dir.path().join("reference.svg");
    fs::write(&cfg, REFERENCE).unwrap();
    let out = run(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&csv),
        "--svg",
        path_str(&svg),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let rows = read_trajectory(fs::File::open(&csv).unwrap()).unwrap();
    let last = rows.last().unwrap();
    assert!((last.t - 3.84).abs() <= 0.02, "final t {}", last.t);
    assert_eq!(rows[0].phase, TrajectoryPhase::Rotation);
    assert_eq!(last.phase, TrajectoryPhase::Primary);

    // Re-simulating from the first row reproduces the final time.
    let p = ScenarioConfig::parse(REFERENCE).unwrap().params;
    let tr = simulate(
        &rows[0].state(),
        &OptimalEvader,
        &OptimalPursuer,
        &p,
        1e-3,
        10.0,
    )
    .unwrap();
    assert!((tr.escape_time.unwrap() - last.t).abs() <= 5e-3);

    let svg1 = fs::read(&svg).unwrap();
    let out = run(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&csv),
        "--svg",
        path_str(&svg),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(svg1, fs::read(&svg).unwrap());
}

#[test]
fn simulate_truncation_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    fs::write(&cfg, format!("{REFERENCE}t_max = 0.5\n")).unwrap();
    let out = run(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&dir.path().join("t.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupt_config_reports_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, REFERENCE.replace("v_d_max = 0.6", "v_d_max = 1.4")).unwrap();
    let out = run(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("v_d_max"));

    fs::write(&cfg, format!("{REFERENCE}speed = 3\n")).unwrap();
    let out = run(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 9") && err.contains("speed"), "{err}");
}

#[test]
fn partition_grid_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let svg = dir.path().join("grid.svg");
    let args = [
        "partition",
        "--rho-v",
        "0.2",
        "--rho-l",
        "4",
        "--resolution",
        "16",
        "--out",
        path_str(&grid),
        "--svg",
        path_str(&svg),
    ];
    assert_eq!(run(&args).status.code(), Some(0));
    let rows = read_partition(fs::File::open(&grid).unwrap()).unwrap();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.len() == 16));
    assert_eq!(rows[0][0], CellClass::OutsideDisk);
    assert!(rows.concat().contains(&CellClass::PrimaryRegion));

    let first = fs::read(&svg).unwrap();
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(first, fs::read(&svg).unwrap());

    let out = run(&["partition", "--resolution", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synthesize_point_and_trajectory() {
    let out = run(&["synthesize", "--x", "0.5", "--y", "1.0"]);
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = GameParams::default();
    let v = ddr_escape::inverse::value(ddr_escape::game::ReducedState::new(0.5, 1.0), &p).unwrap();
    assert!((r["tau"].as_f64().unwrap() - v).abs() < 1e-12);

    let out = run(&["synthesize", "--s", "0.3", "--tau", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("tau,x,y,lambda_x,lambda_y,u1,u2,v1,v2,phase\n"));
    assert!(text.lines().count() > 100);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "--rho-v",
        "0.6",
        "--rho-l",
        "2",
        "--s",
        "0.3",
        "--out",
        path_str(&report),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);

    let out = run(&[
        "verify",
        "--rho-v",
        "0.6",
        "--rho-l",
        "2",
        "--s",
        "0.3",
        "--tolerance",
        "1e-15",
        "--out",
        path_str(&report),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], false);
}
