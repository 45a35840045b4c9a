use std::path::Path;
use std::process::{Command, Output};

use cylmin_core::PlanDocument;

fn cylmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylmin"))
        .args(args)
        .env_remove("CYLMIN_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn solve_json(from: &str, to: &str) -> Vec<PlanDocument> {
    let out = cylmin(&["solve", "--rho", "1", "--from", from, "--to", to, "--json"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn solve_direct_instance() {
    let docs = solve_json("0,0", "1,0.718281828459045");
    assert_eq!(docs.len(), 1);
    assert_eq!(docs[0].kind, "direct");
    assert!((docs[0].total_time - 1.0).abs() <= 1e-12);
}

#[test]
fn solve_truncated_direct_target() {
    let docs = solve_json("0,0", "1,0.7182818");
    let delta = 1f64.exp_m1() - 1.0 - 0.7182818;
    let expected = 1.0 + 2.0 * delta.sqrt();
    assert!(
        (docs[0].total_time - expected).abs() <= 1e-6,
        "{}",
        docs[0].total_time
    );
}

#[test]
fn solve_one_switch_instance() {
    let docs = solve_json("0,0", "0,0.5");
    assert_eq!(docs.len(), 1);
    assert_eq!(docs[0].segments.len(), 2);
    assert!((docs[0].total_time - 1.2654).abs() <= 1e-4);
    assert!(!docs[0].tie);

    let human = stdout(&cylmin(&[
        "solve", "--rho", "1", "--from", "0,0", "--to", "0,0.5",
    ]));
    assert!(human.contains("total_time = 1.26542950517"), "{human}");
    assert!(human.contains("switches = 1"));
}

#[test]
fn solve_zero_time() {
    let docs = solve_json("0,0", "0,0");
    assert_eq!(docs[0].total_time, 0.0);
    assert!(docs[0].segments.is_empty());
}

#[test]
fn json_round_trips() {
    let out = cylmin(&["solve", "--from", "-0.3,0.9", "--to", "1.2,0.1", "--json"]);
    let text = stdout(&out);
    let docs: Vec<PlanDocument> = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&docs).unwrap();
    assert_eq!(again.trim_end(), text.trim_end());
}

#[test]
fn point_y_is_wrapped() {
    let docs = solve_json("0,2.25", "0,-0.25");
    assert_eq!(docs[0].from.y, 0.25);
    assert_eq!(docs[0].to.y, 0.75);
}

#[test]
fn induced_parameters_rescale_rho() {
    let out = cylmin(&[
        "solve",
        "--rho",
        "1",
        "--from",
        "0,0",
        "--to",
        "1,0",
        "--alpha",
        "-2",
        "--beta",
        "1",
        "--a-param",
        "1",
        "--json",
    ]);
    let docs: Vec<PlanDocument> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(docs[0].rho, 2.0);

    let out = cylmin(&["solve", "--from", "0,0", "--to", "1,0", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cylmin(&[
        "solve",
        "--from",
        "0,0",
        "--to",
        "1,0",
        "--alpha",
        "0",
        "--beta",
        "1",
        "--a-param",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_two() {
    for args in [
        &["solve", "--from", "0,abc", "--to", "0,0"][..],
        &["solve", "--from", "0", "--to", "0,0"],
        &["solve", "--rho", "-1", "--from", "0,0", "--to", "0,0.5"],
        &["verify", "--bogus"],
        &["verify", "--n", "0"],
        &[
            "trace",
            "--from",
            "0,0",
            "--to",
            "0,0.5",
            "--samples",
            "1",
            "--out",
            "unused.csv",
        ],
        &["frobnicate"],
    ] {
        let out = cylmin(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn trace_two_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = cylmin(&[
        "trace",
        "--from",
        "0,0",
        "--to",
        "0,0.5",
        "--samples",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("t,x,y,u"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn trace_control_columns() {
    let dir = tempfile::tempdir().unwrap();
    let direct = dir.path().join("direct.csv");
    cylmin(&[
        "trace",
        "--from",
        "0,0",
        "--to",
        "1,0.718281828459045",
        "--out",
        direct.to_str().unwrap(),
    ]);
    let rows = csv_rows(&direct);
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r[3] == rows[0][3]));

    let switched = dir.path().join("switched.csv");
    cylmin(&[
        "trace",
        "--from",
        "0,0",
        "--to",
        "0,0.5",
        "--samples",
        "500",
        "--out",
        switched.to_str().unwrap(),
    ]);
    let rows = csv_rows(&switched);
    let changes = rows
        .windows(2)
        .filter(|w| w[0][3].signum() != w[1][3].signum())
        .count();
    assert_eq!(changes, 1);
}

#[test]
fn trace_tie_writes_both_plans() {
    let tie = cylmin(&["tie", "--delta", "0.5", "--json"]);
    let docs: Vec<PlanDocument> = serde_json::from_slice(&tie.stdout).unwrap();
    let from = format!("{},{}", docs[0].from.x, docs[0].from.y);
    let to = format!("{},{}", docs[0].to.x, docs[0].to.y);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tie.csv");
    let out = cylmin(&[
        "trace",
        "--from",
        &from,
        "--to",
        &to,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(solve_json(&from, &to).len(), 2);
    assert!(dir.path().join("tie.dip.csv").exists());
    assert!(dir.path().join("tie.hump.csv").exists());
    assert!(!path.exists());
}

#[test]
fn trace_unwritable_path_exits_two() {
    let out = cylmin(&[
        "trace",
        "--from",
        "0,0",
        "--to",
        "0,0.5",
        "--out",
        "/nonexistent/dir/t.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn race_rows_have_f_below_g() {
    let out = cylmin(&[
        "race", "--a", "0.25", "--x0", "0", "--x1", "0", "--rho", "1", "--grid", "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,F,G,f,g"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r[1] < r[2]));
}

#[test]
fn tie_reports_equal_time_plans() {
    let out = cylmin(&["tie", "--delta", "0.5", "--rho", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let docs: Vec<PlanDocument> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(docs.len(), 2);
    assert!(docs[0].from.x > -2.0 && docs[0].from.x < 0.0);
    assert!((docs[0].total_time - docs[1].total_time).abs() <= 1e-10);
    assert!(docs.iter().all(|d| d.tie));
}

#[test]
fn sweep_origin_cell_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = cylmin(&[
        "sweep",
        "--x-range",
        "-1,1,5",
        "--y-range",
        "0,0.75,4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&path);
    assert_eq!(rows.len(), 20);
    let origin = rows.iter().find(|r| r[0] == 0.0 && r[1] == 0.0).unwrap();
    assert_eq!(origin[2], 0.0);
}

#[test]
fn verify_matches_golden_report() {
    let out = cylmin(&["verify", "--n", "1", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = include_str!("golden/verify_n1_seed7.txt");
    assert_eq!(stdout(&out), golden);
}

#[test]
fn verify_small_campaign_passes() {
    let out = cylmin(&["verify", "--n", "5", "--seed", "3", "--max-switches", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("result: PASS"));
    assert!(text.contains("race-form g (constant 1)"));
}

#[test]
fn commands_are_deterministic() {
    let a = cylmin(&["verify", "--n", "3", "--seed", "11"]);
    let b = cylmin(&["verify", "--n", "3", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn log_verbosity_from_environment() {
    let quiet = cylmin(&["solve", "--from", "0,0", "--to", "0,0.5"]);
    assert!(quiet.stderr.is_empty());
    let loud = Command::new(env!("CARGO_BIN_EXE_cylmin"))
        .args(["solve", "--from", "0,0", "--to", "0,0.5"])
        .env("CYLMIN_LOG", "info")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&loud.stderr).contains("effective rho"));
}
