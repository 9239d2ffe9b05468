//! End-to-end runs of the command-line front end.

use std::path::Path;
use std::process::{Command, Output};

use spinchain::evolution::parse_state_dump;
use spinchain::perturbation::parse_budget_record;
use spinchain::protocol::parse_table;

fn spinchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinchain"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn simulate_reports_every_method_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let seq_path = dir.path().join("seq.txt");
    let state_path = dir.path().join("state.txt");
    let out = spinchain(&[
        "simulate",
        "--length",
        "5",
        "--gradient",
        "40",
        "--rabi",
        "0.15",
        "--dump-sequence",
        seq_path.to_str().unwrap(),
        "--dump-state",
        state_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    for key in ["p_exact", "p_blocked", "p_analytic", "epsilon", "mu_end"] {
        let p = value(&text, key);
        assert!((0.0..=1.0).contains(&p), "{key}={p}");
    }
    let seq = parse_table(&std::fs::read_to_string(&seq_path).unwrap()).unwrap();
    assert_eq!(seq.len(), 8);
    let state = parse_state_dump(&std::fs::read_to_string(&state_path).unwrap()).unwrap();
    assert_eq!(state.length(), 5);
    assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
}

#[test]
fn estimate_handles_long_chains() {
    let out = spinchain(&["estimate", "--length", "1000", "--two-pi-k", "8"]);
    assert!(out.status.success());
    let budget = parse_budget_record(&stdout(&out)).unwrap();
    assert_eq!(budget.length, 1000);
    assert!(budget.p_unwanted > 0.0 && budget.p_unwanted < 1.0);
}

#[test]
fn validity_failure_exits_nonzero_with_diagnostic() {
    let out = spinchain(&[
        "estimate",
        "--length",
        "10",
        "--gradient",
        "1",
        "--rabi",
        "0.9",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.starts_with("error: ") && err.contains("validity"),
        "{err}"
    );
}

#[test]
fn convergence_failure_exits_nonzero() {
    let out = spinchain(&[
        "simulate", "--length", "4", "--method", "exact", "--tol", "0",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("error: "));
}

#[test]
fn rabi_options_are_exclusive() {
    let out = spinchain(&["simulate", "--rabi", "0.1", "--two-pi-k", "3"]);
    assert!(!out.status.success());
}

#[test]
fn short_chain_is_rejected() {
    let out = spinchain(&["simulate", "--length", "2", "--method", "blocked"]);
    assert!(!out.status.success());
}

fn sweep_file(dir: &Path, name: &str) -> Vec<u8> {
    let path = dir.join(name);
    let out = spinchain(&[
        "sweep-rabi",
        "--length",
        "4",
        "--gradient",
        "30",
        "--start",
        "0.1",
        "--stop",
        "0.5",
        "--points",
        "5",
        "--spacing",
        "log",
        "--no-timings",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::read(path).unwrap()
}

#[test]
fn sweep_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = sweep_file(dir.path(), "a.csv");
    assert_eq!(a, sweep_file(dir.path(), "b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.starts_with("rabi,") && l.ends_with(",,")));
}

#[test]
fn gradient_sweep_to_stdout_with_plot_rejected_without_out() {
    let out = spinchain(&[
        "sweep-gradient",
        "--start",
        "10",
        "--stop",
        "20",
        "--plot",
        "x.gp",
    ]);
    assert!(!out.status.success());
    let out = spinchain(&[
        "sweep-gradient",
        "--length",
        "4",
        "--start",
        "10",
        "--stop",
        "20",
        "--points",
        "2",
        "--method",
        "analytic",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 3);
}
