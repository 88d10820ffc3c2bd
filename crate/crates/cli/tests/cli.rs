//! End-to-end runs of the `symcap` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use symcap_cli::output::{read_csv, Manifest};

fn symcap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symcap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_owned()
}

#[test]
fn bound_two_user_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let o = symcap(
        &["bound", "two-user", "--rate", "2", "--sum-cap", "2"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0.666667");
    let m = Manifest::read(&dir.path().join("bound.manifest.json")).unwrap();
    assert!((m.value.unwrap().as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn bound_aliases_and_edge_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = symcap(
        &["bound", "thm4", "--rate", "5", "--sum-cap", "5"],
        dir.path(),
    );
    assert_eq!(stdout(&o), "1.000000");
    let o = symcap(&["bound", "atom", "--sum-cap", "2"], dir.path());
    assert_eq!(stdout(&o), "0.333333");
    let o = symcap(
        &[
            "bound",
            "bracket",
            "--users",
            "4",
            "--rate",
            "8",
            "--sum-cap",
            "8",
        ],
        dir.path(),
    );
    assert!(stdout(&o).starts_with("lower="), "{}", stdout(&o));
}

#[test]
fn per_user_rate_convention_scales_the_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let total = symcap(
        &["bound", "two-user", "--rate", "2", "--sum-cap", "4"],
        dir.path(),
    );
    let per_user = symcap(
        &[
            "bound",
            "two-user",
            "--rate",
            "1",
            "--sum-cap",
            "4",
            "--rate-convention",
            "per-user",
        ],
        dir.path(),
    );
    assert_eq!(stdout(&total), stdout(&per_user));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = symcap(&["fig", "11"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown figure"));
    let o = symcap(&["bound", "no-such-bound"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = symcap(&["bound", "two-user", "--rate=-1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = symcap(&["if-sim", "--nt", "2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fig1_is_the_two_segment_tradeoff() {
    let dir = tempfile::tempdir().unwrap();
    let o = symcap(&["fig", "1"], dir.path());
    assert!(o.status.success());
    let rows = read_csv(&dir.path().join("fig1.csv")).unwrap();
    let sym: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.curve == "symmetric_mac")
        .map(|r| (r.x, r.y))
        .collect();
    let expected = [(0.0, 1.0), (1.0 / 3.0, 2.0 / 3.0), (0.5, 0.0)];
    assert_eq!(sym.len(), expected.len());
    for ((x, y), (ex, ey)) in sym.iter().zip(expected) {
        assert!((x - ex).abs() < 1e-12 && (y - ey).abs() < 1e-12, "{sym:?}");
    }
    assert!(rows.iter().all(|r| r.stderr.is_none()));
}

#[test]
fn fig4_empirical_between_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = symcap(&["fig", "4", "--trials", "20000"], dir.path());
    assert!(o.status.success());
    let rows = read_csv(&dir.path().join("fig4.csv")).unwrap();
    let curve =
        |name: &str| -> Vec<_> { rows.iter().filter(|r| r.curve == name).cloned().collect() };
    let (emp, lo, hi) = (
        curve("empirical"),
        curve("lower_bound"),
        curve("upper_bound"),
    );
    assert!(!emp.is_empty() && emp.len() == lo.len() && emp.len() == hi.len());
    for ((e, l), u) in emp.iter().zip(&lo).zip(&hi) {
        let s = e.stderr.unwrap();
        assert!(
            e.y >= l.y - 3.0 * s - 1e-12 && e.y <= u.y + 3.0 * s + 1e-12,
            "{e:?} {l:?} {u:?}"
        );
    }
}

#[test]
fn replay_reproduces_the_csv_bit_for_bit() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = symcap(
        &["fig", "7", "--trials", "500", "--seed", "9"],
        first.path(),
    );
    assert!(o.status.success());
    let manifest = first.path().join("fig7.manifest.json");
    let m = Manifest::read(&manifest).unwrap();
    assert_eq!(m.seed, 9);
    assert_eq!(m.params.trials, 500);
    assert_eq!(m.command, "fig 7");
    let o = Command::new(env!("CARGO_BIN_EXE_symcap"))
        .arg("replay")
        .arg(&manifest)
        .arg("--out")
        .arg(second.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let a = fs::read(first.path().join("fig7.csv")).unwrap();
    let b = fs::read(second.path().join("fig7.csv")).unwrap();
    assert_eq!(a, b);
    let replayed = Manifest::read(&second.path().join("fig7.manifest.json")).unwrap();
    assert_eq!(replayed.params, m.params);
}

#[test]
fn simulate_mimo_reports_union_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = symcap(
        &[
            "simulate",
            "--users",
            "2",
            "--nt",
            "2",
            "--nr",
            "3",
            "--sum-cap",
            "6",
            "--rate",
            "3",
            "--trials",
            "2000",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("simulate.csv")).unwrap();
    assert!(rows.iter().any(|r| r.curve == "frobenius_union_bound"));
    assert!(rows.iter().any(|r| r.curve == "empirical"));
}

#[test]
fn validate_analytic_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_symcap"))
        .args(["validate", "analytic"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("PASS criterion")));
}
