//! Runs the `rankpoison` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rankpoison"))
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Parses the `rank,candidate,score` table printed by `aggregate`.
fn printed_ranking(stdout: &[u8]) -> Vec<usize> {
    String::from_utf8_lossy(stdout)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

fn kendall(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut pos = vec![0; n + 1];
    for (k, &c) in b.iter().enumerate() {
        pos[c] = k;
    }
    let mut disc = 0;
    for x in 0..n {
        for y in x + 1..n {
            if pos[a[x]] > pos[a[y]] {
                disc += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    (pairs - 2.0 * disc as f64) / pairs
}

#[test]
fn simulated_data_aggregates_to_the_true_order() {
    // Default strengths are 1..=n, so the true order is n, n-1, ..., 1.
    let truth: Vec<usize> = (1..=10).rev().collect();
    let dir = tempfile::tempdir().unwrap();
    let (mut top, mut exact, mut worst) = (0, 0, 1.0f64);
    for seed in 0..50 {
        let sub = dir.path().join(seed.to_string());
        let seed = seed.to_string();
        run(&["simulate", "--n", "10", "--samples", "5000", "--seed", &seed, "--out-dir", path(&sub)]);
        let out = run(&["aggregate", "--victim", "hodge", "--input", path(&sub.join("comparisons.csv"))]);
        let ranking = printed_ranking(&out.stdout);
        top += usize::from(ranking[0] == truth[0]);
        exact += usize::from(ranking == truth);
        worst = worst.min(kendall(&ranking, &truth));
    }
    assert!(top >= 45, "winner recovered in {top}/50 seeds");
    assert!(worst >= 0.95, "worst Kendall tau {worst} (exact order in {exact}/50)");
}

#[test]
fn attack_promotes_the_runner_up() {
    let dir = tempfile::tempdir().unwrap();
    run(&["attack", "--victim", "hodge", "--scenario", "cp", "--target-t", "2", "--seed", "3", "--out-dir", path(dir.path())]);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("attack_result.json")).unwrap()).unwrap();
    assert_eq!(json["rrank"], 1.0);
    assert_eq!(json["converged"], true);
    for key in ["delta", "kendall", "residual", "clamped_mass"] {
        assert!(json[key].is_number(), "{key}");
    }
    let poisoned = fs::read_to_string(dir.path().join("poisoned.csv")).unwrap();
    assert!(poisoned.starts_with("i,j,count\n"));
    // The poisoned file is itself valid input, and its aggregate follows the target.
    let out = run(&["aggregate", "--input", path(&dir.path().join("poisoned.csv"))]);
    let target: Vec<usize> = json["target"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
    assert_eq!(printed_ranking(&out.stdout)[0], target[0]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["arguments"]["command"]["attack"]["target_t"], 2);
    assert_eq!(manifest["arguments"]["command"]["attack"]["data"]["seed"], 3);
}

#[test]
fn evaluate_writes_four_rows_per_trial_and_scenario() {
    let dir = tempfile::tempdir().unwrap();
    run(&[
        "evaluate", "--victim", "spectral", "--scenario", "cp,ci", "--trials", "3", "--n", "6", "--samples", "1000",
        "--out-dir", path(dir.path()),
    ]);
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "trial,victim,scenario,target_t,strategy,rrank,kendall,delta,converged");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 3 * 4);
    assert_eq!(rows.iter().filter(|r| r.contains(",cp,")).count(), 12);
    assert_eq!(rows.iter().filter(|r| r.contains(",proposed,")).count(), 6);
}

#[test]
fn identical_arguments_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run(&["attack", "--victim", "spectral", "--scenario", "ip", "--n", "6", "--seed", "5", "--out-dir", path(dir.path())]);
        run(&["evaluate", "--scenario", "ci", "--trials", "2", "--n", "5", "--seed", "5", "--out-dir", path(dir.path())]);
    }
    for file in ["poisoned.csv", "weights.csv", "residuals.csv", "attack_result.json", "results.csv"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs between runs");
    }
}

#[test]
fn unknown_flags_are_rejected_with_usage() {
    let out = bin().args(["aggregate", "--no-such-flag"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = bin().args(["transmogrify"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn malformed_rows_are_reported_with_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("i,j,count\n1,2,3\n1,x,4\n", "line 3"),
        ("i,j,count\n1,2,3\n2,2,1\n", "line 3"),
        ("i,j,count\n0,2,3\n", "line 2"),
        ("i,j,count\n1,2,-1\n", "line 2"),
    ];
    for (k, (body, expect)) in cases.iter().enumerate() {
        let file = dir.path().join(format!("bad{k}.csv"));
        fs::write(&file, body).unwrap();
        let out = bin().args(["aggregate", "--input", path(&file)]).output().unwrap();
        assert!(!out.status.success(), "case {k} accepted");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(expect), "case {k}: {err}");
    }
}

#[test]
fn preflib_elections_are_read_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tiny.soc");
    // Candidate 2 is ranked first by 5 of 7 voters.
    fs::write(&file, "# NUMBER ALTERNATIVES: 3\n# NUMBER VOTERS: 7\n5: 2,1,3\n2: 1,3,2\n").unwrap();
    let out = run(&["aggregate", "--victim", "spectral", "--input", path(&file)]);
    assert_eq!(printed_ranking(&out.stdout), vec![2, 1, 3]);
    let out = bin().args(["aggregate", "--input", path(&file), "--n", "4"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn annotations_are_counted_per_judgment() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("votes.csv");
    fs::write(&file, "voter,i,j,winner\na,1,2,2\nb,1,2,2\nc,2,3,2\nd,1,3,1\n").unwrap();
    let out_dir = dir.path().join("out");
    run(&["aggregate", "--input", path(&file), "--format", "annotations", "--out-dir", path(&out_dir)]);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("scores.json")).unwrap()).unwrap();
    assert_eq!(json["total"], 4.0);
    assert_eq!(json["ranking"][0], 2);
    let w = fs::read_to_string(out_dir.join("weight_matrix.csv")).unwrap();
    assert_eq!(w.lines().nth(1).unwrap().split(',').next().unwrap(), "2");
}
