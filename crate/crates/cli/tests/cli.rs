use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fiberloom"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_to(scn: &Path, out: &Path) -> Output {
    run(&["run", scn.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn missing_trials_exits_2_and_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("fusion1_seed_pair.scn"))
        .unwrap()
        .replace("trials = 10000\n", "");
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, text).unwrap();
    let out = run_to(&path, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trials"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_values_report_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("fusion1_seed_pair.scn"))
        .unwrap()
        .replace("seed = 7", "seed = \"seven\"");
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, text).unwrap();
    let out = run_to(&path, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line 7"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unreadable_scenario_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to(&dir.path().join("absent.scn"), dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for name in ["fusion1_seed_pair.scn", "chain3.scn", "fusion2_reference.scn"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert_eq!(run_to(&scenario(name), a.path()).status.code(), Some(0));
        assert_eq!(run_to(&scenario(name), b.path()).status.code(), Some(0));
        let (fa, fb) = (read_dir_sorted(a.path()), read_dir_sorted(b.path()));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{name}");
    }
}

#[test]
fn fusion1_seed_pair_success_within_three_sigma() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_to(&scenario("fusion1_seed_pair.scn"), dir.path()).status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["trials"], 10000);
    assert_eq!(summary["seed"], 7);
    let s = &summary["success"];
    let (exact, emp) = (s["exact"].as_f64().unwrap(), s["empirical"].as_f64().unwrap());
    let sigma = (0.5f64 * 0.5 / 10000.0).sqrt();
    assert!((exact - 0.5).abs() < 1e-10);
    assert!((emp - 0.5).abs() < 3.0 * sigma, "empirical {emp}");
}

#[test]
fn make_seed_lists_cluster_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_to(&scenario("make_seed.scn"), dir.path()).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("amplitudes.txt")).unwrap();
    let amps: Vec<(String, f64, f64)> = text
        .lines()
        .skip(2)
        .map(|l| {
            let t: Vec<&str> = l.split_whitespace().collect();
            (t[0].to_string(), t[1].parse().unwrap(), t[2].parse().unwrap())
        })
        .collect();
    let want = [("00", 0.5), ("01", 0.5), ("10", 0.5), ("11", -0.5)];
    assert_eq!(amps.len(), 4);
    for ((label, re, im), (wl, wr)) in amps.iter().zip(want) {
        assert_eq!(label, wl);
        assert!((re - wr).abs() < 1e-10 && im.abs() < 1e-10, "{label} {re} {im}");
    }
}

#[test]
fn custom_output_names() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_to(&scenario("chain3.scn"), dir.path()).status.code(), Some(0));
    let names: Vec<String> = read_dir_sorted(dir.path()).into_iter().map(|f| f.0).collect();
    assert_eq!(names, ["chain3.json", "chain3.txt", "chain3_amplitudes.txt"]);
}

#[test]
fn every_shipped_scenario_runs() {
    for e in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")).unwrap() {
        let dir = tempfile::tempdir().unwrap();
        let path = e.unwrap().path();
        let out = run_to(&path, dir.path());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn estimate_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "estimate",
        "--target",
        "3",
        "--strategy",
        "TYPE1_GREEDY",
        "--trials",
        "2000",
        "--seed",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("estimate.json")).unwrap()).unwrap();
    assert_eq!(v["strategy"], "TYPE1_GREEDY");
    assert_eq!(v["heralding_probability"], 0.5);
    assert!(v["expected_seeds"].as_f64().unwrap() > 2.0);
}

#[test]
fn estimate_usage_errors() {
    let missing = run(&["estimate", "--target", "3", "--strategy", "TYPE1_GREEDY", "--seed", "4"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--trials"));
    let target = run(&[
        "estimate",
        "--target",
        "1",
        "--strategy",
        "TYPE1_GREEDY",
        "--trials",
        "5",
        "--seed",
        "4",
    ]);
    assert_eq!(target.status.code(), Some(2));
    let strategy = run(&["estimate", "--target", "3", "--strategy", "BOGUS", "--trials", "5", "--seed", "4"]);
    assert_eq!(strategy.status.code(), Some(2));
    let loss = run(&[
        "estimate",
        "--target",
        "3",
        "--strategy",
        "TYPE2_REDUNDANT",
        "--loss",
        "1.2",
        "--trials",
        "5",
        "--seed",
        "4",
    ]);
    assert_eq!(loss.status.code(), Some(2));
}

#[test]
fn catalog_lists_every_circuit() {
    let out = run(&["catalog"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "rt45",
        "hadamard_t",
        "fusion1_tb",
        "fusion2_tb",
        "fusion1_pol",
        "fusion2_pol",
        "tpc",
        "ptc",
        "measure_tb",
        "measure_pol",
        "bitflip",
        "phaseflip",
    ] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing");
    }
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn byproducts_match_checked_in_table() {
    let out = run(&["byproducts"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), fiberloom::circuits::FROZEN_BYPRODUCTS);
}
