use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn difftd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_difftd"))
        .args(args)
        .env("DIFFTD_OUTPUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = difftd(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn header(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().find(|l| !l.starts_with('#')).unwrap().split(',').map(str::to_owned).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const ONE_STATE: &str = "difftd-instance 1\nkind dense\nn 1\nd_mu\n1\np_pi\n1\n";

#[test]
fn region_of_family() {
    let tmp = TempDir::new().unwrap();
    let out = ok(tmp.path(), &["stability-region", "--family", "example1", "--m", "23"]);
    assert!(out.contains("boundary roots"), "{out}");
    let csv = tmp.path().join("stability_region.csv");
    assert_eq!(header(&csv), ["interval_index", "lo", "hi"]);
    let r = rows(&csv);
    assert_eq!(r.len(), 2);
    assert_eq!(num(&r[0][1]), 0.0);
    assert!((num(&r[0][2]) - 1.0 / 550.0).abs() < 1e-9);
    assert!((num(&r[1][1]) - 3.0 / 550.0).abs() < 1e-9);
    assert_eq!(r[1][2], "inf");
}

#[test]
fn region_of_one_state_and_verified_random_instance() {
    let tmp = TempDir::new().unwrap();
    let one = write(tmp.path(), "one.txt", ONE_STATE);
    ok(tmp.path(), &["stability-region", "--instance", &one]);
    let r = rows(&tmp.path().join("stability_region.csv"));
    assert_eq!(r, vec![vec!["0".to_string(), "0.0000000000000000e0".into(), "inf".into()]]);

    let three = write(
        tmp.path(),
        "three.txt",
        "difftd-instance 1\nkind dense\nn 3\nd_mu\n0.2 0.3 0.5\np_pi\n0.1 0.6 0.3\n0 0.2 0.8\n0.7 0.3 0\n",
    );
    let out = ok(tmp.path(), &["stability-region", "--instance", &three, "--verify-samples", "200"]);
    assert!(out.contains("verified against direct test"), "{out}");
}

#[test]
fn invalid_input_exits_with_2() {
    let tmp = TempDir::new().unwrap();
    let red = write(tmp.path(), "red.txt", "difftd-instance 1\nkind dense\nn 2\nd_mu\n0.5 0.5\np_pi\n1 0\n0 1\n");
    let out = difftd(tmp.path(), &["stability-region", "--instance", &red]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reducible"));
    let bad = write(tmp.path(), "bad.txt", "difftd-instance 1\nkind dense\nn 1\nd_mu\nx\n");
    let out = difftd(tmp.path(), &["eta-star", "--instance", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    assert_eq!(difftd(tmp.path(), &["eta-star", "--family", "example1", "--m", "22"]).status.code(), Some(2));
    assert_eq!(difftd(tmp.path(), &["eta-star", "--family", "example1"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_3() {
    let tmp = TempDir::new().unwrap();
    let out = difftd(
        tmp.path(),
        &["simulate", "--family", "example1", "--m", "23", "--steps", "10", "--tolerances", r#"{"eigvec_residual":1e-300}"#],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn eta_star_values() {
    let tmp = TempDir::new().unwrap();
    for (m, want) in [("23", 1.0 / 550.0), ("24", 1.0 / 299.0)] {
        let out = ok(tmp.path(), &["eta-star", "--family", "example1", "--m", m]);
        let v = out.lines().find_map(|l| l.strip_prefix("eta_star = ")).unwrap();
        assert!((num(v) - want).abs() <= 1e-6, "m={m}: {v}");
        let csv = tmp.path().join("eta_star.csv");
        assert_eq!(header(&csv), ["omega", "eta", "residual"]);
        assert!(rows(&csv).iter().any(|r| (num(&r[1]) - want).abs() <= 1e-6));
    }
    let one = write(tmp.path(), "one.txt", ONE_STATE);
    let out = ok(tmp.path(), &["eta-star", "--instance", &one]);
    assert!(out.contains("eta_star = inf"), "{out}");
}

#[test]
fn eigen_trajectory_of_family() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["eigen-trajectory", "--family", "example1", "--m", "23", "--t-min", "0.05", "--t-max", "4"]);
    let csv = tmp.path().join("eigen_trajectory.csv");
    assert_eq!(header(&csv), ["eta", "t_ratio", "eig_index", "re", "im", "is_trivial"]);
    let r = rows(&csv);
    assert_eq!(r.len(), 400 * 25);
    for block in r.chunks(25) {
        let trivial: Vec<_> = block.iter().filter(|x| x[5] == "1").collect();
        assert_eq!(trivial.len(), 22);
        assert!(trivial.iter().all(|x| (num(&x[3]) - 1.0).abs() < 1e-9 && num(&x[4]).abs() < 1e-9));
        let t = num(&block[0][1]);
        // Smallest real part among the nontrivial pair (nonzero imaginary part).
        let re = block
            .iter()
            .filter(|x| x[5] == "0" && num(&x[4]).abs() > 1e-9)
            .map(|x| num(&x[3]))
            .fold(f64::INFINITY, f64::min);
        if (t - 1.0).abs() > 0.02 && (t - 3.0).abs() > 0.02 {
            let unstable = t > 1.0 && t < 3.0;
            assert_eq!(re < 0.0, unstable, "t = {t}, re = {re}");
        }
    }
}

#[test]
fn simulate_files_and_rerun() {
    let tmp = TempDir::new().unwrap();
    let out = ok(
        tmp.path(),
        &["simulate", "--family", "example1", "--m", "23", "--steps", "20000", "--seeds", "0,1"],
    );
    assert_eq!(out.lines().filter(|l| l.starts_with("wrote")).count(), 4);
    for clock in ["global", "local"] {
        for seed in [0, 1] {
            let f = tmp.path().join(format!("simulate_{clock}_seed{seed}.csv"));
            assert_eq!(header(&f), ["t", "norm_v", "dist_e", "J_hat", "diverged_flag"]);
            let r = rows(&f);
            assert_eq!(r[0][0], "0");
            assert_eq!(r.last().unwrap()[0], "20000");
            let again = tmp.path().join("again.csv");
            ok(tmp.path(), &["rerun", f.to_str().unwrap(), "--out", again.to_str().unwrap()]);
            assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(&again).unwrap());
        }
    }
    let a = std::fs::read(tmp.path().join("simulate_local_seed0.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("simulate_local_seed1.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn expected_update_mode() {
    let tmp = TempDir::new().unwrap();
    let out = ok(
        tmp.path(),
        &["simulate", "--family", "example1", "--m", "23", "--steps", "1000", "--expected-update"],
    );
    assert!(out.contains("expected update"));
    let f = tmp.path().join("simulate_expected.csv");
    let text = std::fs::read_to_string(&f).unwrap();
    assert!(text.contains("\"expected_update\":true"));
    let again = tmp.path().join("again.csv");
    ok(tmp.path(), &["rerun", f.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());
}

#[test]
fn rerun_other_commands() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["stability-region", "--family", "example1", "--m", "24", "--verify-samples", "20"]);
    ok(tmp.path(), &["eta-star", "--family", "example1", "--m", "24"]);
    ok(tmp.path(), &["eigen-trajectory", "--family", "example1", "--m", "24", "--points", "30"]);
    for name in ["stability_region.csv", "eta_star.csv", "eigen_trajectory.csv"] {
        let f = tmp.path().join(name);
        let again = tmp.path().join("again.csv");
        ok(tmp.path(), &["rerun", f.to_str().unwrap(), "--out", again.to_str().unwrap()]);
        assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(&again).unwrap(), "{name}");
    }
}

#[test]
fn reproduce_figures() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["reproduce", "fig1"]);
    let r = rows(&tmp.path().join("fig1_trajectory.csv"));
    assert_eq!(r.len(), 400 * 25);
    assert_eq!(num(&r[0][1]), 0.0);
    assert_eq!(num(&r.last().unwrap()[1]), 4.0);
    assert!(tmp.path().join("fig1.gp").exists());

    ok(tmp.path(), &["reproduce", "fig2", "--steps", "5000"]);
    for clock in ["global", "local"] {
        let f = tmp.path().join(format!("fig2_{clock}_seed0.csv"));
        let text = std::fs::read_to_string(&f).unwrap();
        assert!(text.contains("\"reference_steps\":100000000000"));
        assert!(text.contains("\"steps\":5000"));
    }
    let out = ok(tmp.path(), &["reproduce", "appendixB", "--steps", "1000"]);
    assert_eq!(out.lines().filter(|l| l.starts_with("wrote")).count(), 19);
    for seed in 1..=9 {
        assert!(tmp.path().join(format!("appendixB_local_seed{seed}.csv")).exists());
    }
}

#[test]
fn out_dir_flag_overrides_environment() {
    let tmp = TempDir::new().unwrap();
    let other = tmp.path().join("elsewhere");
    ok(tmp.path(), &["eta-star", "--family", "example1", "--m", "23", "--out-dir", other.to_str().unwrap()]);
    assert!(other.join("eta_star.csv").exists());
    assert!(!tmp.path().join("eta_star.csv").exists());
}
