//! End-to-end runs of the `qpjacobi` binary.

use qpjacobi::Mat2;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpjacobi")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

#[test]
fn lyapunov_rotation() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "rot.cfg", "scales = 16\nsampler.count = 32\n");
    let out_path = dir.path().join("rot.csv");
    let out = run(&["lyapunov", "--config", s(&cfg), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("energy,n,l_n,std_err,l_accel,doubling_gap,dropped_measure\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0][0], rows[0][1]), (0.0, 16.0));
    assert!(rows[0][2].abs() <= 1e-12);
}

#[test]
fn lyapunov_constant_cocycle() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.cfg", "scales = 64, 128\nenergy.low = 3\nenergy.high = 3\nsampler.count = 16\n");
    let out = run(&["lyapunov", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!((r[4] - 0.962_423_650_119_206_9).abs() <= 1e-4, "{r:?}");
    }
}

#[test]
fn unknown_key_is_exit_2_without_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.cfg", "scales = 16\nsampler.colour = red\n");
    let out_path = dir.path().join("never.csv");
    let out = run(&["lyapunov", "--config", s(&cfg), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampler.colour"));
}

#[test]
fn degenerate_orbits_are_exit_3() {
    let dir = TempDir::new().unwrap();
    // b = cos(2πx) vanishes at x = 1/4 and 3/4, and ω = 1/4 walks every
    // grid point of the form k/4 into a zero.
    let cfg = write(
        &dir,
        "z.cfg",
        "cocycle.b.cos.1 = 1\ncocycle.omega = 0.25\ncocycle.b_floor = 1e-3\nsampler.count = 8\nsampler.offset = 0\nscales = 4\n",
    );
    let out = run(&["lyapunov", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn holder_positivity_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "h.cfg",
        "cocycle.a.cos.1 = 1.0\nscales = 128\nenergy.low = -0.5\nenergy.high = 0.5\nenergy.count = 8\nsampler.count = 256\n",
    );
    let out = run(&["holder", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(4));
    let v = json(&out);
    assert_eq!(v["positivity_ok"], Value::Bool(false));
    assert!(!v["offending_energies"].as_array().unwrap().is_empty());
}

#[test]
fn holder_grid_too_small() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "h.cfg", "energy.low = 2.6\nenergy.high = 3.4\nenergy.count = 2\n");
    assert_eq!(run(&["holder", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn holder_smooth_window() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "h.cfg",
        "scales = 128\nenergy.low = 2.55\nenergy.high = 3.45\nenergy.count = 21\nsampler.count = 16\n",
    );
    let out = run(&["holder", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["beta"].as_f64().unwrap() - 1.0).abs() <= 0.1, "{v}");
    let text = String::from_utf8(out.stdout).unwrap();
    let pos: Vec<usize> = ["beta", "intercept", "r_squared", "window", "pair_count", "positivity_ok"]
        .iter()
        .map(|k| text.find(&format!("\"{k}\"")).unwrap())
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
}

#[test]
fn ldt_rotation_is_censored() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "l.cfg", "scales = 16, 32\ndeltas = 0.1, 0.2\nsampler.count = 64\n");
    let out_path = dir.path().join("ldt.csv");
    let out = run(&["ldt", "--config", s(&cfg), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("n,delta,measure,samples\n"));
    assert!(csv_rows(&csv).iter().all(|r| r[2] == 0.0));
    let fit: Value = serde_json::from_str(&std::fs::read_to_string(out_path.with_extension("json")).unwrap()).unwrap();
    assert_eq!(fit["censored"], Value::Bool(true));
}

#[test]
fn ldt_synthetic_rate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "l.cfg", "scales = 128, 256, 512\ndeltas = 0.05, 0.1, 0.2\n");
    let out_path = dir.path().join("syn.csv");
    let out = run(&["ldt", "--synthetic-rate", "0.5", "--config", s(&cfg), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let fit: Value = serde_json::from_str(&std::fs::read_to_string(out_path.with_extension("json")).unwrap()).unwrap();
    assert!((fit["fitted_c"].as_f64().unwrap() - 0.5).abs() <= 1e-6);
}

#[test]
fn ldt_needs_two_scales() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "l.cfg", "scales = 16\n");
    assert_eq!(run(&["ldt", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn diophantine_reports() {
    let v = json(&run(&["diophantine", "--omega", "0.5", "--alpha", "2", "--n-max", "10"]));
    assert_eq!(v["margin"].as_f64(), Some(0.0));
    assert_eq!(v["worst_n"].as_u64(), Some(2));
    let out = run(&["diophantine", "--omega", "golden", "--alpha", "2", "--n-max", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["margin"].as_f64().unwrap() > 0.0);
    assert!([1597, 2584, 4181, 6765, 987, 610, 377, 233, 144, 89, 55, 34, 21, 13, 8, 5, 3, 2]
        .contains(&v["worst_n"].as_u64().unwrap()));
    assert_eq!(run(&["diophantine", "--alpha", "1"]).status.code(), Some(2));
}

fn matrix_file(dir: &TempDir, name: &str, ms: &[Mat2]) -> PathBuf {
    let text: String = ms
        .iter()
        .map(|m| format!("{:e} {:e} {:e} {:e}\n", m.0[0], m.0[1], m.0[2], m.0[3]))
        .collect();
    write(dir, name, &text)
}

#[test]
fn ap_verify_chains() {
    let dir = TempDir::new().unwrap();
    let diag = matrix_file(&dir, "diag.txt", &vec![Mat2::diag(100.0, 0.01); 10]);
    let v = json(&run(&["ap-verify", s(&diag)]));
    assert!(v["lhs"].as_f64().unwrap() <= 1e-10);

    let rot = matrix_file(&dir, "rot.txt", &vec![Mat2::rotation(0.4); 10]);
    let out = run(&["ap-verify", s(&rot)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["hypotheses_met"], Value::Bool(false));

    let hyp: Vec<Mat2> = (0..20)
        .map(|j| Mat2::rotation(0.3 * ((j * 5 % 7) as f64 / 7.0 - 0.5)) * Mat2::diag(1e4, 1e-4))
        .collect();
    let v = json(&run(&["ap-verify", s(&matrix_file(&dir, "hyp.txt", &hyp))]));
    assert_eq!(v["hypotheses_met"], Value::Bool(true));
    assert!(v["bound_ratio"].as_f64().unwrap() <= 100.0);

    let big = matrix_file(&dir, "big.txt", &[Mat2::diag(100.0, 1.0); 5]);
    assert_eq!(run(&["ap-verify", s(&big)]).status.code(), Some(5));
    let bad = write(&dir, "bad.txt", "1 2 3\n");
    assert_eq!(run(&["ap-verify", s(&bad)]).status.code(), Some(2));
}

#[test]
fn birkhoff_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "b.cfg", "cocycle.b.const = 2\ncocycle.b.cos.1 = 1\nscales = 256\nsampler.count = 2048\n");
    let out = run(&["birkhoff", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let (m, e) = (v["mean"].as_f64().unwrap(), v["std_err"].as_f64().unwrap());
    assert!(m.abs() <= 3.0 * e + 1e-12, "{v}");
}

#[test]
fn output_identical_across_threads_and_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "d.cfg",
        "cocycle.a.cos.1 = 4\ncocycle.b.const = 1.5\ncocycle.b.sin.2 = 0.5\nscales = 32, 64\n\
         energy.low = -1\nenergy.high = 1\nenergy.count = 5\nsampler.kind = stratified\nsampler.count = 3000\n",
    );
    let outs: Vec<Vec<u8>> = [("1", "5"), ("4", "5"), ("4", "5")]
        .iter()
        .map(|(t, seed)| {
            let o = run(&["lyapunov", "--config", s(&cfg), "--threads", t, "--seed", seed]);
            assert_eq!(o.status.code(), Some(0));
            o.stdout
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[1], outs[2]);
    let other = run(&["lyapunov", "--config", s(&cfg), "--seed", "6"]).stdout;
    assert_ne!(other, outs[0]);
}
