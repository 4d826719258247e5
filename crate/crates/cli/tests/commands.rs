use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

/// Runs the binary and returns (exit code, run directory if one was created).
fn frontlab(out: &Path, args: &[&str]) -> (i32, Option<PathBuf>) {
    let o = Command::new(env!("CARGO_BIN_EXE_frontlab")).arg("--out").arg(out).args(args).output().unwrap();
    let code = o.status.code().unwrap();
    let dir = fs::read_dir(out).ok().and_then(|mut d| d.next()).map(|e| e.unwrap().path());
    (code, dir)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn assert_outputs_exist(dir: &Path) {
    let m = manifest(dir);
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for f in outputs {
        assert!(dir.join(f.as_str().unwrap()).is_file(), "{f} listed but missing");
    }
}

#[test]
fn fkpp_speed_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "fkpp.toml", "[model]\nkind = \"fkpp\"\n");
    let out = tmp.path().join("runs");
    let (code, dir) = frontlab(&out, &["speed", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let dir = dir.unwrap();
    let r = json(&dir, "speed.json");
    assert!((r["c_star"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((r["eta_star"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let m = manifest(&dir);
    assert_eq!(m["status"], "pass");
    assert_eq!(m["command"], "speed");
    assert_outputs_exist(&dir);
    assert!(fs::read_to_string(dir.join("spectrum_curves.csv")).unwrap().starts_with("branch,k,re,im\n"));
}

#[test]
fn efkpp_speed_matches_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "e.toml", "[model]\nkind = \"efkpp\"\ndelta = 0.1\n[dispersion]\nsweep = [0.05, 0.1]\n");
    let (code, dir) = frontlab(&tmp.path().join("runs"), &["speed", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let dir = dir.unwrap();
    let m = manifest(&dir);
    let oracle = m["checks"].as_array().unwrap().iter().find(|c| c["name"] == "oracle").unwrap();
    assert_eq!(oracle["verdict"], "pass");
    assert_eq!(fs::read_to_string(dir.join("sweep.csv")).unwrap().lines().count(), 3);
    assert_outputs_exist(&dir);
}

#[test]
fn empty_p_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[model]\np = []\nf = [1.0, -1.0]\n");
    let (code, dir) = frontlab(&tmp.path().join("runs"), &["speed", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(dir.is_none());
}

#[test]
fn missing_config_file_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _) = frontlab(&tmp.path().join("runs"), &["front", tmp.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn bad_front_domain_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "f.toml", "[model]\nkind = \"fkpp\"\n[front]\ndomain = [10.0, -10.0]\n");
    let (code, dir) = frontlab(&tmp.path().join("runs"), &["front", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    let m = manifest(&dir.unwrap());
    assert_eq!(m["status"], "config-error");
    assert!(m["error"].is_string());
}

#[test]
fn fkpp_front_reports_tail_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "f.toml", "[model]\nkind = \"fkpp\"\n[front]\ndomain = [-80.0, 60.0]\nn = 5600\n");
    let (code, dir) = frontlab(&tmp.path().join("runs"), &["front", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let dir = dir.unwrap();
    let r = json(&dir, "front.json");
    assert_eq!(r["b"].as_f64().unwrap(), 1.0);
    assert!(r["residual_norm"].as_f64().unwrap() < 1e-8);
    assert_outputs_exist(&dir);
}

#[test]
fn cubic_spectrum_flags_unstable_eigenvalue() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "[model]\nkind = \"cubic\"\ndelta = 0.2\n");
    let (code, dir) = frontlab(&tmp.path().join("runs"), &["spectrum", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    let dir = dir.unwrap();
    let m = manifest(&dir);
    assert_eq!(m["status"], "check-failed");
    assert_eq!(m["checks"][0]["verdict"], "fail");
    assert_eq!(json(&dir, "spectrum.json")["verdict"], false);
    assert_outputs_exist(&dir);
}

#[test]
fn zero_margin_gives_no_candidates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", "[model]\nkind = \"fkpp\"\n[spectrum]\nmargin = 0.0\n");
    let (code, dir) = frontlab(&tmp.path().join("runs"), &["spectrum", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = json(&dir.unwrap(), "spectrum.json");
    assert_eq!(r["candidates"].as_array().unwrap().len(), 0);
}

#[test]
fn unmatched_approx_still_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", "[model]\nkind = \"fkpp\"\n[approx]\nT = 100.0\nmu = 0.1\n");
    let (code, dir) = frontlab(&tmp.path().join("runs"), &["approx", cfg.to_str().unwrap()]);
    assert_eq!(code, 3);
    let dir = dir.unwrap();
    let m = manifest(&dir);
    assert_eq!(m["status"], "numerical-failure");
    assert!(m["error"].as_str().unwrap().contains("contract"));
    assert_outputs_exist(&dir);
}

#[test]
fn zero_final_time_gives_single_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", "[model]\nkind = \"fkpp\"\n[simulate]\ndomain = [-20.0, 80.0]\nn = 1001\nt_final = 0.0\n");
    let (code, dir) = frontlab(&tmp.path().join("runs"), &["simulate", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let dir = dir.unwrap();
    assert_eq!(fs::read_to_string(dir.join("position.csv")).unwrap().lines().count(), 2);
    assert_eq!(json(&dir, "simulate.json")["samples"], 1);
    assert_outputs_exist(&dir);
}

#[test]
fn front_initial_data_propagates_rigidly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", "[model]\nkind = \"fkpp\"\n[front]\ndomain = [-80.0, 60.0]\nn = 5600\n");
    let c = cfg.to_str().unwrap();
    let (code, dir) =
        frontlab(&tmp.path().join("runs"), &["simulate", "--initial", "front", "--domain", "-80", "60", "--n", "5600", "--t-final", "5", c]);
    assert_eq!(code, 0);
    let m = manifest(&dir.unwrap());
    let rigid = m["checks"].as_array().unwrap().iter().find(|c| c["name"] == "rigid_propagation").unwrap();
    assert_eq!(rigid["verdict"], "pass");
}

#[test]
fn results_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "[model]\nkind = \"cubic\"\ndelta = 0.25\n[spectrum]\nsweep = [0.3, 0.4]\n");
    let c = cfg.to_str().unwrap();
    let runs: Vec<PathBuf> = (0..2)
        .map(|i| {
            let (_, dir) = frontlab(&tmp.path().join(format!("r{i}")), &["spectrum", c]);
            dir.unwrap()
        })
        .collect();
    assert_eq!(runs[0].file_name(), runs[1].file_name());
    for f in ["spectrum.json", "eigenvalues.csv", "sweep.csv"] {
        assert_eq!(fs::read(runs[0].join(f)).unwrap(), fs::read(runs[1].join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn digest_is_stable_across_reserialization() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "a.toml", "[model]\nkind = \"fkpp\"\n");
    let b = write_config(tmp.path(), "b.toml", "# same run, different text\n[model]\n  kind = 'fkpp'\n\n[dispersion]\nk_max = 10.0\n");
    let (_, da) = frontlab(&tmp.path().join("a"), &["speed", a.to_str().unwrap()]);
    let (_, db) = frontlab(&tmp.path().join("b"), &["speed", b.to_str().unwrap()]);
    let da = da.unwrap();
    assert_eq!(da.file_name(), db.unwrap().file_name());
    // the canonical copy written by a run maps back to the same directory
    let (_, dc) = frontlab(&tmp.path().join("c"), &["speed", da.join("config.toml").to_str().unwrap()]);
    assert_eq!(da.file_name(), dc.unwrap().file_name());
    assert_eq!(manifest(&da)["config_digest"].as_str().unwrap().len(), 64);
}
