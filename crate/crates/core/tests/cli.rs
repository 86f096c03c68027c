use std::path::Path;
use std::process::Command;

use attractorlab::lab::{Report, RunManifest};

fn cli(out: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_attractorlab"));
    c.env("ATTRACTORLAB_OUT", out);
    c
}

fn config_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn manifest_line(stdout: &[u8]) -> std::path::PathBuf {
    let s = String::from_utf8_lossy(stdout);
    let line = s.lines().find_map(|l| l.strip_prefix("manifest ")).expect("manifest line");
    line.into()
}

#[test]
fn run_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(tmp.path()).args(["run", config_path("biangle-square.toml").to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let manifest = manifest_line(&out.stdout);
    assert!(manifest.starts_with(tmp.path()));
    let m = RunManifest::load(&manifest).unwrap();
    assert!(m.passed());

    // ratios converge to (Λ, Λ₀) = (4, 2)
    let ratios = std::fs::read_to_string(m.run_dir.join("ratios.csv")).unwrap();
    assert!(ratios.starts_with("k,ratio_A,ratio_B\n"));
    let last: Vec<f64> = ratios.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[1] - 4.0).abs() < 1e-6 && (last[2] - 2.0).abs() < 1e-6, "{last:?}");

    let rep = cli(tmp.path()).args(["report", manifest.to_str().unwrap(), "--format", "json"]).output().unwrap();
    assert!(rep.status.success());
    let r: Report = serde_json::from_str(&std::fs::read_to_string(m.run_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(r, Report::of(&m));
}

#[test]
fn identical_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let run = || {
        let o = cli(tmp.path()).args(["check", "mbe-square", "--set", "count=30"]).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
        RunManifest::load(&manifest_line(&o.stdout)).unwrap()
    };
    let a = run();
    let files: Vec<Vec<u8>> = a.outputs.iter().map(|o| std::fs::read(a.run_dir.join(&o.file)).unwrap()).collect();
    let b = run();
    assert_eq!(a.outputs, b.outputs);
    for (o, bytes) in b.outputs.iter().zip(files) {
        assert_eq!(std::fs::read(b.run_dir.join(&o.file)).unwrap(), bytes, "{}", o.file);
    }
}

#[test]
fn invalid_config_rejected_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    // Λ = 1
    let o = cli(tmp.path()).args(["check", "biangle-square", "--set", "model.mu=1"]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid configuration"));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
    let o = cli(tmp.path()).args(["check", "torus"]).output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn failing_run_leaves_other_runs_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let good = cli(tmp.path()).args(["check", "loop-square", "--set", "count=3"]).output().unwrap();
    assert!(good.status.success());
    let gm = manifest_line(&good.stdout);
    let before = std::fs::read(gm.parent().unwrap().join("gaps.csv")).unwrap();
    // too few pairs for the estimator: recorded as a partial run
    let bad = cli(tmp.path()).args(["check", "mbe-square", "--set", "count=3"]).output().unwrap();
    assert!(!bad.status.success());
    let bm = RunManifest::load(&manifest_line(&bad.stdout)).unwrap();
    assert!(bm.partial && bm.error.is_some());
    assert_ne!(bm.run_dir, gm.parent().unwrap());
    assert_eq!(std::fs::read(gm.parent().unwrap().join("gaps.csv")).unwrap(), before);
}
