use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_junction-asym"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn converge_passes_with_zero_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("match_zero.toml");
    let o = run(&["converge", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all passed"));
    let csv = fs::read_to_string(dir.path().join("match_zero/match-sweep.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("# junction-asym"));
    assert!(csv.contains("config_sha256") || csv.contains("sha256"));
    assert!(dir.path().join("match_zero/match-sweep_checks.csv").exists());
}

#[test]
fn failing_target_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("match_two_rods.toml")).unwrap().replace("threshold = 0.1", "threshold = 1e-6");
    let cfg = dir.path().join("strict.toml");
    fs::write(&cfg, text).unwrap();
    let o = run(&["converge", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "experiments = [\"nope\"]\n").unwrap();
    let o = run(&["converge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn asym_writes_probe_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("match_zero.toml");
    let o = run(&["asym", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("match_zero/asym_h0.010000.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,y,z,value,part");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|l| l.ends_with(",plate")) && rows.iter().any(|l| l.ends_with(",rod1")));
    for l in rows {
        let v: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(v, 0.0);
    }
}

#[test]
fn reference_flags_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reference", "--h", "0.05", "--alpha", "0", "--mesh-level", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("alpha=0") && s.contains("dofs=") && s.contains("energy="));
    let text = fs::read_to_string(dir.path().join("reference_alpha0_h0.050000.csv")).unwrap();
    assert!(text.starts_with("vertex,r,z,value"));
    assert!(run(&["reference", "--alpha", "3"]).status.code() != Some(0));
}

#[test]
fn green_and_capacity_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let green = configs().join("green_two_anchors.toml");
    assert!(run(&["green", "--config", green.to_str().unwrap(), "--out", out]).status.success());
    let g = fs::read_to_string(dir.path().join("green_two_anchors/green/gmatrix.csv")).unwrap();
    assert_eq!(g.lines().count(), 3);
    let cap = configs().join("capacity.toml");
    assert!(run(&["capacity", "--config", cap.to_str().unwrap(), "--out", out]).status.success());
    let c = fs::read_to_string(dir.path().join("capacity/capacity.csv")).unwrap();
    assert!(c.contains("rod,c_log,flux,compat_layer,compat_rod,compat_sum"));
}
