use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_smc-score");

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().unwrap()
}

const GAUSS: &str = r#"
[model]
kind = "gaussian"
observations = [0.0]
[estimator]
method = "is-score"
theta = [1.0]
[grid]
tau = [0.2, 0.1, 0.05]
n = [500]
[run]
replications = 3
seed = 1
"#;

#[test]
fn writes_csv_to_file_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", GAUSS);
    let out = dir.path().join("o.csv");
    let r = run(&["estimate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let file = std::fs::read(&out).unwrap();
    let r = run(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.stdout, file);
    assert_eq!(String::from_utf8(file).unwrap().lines().count(), 1 + 3);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", GAUSS);
    let c = cfg.to_str().unwrap();
    let a = run(&["sweep-tau", "--config", c]).stdout;
    let b = run(&["sweep-tau", "--config", c, "--seed", "1"]).stdout;
    let d = run(&["sweep-tau", "--config", c, "--seed", "2", "--threads", "2"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, d);
}

#[test]
fn config_errors_exit_with_code_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &GAUSS.replace("seed = 1", "seed = 1\nreplicas = 4"));
    let r = run(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("replicas"));
    let cfg = write(dir.path(), "bad2.toml", &GAUSS.replace("n = [500]", "n = [1]"));
    let r = run(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("grid.n"));
    let r = run(&["estimate", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn all_failed_runs_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &GAUSS.replace("theta = [1.0]", "theta = [1e200]"));
    let r = run(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3));
    // the records are still written
    assert_eq!(String::from_utf8_lossy(&r.stdout).lines().count(), 1 + 3);
}

#[test]
fn sweeps_report_slopes_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &GAUSS.replace("is-score", "quad-score"));
    let r = run(&["sweep-tau", "--config", cfg.to_str().unwrap()]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("component 0: slope"));
}
