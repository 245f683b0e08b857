use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "\
# two small networks, one rate, short horizon
target_p32 = 0.6
n_networks = 2
seed = 3
rate_constants = 1e-10
horizon_years = 1e4
base_n_estimators = 4
opt_n_estimators = 8
opt_max_depth = 8
importance_repeats = 1
grid_search = false
";

fn fracnet(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracnet"));
    cmd.args(args).env("RUST_LOG", "warn").env_remove("FRACNET_OUT").env_remove("FRACNET_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("study.cfg");
    std::fs::write(&path, format!("{TINY}{extra}")).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn all_writes_the_full_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = fracnet(&["all", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.json", "dataset.csv", "study_report.json", "report/summary.txt", "report/performance.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert!(out.join("networks/net_0000/network.json").is_file());
}

#[test]
fn env_sets_output_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let env_out = dir.path().join("from-env");
    let o = fracnet(&["generate", "--config", &cfg], &[("FRACNET_OUT", env_out.to_str().unwrap()), ("FRACNET_WORKERS", "1")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(env_out.join("manifest.json").is_file());

    let flag_out = dir.path().join("from-flag");
    let o = fracnet(
        &["generate", "--config", &cfg, "--out", flag_out.to_str().unwrap()],
        &[("FRACNET_OUT", env_out.to_str().unwrap())],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_out.join("manifest.json").is_file());
}

#[test]
fn failed_simulations_exit_partial() {
    let dir = tempfile::tempdir().unwrap();
    // k = 0 never dissolves; k = 1e-9 cannot meet the loss limit above min_dt.
    let cfg = write_config(dir.path(), "rate_constants = 0, 1e-9\nmax_loss = 1e-12\nmin_dt_seconds = 1e6\n");
    let out = dir.path().join("out");
    let o = fracnet(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed: network"));
}

#[test]
fn bad_input_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n_networks = 0\n");
    let o = fracnet(&["generate", "--config", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = write_config(dir.path(), "no_such_key = 1\n");
    let o = fracnet(&["generate", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(1));

    let o = fracnet(&["train", "--out", dir.path().join("empty").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
}
