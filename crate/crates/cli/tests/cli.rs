//! End-to-end runs of the `metroq` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("metroq-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn metroq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metroq")).args(args).env("METROQ_THREADS", "2").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn nv_fi_writes_provenance_and_header() {
    let out = metroq(&["nv-fi", "--lambda0", "27", "--ratio", "0.65"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# metroq "));
    assert!(lines[0].contains("subcommand=nv-fi"));
    assert!(lines[0].contains("config_sha256="));
    assert_eq!(lines[1], "lambda0,lambda1,F_exact,F_2bin,F_3bin,ratio_2bin,ratio_3bin,x_star");
    let fields: Vec<&str> = lines[2].split(',').collect();
    let ratio: f64 = fields[5].parse().unwrap();
    assert!((ratio - 0.8509).abs() < 1e-3, "2-bin ratio {ratio}");
}

#[test]
fn ghz_sweep_has_one_row_per_probe_number() {
    let out = metroq(&["ghz-sweep", "--p", "0.95", "--q", "0.9", "--n-max", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows[0].starts_with("1,"));
    assert!(rows[49].starts_with("50,"));
}

#[test]
fn identical_configuration_gives_identical_bytes() {
    let dir = scratch("determinism");
    let config = dir.join("run.toml");
    std::fs::write(&config, "seed = 11\n[gamma]\np = [0.7, 0.95]\nq = [0.8, 0.9]\nrestarts = 4\n").unwrap();
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let status = Command::new(env!("CARGO_BIN_EXE_metroq"))
            .args(["--config", config.to_str().unwrap(), "--out", path.to_str().unwrap(), "gamma"])
            .env("METROQ_THREADS", threads)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().contains("seed=11"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = scratch("override");
    let config = dir.join("run.toml");
    std::fs::write(&config, "[ghz-sweep]\nn-max = 3\n").unwrap();
    let from_file = metroq(&["--config", config.to_str().unwrap(), "ghz-sweep"]);
    let overridden = metroq(&["--config", config.to_str().unwrap(), "ghz-sweep", "--n-max", "4"]);
    assert_eq!(stdout(&from_file).lines().count(), 2 + 3);
    assert_eq!(stdout(&overridden).lines().count(), 2 + 4);
}

#[test]
fn configuration_errors_exit_with_code_2() {
    let dir = scratch("config-errors");
    let missing = dir.join("absent.toml");
    assert_eq!(metroq(&["--config", missing.to_str().unwrap(), "gamma"]).status.code(), Some(2));

    let unknown = dir.join("unknown.toml");
    std::fs::write(&unknown, "[gamma]\nrestart = 3\n").unwrap();
    assert_eq!(metroq(&["--config", unknown.to_str().unwrap(), "gamma"]).status.code(), Some(2));

    let empty = dir.join("empty.toml");
    std::fs::write(&empty, "[photon-sweep]\nn = []\n").unwrap();
    assert_eq!(metroq(&["--config", empty.to_str().unwrap(), "photon-sweep"]).status.code(), Some(2));

    assert_eq!(metroq(&["ghz-sweep", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(metroq(&["ce-sweep", "--model", "laser"]).status.code(), Some(2));
}

#[test]
fn nonconvergence_exits_with_code_3_after_writing() {
    let dir = scratch("nonconvergence");
    let path = dir.join("ce.csv");
    let out = metroq(&["ce-sweep", "--n", "5", "--max-iters", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let text = std::fs::read_to_string(&path).unwrap();
    let row = text.lines().nth(2).unwrap();
    assert!(row.starts_with("5,") && row.ends_with(",false"), "{row}");
}
