use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("widthlab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn widthlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_widthlab")).args(args).output().unwrap()
}

#[test]
fn expect_task_writes_reports() {
    let dir = scratch("expect");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"task":"expect","seed":4,"system":{"family":"trig","n":3},"p":4,"samples":5000}"#).unwrap();
    let out = widthlab(&["expect", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("expect.csv")).unwrap();
    assert!(csv.starts_with("system,n,p,"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("expect.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn widths_task_reproduces_semiaxes() {
    let dir = scratch("widths");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"task":"widths","seed":1,"diag":[3,2,1],"restarts":64}"#).unwrap();
    let out = widthlab(&["widths", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("widths.csv")).unwrap();
    let exact: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(exact, ["3.0", "2.0", "1.0", "0.0"]);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn seed_flag_overrides_config() {
    let dir = scratch("seed");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"task":"expect","seed":4,"p":3,"samples":2000}"#).unwrap();
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.join(sub);
        let out = widthlab(&["expect", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read_to_string(out_dir.join("expect.csv")).unwrap()
    };
    assert_eq!(run("9", "a"), run("9", "b"));
    assert_ne!(run("9", "c"), run("10", "d"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unknown_field_is_reported_with_position() {
    let dir = scratch("bad");
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, "{\n  \"task\": \"volume\",\n  \"seed\": 1,\n  \"colour\": 3\n}").unwrap();
    let out = widthlab(&["volume", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:4:") && err.contains("colour"), "{err}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn single_check_and_unknown_check() {
    let dir = scratch("check");
    let out = widthlab(&["verify", "--check", "santalo-2d", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS santalo-2d"));
    let out = widthlab(&["verify", "--check", "no-such-check", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = widthlab(&["frobnicate"]);
    assert!(!out.status.success());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_widthlab"))
        .args(["verify", "--check", "fourier-tail", "--out", std::env::temp_dir().to_str().unwrap()])
        .env("WIDTHLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
