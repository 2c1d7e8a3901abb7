use std::process::Command;

use relay_secrecy::scenario::SEED_ENV;

fn seed_column(path: &std::path::Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap()[6].to_owned()).collect()
}

#[test]
fn environment_seed_applies_unless_a_flag_is_given() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    std::fs::write(&scenario, "[run]\nseed = 11\nn_trials = 500\n").unwrap();

    let run = |name: &str, env: Option<&str>, flag: Option<&str>| {
        let prefix = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_relay-secrecy"));
        cmd.env_remove(SEED_ENV);
        if let Some(v) = env {
            cmd.env(SEED_ENV, v);
        }
        cmd.args(["single", "--scenario", scenario.to_str().unwrap()]);
        cmd.args(["--output", prefix.to_str().unwrap()]);
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        seed_column(&prefix.with_extension("csv"))
    };

    assert_eq!(run("file", None, None), ["11"]);
    assert_eq!(run("env", Some("99"), None), ["99"]);
    assert_eq!(run("flag", Some("99"), Some("5")), ["5"]);

    let mut bad = Command::new(env!("CARGO_BIN_EXE_relay-secrecy"));
    bad.env(SEED_ENV, "not-a-number").args(["single", "--trials", "10"]);
    bad.args(["--output", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(bad.output().unwrap().status.code(), Some(1));
}
