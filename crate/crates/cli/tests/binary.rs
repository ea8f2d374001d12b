use std::process::{Command, Output};

fn ggp(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ggp"));
    c.args(args);
    for k in ["GGP_FIELD", "GGP_SEED", "GGP_SAMPLES", "GGP_HEIGHT"] {
        c.env_remove(k);
    }
    c.envs(env.iter().copied());
    c.output().expect("binary runs")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn classify_json_and_env_field() {
    let o = ggp(&["classify", "--diag", "1,1,1", "--json"], &[("GGP_FIELD", "R")]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["schema"], "1");
    assert_eq!(v["field"], "R");
    assert_eq!(v["invariants"]["signature"], serde_json::json!([3, 0]));
    // the flag wins over the environment
    let v = json(&ggp(&["classify", "--diag", "1,1,1", "--json", "--field", "Q3"], &[("GGP_FIELD", "R")]));
    assert_eq!(v["field"], "Q3");
}

#[test]
fn errors_have_exit_code_two() {
    assert_eq!(ggp(&["verify", "no-such-suite"], &[]).status.code(), Some(2));
    assert_eq!(ggp(&["classify", "--config", "{\"diag\": [1,"], &[]).status.code(), Some(2));
    assert_eq!(ggp(&["classify", "--diag", "1", "--field", "Q4"], &[]).status.code(), Some(2));
}

#[test]
fn passing_suite_exits_zero_and_failing_one() {
    let o = ggp(&["verify", "weyl-section-signs", "--json"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["reports"][0]["instances"], 28);
    assert!(v["reports"][0].get("wall_ms").is_none());
    let o = ggp(&["verify", "germ-orbit-sum", "--json"], &[]);
    assert_eq!(o.status.code(), Some(1));
    let f = &json(&o)["reports"][0]["failures"][0];
    assert!(f["shrunk"].is_array());
}

#[test]
fn seed_changes_instances() {
    let a = ggp(&["slice", "factorize", "--json", "--seed", "1"], &[]);
    let b = ggp(&["slice", "factorize", "--json"], &[("GGP_SEED", "1")]);
    let c = ggp(&["slice", "factorize", "--json", "--seed", "2"], &[]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(json(&a)["recovered_planted"], true);
}
