use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../core/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn constr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_constr"))
        .args(args)
        .env_remove("CONSTR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_true_and_false() {
    let o = constr(&["check", &fixture("cooperation.cgm"), "s0", "Oc[{a},{b}](p, q)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "true");

    let o = constr(&["check", &fixture("proactive_vs_reactive.cgm"), "s0", "Oa[{a},{b}](p, q)"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "false");
}

#[test]
fn check_json_and_explain() {
    let o = constr(&["--json", "check", &fixture("proactive_vs_reactive.cgm"), "s0", "Ob[{a},{b}](p, q)", "--explain"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["holds"], true);
    assert_eq!(v["state"], "s0");
    assert!(v["explanation"].is_object());
}

#[test]
fn unknown_state_is_an_input_error() {
    let o = constr(&["check", &fixture("cooperation.cgm"), "s9", "p"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("s9"));
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_formula_and_bad_model_are_input_errors() {
    let o = constr(&["check", &fixture("cooperation.cgm"), "s0", "Oc[{a}](p"]);
    assert_eq!(o.status.code(), Some(2));

    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "agents: a\nstates: s0\nactions s0 a: x\ngo s0 (x) -> s7").unwrap();
    let o = constr(&["check", f.path().to_str().unwrap(), "s0", "p"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("s7"));
}

#[test]
fn extension_lists_states() {
    let o = constr(&["--json", "extension", &fixture("cooperation.cgm"), "p & q"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["states"], serde_json::json!(["s2"]));
}

#[test]
fn bisim_cl_ok_constr_fails() {
    let m = fixture("oc_not_cl.cgm");
    let r = fixture("oc_not_cl.rel");
    let o = constr(&["bisim", &m, &r, "--logic", "cl"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "ok");

    let o = constr(&["--json", "bisim", &m, &r, "--logic", "constr"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], false);
    let failure = &v["failure"];
    assert!(failure["tag"].as_str().unwrap().ends_with("_c"), "{failure}");
}

#[test]
fn bisim_greatest_and_missing_relation() {
    let m = fixture("oc_not_cl.cgm");
    let o = constr(&["bisim", &m, "--greatest", "--logic", "cl"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("s0 ~ t0"));

    let o = constr(&["bisim", &m, "--greatest"]);
    assert!(!stdout(&o).contains("s0 ~ t0"));

    let o = constr(&["bisim", &m]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn distinguish_separates_and_checks_out() {
    let m = fixture("oc_not_cl.cgm");
    let o = constr(&["distinguish", &m, "s0", "t0"]);
    assert_eq!(o.status.code(), Some(0));
    let phi = stdout(&o).trim().to_string();
    assert_eq!(constr(&["check", &m, "s0", &phi]).status.code(), Some(0));
    assert_eq!(constr(&["check", &m, "t0", &phi]).status.code(), Some(1));

    let o = constr(&["distinguish", &m, "s0", "s0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_zero_budget_fails() {
    let o = constr(&["validate", "--schemes", "ObAntiMon", "--budget", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn validate_valid_scheme_passes() {
    let o = constr(&["validate", "--schemes", "Oc5", "--bounds", "2,1,2", "--no-random"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("suite: PASS"));
}

#[test]
fn validate_anti_monotonicity_counterexample() {
    let o = constr(&["--json", "validate", "--schemes", "ObAntiMon", "--no-exhaustive", "--no-random"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["verdicts"][0]["counterexample"].is_object());
}

#[test]
fn validate_reads_toml_config() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "corpus = true\ninclude = [\"Ob1\"]\n\n[random]\nagents = [2, 2]\nstates = [1, 2]\nactions = [1, 2]\natoms = [\"p\", \"q\"]\ncount = 50\nseeds = [7]").unwrap();
    let o = constr(&["validate", "--config", f.path().to_str().unwrap(), "--no-exhaustive"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("seed 7"));

    writeln!(f, "bogus = 1").unwrap();
    let o = constr(&["validate", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_constr"))
        .args(["validate", "--schemes", "Oc1", "--no-exhaustive", "--no-corpus", "--random-count", "20"])
        .env("CONSTR_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("seed 99"));
}

#[test]
fn validate_unknown_scheme_is_input_error() {
    let o = constr(&["validate", "--schemes", "Nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corpus_passes() {
    let o = constr(&["corpus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn fmt_is_idempotent() {
    for name in ["cooperation.cgm", "oc_not_cl.cgm", "beta_anti_monotonicity.cgm"] {
        let once = stdout(&constr(&["fmt", &fixture(name)]));
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(once.as_bytes()).unwrap();
        let twice = stdout(&constr(&["fmt", f.path().to_str().unwrap()]));
        assert_eq!(once, twice, "{name}");
    }
}
