use std::fs;

use fibtrib::bruteforce::GOLDEN_TABLE;
use fibtrib::pipeline::{emit_report, verify, Config, ConfigError, Format, Step, StepState};

fn without_timestamp(bytes: Vec<u8>) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn default_run_is_replayed_and_deterministic() {
    let a = verify(&Config::default()).unwrap();
    assert_eq!(a.overall, "PROOF-REPLAYED");
    assert_eq!(a.exit_code, 0);
    assert!(a.steps.iter().all(|s| s.state == StepState::Passed));
    let b = verify(&Config { workers: Some(1), ..Config::default() }).unwrap();
    assert_eq!(without_timestamp(emit_report(&a, Format::Json)), without_timestamp(emit_report(&b, Format::Json)));

    let text = String::from_utf8(emit_report(&a, Format::Text)).unwrap();
    assert!(text.contains("overall: PROOF-REPLAYED"), "{text}");
    assert!(text.contains("-271"));
}

#[test]
fn perturbed_golden_table_fails_the_search_step() {
    let dir = tempfile::tempdir().unwrap();
    let table = GOLDEN_TABLE.replace(" 12:10:144:149", "");
    assert_ne!(table, GOLDEN_TABLE, "perturbation did not apply");
    fs::write(dir.path().join("golden.txt"), table).unwrap();
    let cfg_path = dir.path().join("verify.toml");
    fs::write(&cfg_path, "golden_table = \"golden.txt\"\n").unwrap();

    let r = verify(&Config::load(&cfg_path).unwrap()).unwrap();
    assert_eq!(r.exit_code, 1);
    assert_eq!(r.overall, format!("FAILED({})", Step::Search));
    assert_eq!(r.step(Step::Search).unwrap().state, StepState::Failed);
}

#[test]
fn campaign_without_escalation_exits_three() {
    let r = verify(&Config { max_escalations: Some(0), ..Config::default() }).unwrap();
    assert_eq!(r.exit_code, 3);
    assert_eq!(r.step(Step::Search).unwrap().state, StepState::Passed);
    assert_eq!(r.step(Step::Campaign).unwrap().state, StepState::Failed);
}

#[test]
fn precision_cap_exits_four() {
    let r = verify(&Config { precision_initial: 64, precision_max: 64, ..Config::default() }).unwrap();
    assert_eq!(r.exit_code, 4);
    assert_eq!(r.step(Step::Campaign).unwrap().state, StepState::PrecisionExhausted);
}

#[test]
fn small_search_range_does_not_cover_the_campaign() {
    let r = verify(&Config { n_max: 200, ..Config::default() }).unwrap();
    assert_ne!(r.exit_code, 0);
    assert!(r.overall.starts_with("FAILED"));
}

#[test]
fn config_errors() {
    assert!(matches!(Config::from_toml("precision_factor = 1", None), Err(ConfigError::Invalid(_))));
    assert!(matches!(Config::from_toml("unknown_key = 3", None), Err(ConfigError::Invalid(_))));
    assert!(matches!(Config::from_toml("campaign_modulus = \"eight\"", None), Err(ConfigError::Invalid(_))));
    let missing = Config::from_toml("golden_table = \"/nonexistent/golden.txt\"", None).unwrap();
    assert!(matches!(verify(&missing), Err(ConfigError::Io { .. })));
}
