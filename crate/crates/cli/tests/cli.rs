use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fibtrib");
const Q105: &str = "20120013979896675119357414743592977629715414121119669783";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn schema() -> serde_json::Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/verify-report.schema.json");
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_json_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["verify", "--json", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["overall"], "PROOF-REPLAYED");
    assert_eq!(report["exit_code"], 0);
    let v = jsonschema::validator_for(&schema()).unwrap();
    let errors: Vec<String> = v.iter_errors(&report).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
    assert!(fs::read_to_string(&out).unwrap().contains(Q105));
    assert!(stdout(&o).contains("overall: PROOF-REPLAYED"));
}

#[test]
fn verify_json_to_stdout() {
    let o = run(&["verify", "--json", "-"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["overall"], "PROOF-REPLAYED");
}

#[test]
fn perturbed_golden_table_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let table = fibtrib_golden().replace(" 13:12:233:504", "");
    fs::write(dir.path().join("golden.txt"), table).unwrap();
    let cfg = dir.path().join("verify.toml");
    fs::write(&cfg, "golden_table = \"golden.txt\"\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAILED(search)"));
}

fn fibtrib_golden() -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/golden_table.txt");
    fs::read_to_string(p).unwrap()
}

#[test]
fn precision_cap_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("verify.toml");
    fs::write(&cfg, "precision_initial = 64\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--precision-max", "64"]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
}

#[test]
fn bad_config_exits_five() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("verify.toml");
    fs::write(&cfg, "precision_factor = 1\n").unwrap();
    assert_eq!(code(&run(&["verify", "--config", cfg.to_str().unwrap()])), 5);
    assert_eq!(code(&run(&["verify", "--config", "/nonexistent/verify.toml"])), 5);
    assert_eq!(code(&run(&["frobnicate"])), 5);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn small_subcommands() {
    let o = run(&["cf", "tau"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("[0, 1, 3, 1, 3, 13, 2, 1, 8, 3, 1, 5]"), "{}", stdout(&o));

    let o = run(&["seq", "fibonacci", "26"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("121393"));

    let o = run(&["search", "--n-max", "30", "--m-max", "25"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("-22"));

    let o = run(&[
        "reduce",
        "--tau",
        "tau",
        "--mu-expr",
        "stage2:90",
        "--A",
        "50",
        "--B",
        "alpha",
        "--convergent-index",
        "105",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains(Q105), "{}", stdout(&o));
    assert!(stdout(&o).contains("Positive"), "{}", stdout(&o));
}
