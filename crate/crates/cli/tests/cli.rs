use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wcre::harness::{default_catalog, CheckId, CheckInstance};

fn wcre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcre")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = schema().iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

const EXP1: &str = r#"{"family":"exponential","lambda":1}"#;

fn catalog_subset(pick: &[(CheckId, &str)]) -> String {
    let chosen: Vec<CheckInstance> = default_catalog()
        .into_iter()
        .filter(|i| pick.iter().any(|(id, l)| i.check_id == *id && i.label.as_deref() == Some(*l)))
        .collect();
    assert_eq!(chosen.len(), pick.len());
    serde_json::to_string(&chosen).unwrap()
}

#[test]
fn compute_exponential_wcre() {
    let o = wcre(&["compute", "--quantity", "wcre", "--model", EXP1, "--weight", r#"{"kind":"constant","c":1}"#]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["finite"], true);
    assert_eq!(v["quantity"], "wcre");
    assert!(v["error_estimate"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["inputs"]["models"][0]["family"], "exponential");
}

#[test]
fn compute_relative_of_identical_models_is_zero() {
    let g = r#"{"family":"gamma","k":2,"theta":0.5}"#;
    let o = wcre(&["compute", "--quantity", "relative", "--model", g, "--model", g]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn compute_growing_weight_is_divergent() {
    let o = wcre(&["compute", "--quantity", "wcre", "--model", EXP1, "--weight", r#"{"kind":"exponential","r":-2}"#]);
    assert_eq!(code(&o), 2);
    let v = stdout_json(&o);
    assert_eq!(v["finite"], false);
    assert!(v["value"].is_null());
}

#[test]
fn compute_mutual_of_independent_product_is_zero() {
    let m = r#"{"family":"independent_product","components":[{"family":"exponential","lambda":1},{"family":"gamma","k":2,"theta":0.5}]}"#;
    let o = wcre(&["compute", "--quantity", "mutual", "--model", m, "--grid", "64"]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["value"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn compute_csv_has_one_row() {
    let o = wcre(&["compute", "--quantity", "wce", "--model", r#"{"family":"uniform","a":0,"b":1}"#, "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "quantity,value,error_estimate,finite");
    let value: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 0.25).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    // unknown quantity is a usage error
    assert_eq!(code(&wcre(&["compute", "--quantity", "entropy", "--model", EXP1])), 64);
    assert_eq!(code(&wcre(&["suite"])), 64);
    // missing file, malformed model and out-of-range parameters are input errors
    assert_eq!(code(&wcre(&["compute", "--quantity", "wcre", "--model", "/no/such/model.json"])), 1);
    assert_eq!(code(&wcre(&["compute", "--quantity", "wcre", "--model", r#"{"family":"exponential"}"#])), 1);
    assert_eq!(code(&wcre(&["compute", "--quantity", "wcre", "--model", r#"{"family":"exponential","lambda":-1}"#])), 1);
    assert_eq!(code(&wcre(&["compute", "--quantity", "mutual", "--model", EXP1])), 1);
    // one subdivision cannot reach the tolerance
    let starved = r#"{"check_id":"GIBBS","models":[{"univariate":{"family":"gamma","k":0.3,"theta":1}},{"univariate":{"family":"weibull","lambda":1,"q":0.4}}],
        "weight":{"kind":"power","a":-0.9},
        "spec":{"rel_tol":1e-14,"abs_tol":1e-300,"max_subdivisions":1,"tail_mass":1e-10,"grid_points_per_dim":256}}"#;
    let o = wcre(&["check", "--catalog", starved]);
    assert_eq!(code(&o), 3);
    assert_eq!(stdout_json(&o)["error_kind"], "convergence");
}

#[test]
fn estimate_two_point_sample() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    std::fs::write(&path, "1\n2\n").unwrap();
    let o = wcre(&["estimate", "--sample", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    // F̄ = 1/2 on [1, 2): (1/2)·ln 2
    assert!((v["value"].as_f64().unwrap() - 0.5 * 2f64.ln()).abs() < 1e-12);
    assert!((v["value"].as_f64().unwrap() - 0.346574).abs() < 1e-6);
    assert_eq!(v["n"], 2);
}

#[test]
fn estimate_single_row_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    std::fs::write(&path, "# one observation\nvalue\n3.5\n").unwrap();
    let o = wcre(&["estimate", "--sample", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn estimate_bad_row_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    std::fs::write(&path, "1\n2\nabc\n").unwrap();
    let o = wcre(&["estimate", "--sample", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn experiment_table_decreases() {
    let o = wcre(&["estimate", "--experiment", "--model", EXP1, "--sizes", "100,1000", "--reps", "50"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,mean_abs_err,sd"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], 100.0);
    assert!(rows[1][1] < rows[0][1], "{rows:?}");
}

#[test]
fn suite_reports_validate_and_count_verdicts() {
    let catalog = catalog_subset(&[(CheckId::Gibbs, "equal_laws"), (CheckId::Gibbs, "reversed"), (CheckId::SurvIdentity, "weibull")]);
    let o = wcre(&["suite", "--catalog", &catalog, "--jobs", "1"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_valid(&v);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert_eq!(reports[0]["verdict"], "PASS");
    assert!(reports[0]["slack"].as_f64().unwrap().abs() <= 1e-10);
    assert_eq!(reports[1]["verdict"], "HYPOTHESIS_NOT_MET");
    let summary = String::from_utf8(o.stderr).unwrap();
    let gibbs = summary.lines().find(|l| l.starts_with("GIBBS")).unwrap();
    assert!(gibbs.contains("HYPOTHESIS_NOT_MET 1") && gibbs.contains("PASS 1"), "{gibbs}");
    assert!(summary.lines().last().unwrap().contains("0 FAIL"));
}

#[test]
fn suite_output_is_deterministic() {
    let catalog = catalog_subset(&[(CheckId::GiniLb, "exponential"), (CheckId::Subadd, "fgm_positive"), (CheckId::MaxWeibull, "gamma")]);
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = wcre(&["suite", "--catalog", &catalog, "--jobs", jobs, "--seed", "7", "--grid", "64", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        // with --out the summary goes to stdout
        assert!(String::from_utf8(o.stdout).unwrap().contains("SUBADD"));
        let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{name}.meta.json"))).unwrap()).unwrap();
        assert!(meta["created_unix"].as_u64().unwrap() > 0);
        std::fs::read(out).unwrap()
    };
    let a = run("a.json", "1");
    let b = run("b.json", "1");
    let c = run("c.json", "2");
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_valid(&serde_json::from_slice(&a).unwrap());
}

#[test]
fn check_emits_a_single_report() {
    let inst = catalog_subset(&[(CheckId::Hadamard, "diagonal")]);
    let one: Value = serde_json::from_str(&inst).unwrap();
    let o = wcre(&["check", "--catalog", &one[0].to_string(), "--grid", "128"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!(v.is_object());
    assert_valid(&v);
    assert_eq!(v["verdict"], "PASS");
}

#[test]
fn report_tabulates_saved_suite() {
    let catalog = catalog_subset(&[(CheckId::Gibbs, "equal_laws"), (CheckId::Gibbs, "reversed")]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(code(&wcre(&["suite", "--catalog", &catalog, "--out", out.to_str().unwrap()])), 0);
    let o = wcre(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "check_id,label,variant,verdict,hypothesis_met,lhs,rhs,slack,tolerance");
    assert!(lines[1].starts_with("GIBBS,equal_laws,,PASS,true,"));
    assert!(lines[2].starts_with("GIBBS,reversed,,HYPOTHESIS_NOT_MET,false,"));
}
