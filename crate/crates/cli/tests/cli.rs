use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const BIN: &str = env!("CARGO_BIN_EXE_excite-prep");

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn excite(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("EXCITE_PREP_THREADS").output().expect("binary runs")
}

fn run_in(dir: &Path, sub: &str, scenario: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--scenario", scenario.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    excite(&args)
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    names
}

fn digest(dir: &Path) -> Vec<(String, String)> {
    listing(dir)
        .into_iter()
        .map(|name| {
            let bytes = std::fs::read(dir.join(&name)).unwrap();
            let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            (name, hex)
        })
        .collect()
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn minimal_two_level_emits_probability_table() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in(out.path(), "compare", &repo("scenarios/two_level.json"), &["--no-timestamp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(listing(out.path()), vec!["probabilities.csv"]);
    let text = std::fs::read_to_string(out.path().join("probabilities.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    for col in ["p_exact_a1_k1", "p_order1_a1_k1", "p_order3_a1_k1", "p_exact_a0_k0"] {
        assert!(header.contains(&col), "missing {col}");
    }
    assert_eq!(text.lines().count(), 1 + 21);
    for line in text.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), header.len());
        let exact: f64 = fields[1..5].iter().sum();
        assert!((exact - 1.0).abs() < 1e-10);
    }
}

#[test]
fn cost_only_scenario_skips_dynamics() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in(out.path(), "run", &repo("scenarios/cost_only.json"), &["--no-timestamp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(listing(out.path()), vec!["cost.csv", "cost.json", "routes.json"]);
    let csv = std::fs::read_to_string(out.path().join("cost.csv")).unwrap();
    let reps: f64 = csv
        .lines()
        .find_map(|l| l.strip_prefix("excitation,repetitions,"))
        .expect("repetitions row")
        .parse()
        .unwrap();
    assert!((reps - 16.0).abs() < 1e-9);
}

#[test]
fn reference_scenario_is_deterministic() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let scenario = repo("scenarios/reference.json");
    for dir in [a.path(), b.path()] {
        assert!(run_in(dir, "run", &scenario, &["--no-timestamp"]).status.success());
    }
    let o = Command::new(BIN)
        .args(["run", "--scenario", scenario.to_str().unwrap(), "--out", c.path().to_str().unwrap(), "--no-timestamp", "--parallel"])
        .env("EXCITE_PREP_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(digest(a.path()), digest(b.path()));
    assert_eq!(digest(a.path()), digest(c.path()));
}

#[test]
fn reference_scenario_matches_golden_hashes() {
    let out = tempfile::tempdir().unwrap();
    assert!(run_in(out.path(), "run", &repo("scenarios/reference.json"), &["--no-timestamp"]).status.success());
    let golden = std::fs::read_to_string(repo("scenarios/reference.sha256")).unwrap();
    let expected: Vec<(String, String)> = golden
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (hash, name) = l.split_once("  ").unwrap();
            (name.to_string(), hash.to_string())
        })
        .collect();
    assert_eq!(digest(out.path()), expected);
}

#[test]
fn timestamp_header_is_suppressible() {
    let out = tempfile::tempdir().unwrap();
    assert!(run_in(out.path(), "plan", &repo("scenarios/two_level.json"), &[]).status.success());
    let plan = std::fs::read_to_string(out.path().join("plan.json")).unwrap();
    assert!(plan.contains("generated_unix"));
    assert!(run_in(out.path(), "evolve", &repo("scenarios/two_level.json"), &[]).status.success());
    let csv = std::fs::read_to_string(out.path().join("evolve.csv")).unwrap();
    assert!(csv.starts_with("# generated_unix="));
}

fn validator(schema: &str) -> jsonschema::Validator {
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(repo(schema)).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn reports_validate_against_published_schema() {
    let reports = validator("docs/report.schema.json");
    let scenarios = validator("docs/scenario.schema.json");
    let out = tempfile::tempdir().unwrap();
    for s in ["reference", "two_level", "cost_only"] {
        let path = repo(&format!("scenarios/{s}.json"));
        let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(scenarios.is_valid(&value), "{s}");
        assert!(run_in(out.path(), "run", &path, &[]).status.success());
    }
    assert!(excite(&["gen", "--n", "3", "--seed", "5", "--out", out.path().to_str().unwrap()]).status.success());
    let mut seen = 0;
    for name in listing(out.path()).into_iter().filter(|n| n.ends_with(".json")) {
        let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.path().join(&name)).unwrap()).unwrap();
        let errors: Vec<String> = reports.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
        seen += 1;
    }
    // plan, block_encoding, cost, routes, system
    assert_eq!(seen, 5);
}

#[test]
fn generated_system_feeds_back_into_a_scenario() {
    let out = tempfile::tempdir().unwrap();
    assert!(excite(&["gen", "--n", "3", "--seed", "9", "--out", out.path().to_str().unwrap(), "--no-timestamp"]).status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.path().join("system.json")).unwrap()).unwrap();
    let scenario = serde_json::json!({
        "schema": "excite-prep/scenario/v1",
        "system": report["data"]["system"],
        "protocol": {"w": 0.5, "lambda": 0.01, "target": 1},
        "outputs": ["plan"]
    });
    let path = write_scenario(out.path(), &scenario.to_string());
    let o = run_in(out.path(), "run", &path, &["--no-timestamp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn schema_errors_exit_2_with_location() {
    let out = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo("scenarios/two_level.json")).unwrap().replace("\"order\": 3", "\"order\": -3");
    let path = write_scenario(out.path(), &text);
    let o = run_in(out.path(), "run", &path, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("perturbation.order") && err.contains("line"), "{err}");

    let o = run_in(out.path(), "compare", &repo("scenarios/two_level.json"), &["--order", "9"]);
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(BIN)
        .args(["plan", "--scenario", repo("scenarios/two_level.json").to_str().unwrap(), "--out", out.path().to_str().unwrap()])
        .env("EXCITE_PREP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(excite(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_1() {
    // resonant protocol leaves no M to feed the cost model
    let out = tempfile::tempdir().unwrap();
    let body = r#"{
        "schema": "excite-prep/scenario/v1",
        "system": {"explicit": {"energies": [0, 1], "coupling_re": [[0, 1], [1, 0]]}},
        "protocol": {"w": 1.0, "lambda": 0.01, "target": 1},
        "cost": {"d0": 4, "dj": 4, "prep_sel": 100, "lambda_df_he": 2, "delta0": 0.01, "deltaj": 0.01,
                 "a": 0.9, "b": 0.9, "mu_j0": 0.5, "w": 0.9, "lambda": 0.01, "w_j0": 1.0, "epsilon": 0.001},
        "outputs": ["cost"]
    }"#;
    let path = write_scenario(out.path(), body);
    let o = run_in(out.path(), "run", &path, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn overrides_change_the_grid() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in(out.path(), "evolve", &repo("scenarios/two_level.json"), &["--no-timestamp", "--tmax", "2", "--tsteps", "3"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.path().join("evolve.csv")).unwrap();
    let ts: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ts, vec!["0", "1", "2"]);
}
