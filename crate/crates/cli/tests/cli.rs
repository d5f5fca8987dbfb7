use kmsgraph_cli::{run_to, VERB_TABLE};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kmsgraph").chain(args.iter().copied());
    let code = run_to(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn every_verb_has_help() {
    for (verb, _) in VERB_TABLE {
        let (code, out, _) = run(&[verb, "--help"]);
        assert_eq!(code, 0, "{verb}");
        assert!(out.contains("Usage"), "{verb}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["no-such-verb"]).0, 2);
    assert_eq!(run(&["green", "--beta", "x"]).0, 2);
    assert_eq!(run(&["green", "--family", "golden", "--graph", "g.json", "--beta", "1"]).0, 2);
}

#[test]
fn precondition_failures_exit_2() {
    let (code, _, err) = run(&["green", "--family", "golden"]);
    assert_eq!(code, 2);
    assert!(err.contains("--beta is required"));
    assert_eq!(run(&["green", "--family", "nope", "--beta", "1"]).0, 2);
    assert_eq!(run(&["green", "--family", "golden", "--beta", "1", "--from", "zz"]).0, 2);
    assert_eq!(run(&["green", "--beta", "1"]).0, 2);
}

#[test]
fn golden_green_and_beta_set() {
    let r = json(&["beta-set", "--family", "golden"]);
    let beta0 = r["beta_set_shape"]["beta0"].as_f64().unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((beta0 - phi.ln()).abs() < 1e-9);
    let r = json(&["first-return", "--family", "golden", "--beta", &beta0.to_string()]);
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let r = json(&["green", "--family", "golden", "--beta", "1", "--from", "v0", "--to", "v0"]);
    assert_eq!(r["status"], "converged");
}

#[test]
fn pascal_names_with_commas() {
    let r = json(&["green", "--family", "pascal", "--beta", "1", "--from", "(1,1)", "--to", "(2,2)"]);
    let exact = 2.0 * (-2f64).exp();
    assert!((r["value"].as_f64().unwrap() - exact).abs() < 1e-15);
}

#[test]
fn json_output_is_deterministic_and_sorted() {
    let args = ["entropy", "--family", "golden"];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    let keys: Vec<&str> = a.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn csv_and_table_formats() {
    let (code, out, _) = run(&["example", "list", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("criterion,preset,title\n"));
    assert_eq!(out.lines().count(), 12);
    let (_, out, _) = run(&["beta-set", "--family", "golden", "--format", "table"]);
    assert!(out.contains("beta_set_shape.kind"));
}

#[test]
fn strict_undetermined_exits_3() {
    let args = ["summability", "--family", "car-phase", "--beta", "2", "--ray", "car-left", "--depth", "30"];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    assert!(out.contains("\"undetermined\""));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(run(&strict).0, 3);
}

#[test]
fn ends_reach_and_classes() {
    let r = json(&[
        "ends",
        "--family",
        "dihedral-cayley",
        "--depth",
        "12",
        "--ray",
        "dihedral-top:0",
        "--ray",
        "dihedral-top:3",
        "--ray",
        "dihedral-bottom:0",
        "--reach",
        "t1,b-1",
        "--avoid",
        "t0",
    ]);
    assert_eq!(r["distinct_ends"], 2);
    assert_eq!(r["reach"]["reachable"], true);
}

#[test]
fn plan_and_apply_returns() {
    let plan = run(&["plan-returns", "--family", "ray-graph", "--depth", "24", "--h", "0.6931471805599453"]).1;
    let r = json(&["apply-returns", "--family", "ray-graph", "--depth", "24", "--plan", &plan]);
    let f = r["gamma"]["first_return_at_h"]["value"].as_f64().unwrap();
    assert!((f - 1.0).abs() < 1e-9);
}

#[test]
fn extremal_vector_feeds_boundary_test() {
    let base = ["--family", "car-phase", "--beta", "2", "--depth", "120", "--ray", "car-left"];
    let mut args = vec!["extremal-ray"];
    args.extend(base);
    args.extend(["--ray-len", "110"]);
    let vector = run(&args).1;
    let mut args = vec!["boundary-test"];
    args.extend(base);
    args.extend(["--vector", &vector, "--schedule", "10,20,40"]);
    let r = json(&args);
    assert_eq!(r["monotone"], true);
    assert!(r["final_deviation"].as_f64().unwrap() < 1e-3);
}

#[test]
fn examples_report_pass() {
    for name in ["golden", "pascal-green", "three-exit"] {
        let r = json(&["example", name]);
        assert_eq!(r["pass"], true, "{name}");
    }
    assert_eq!(run(&["example", "missing"]).0, 2);
}

#[test]
fn known_failure_does_not_fail_exit() {
    let (code, out, _) = run(&["example", "pascal-boundary"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["pass"], false);
    assert!(r["known_failure"].is_string());
}

#[test]
fn glue_emit_and_feasibility() {
    let spec = r#"{"h":0.5,"diagrams":[{"interval":{"lo":2,"hi":3,"lo_closed":true,"hi_closed":true},"diagram":"car"}]}"#;
    let r = json(&["glue", "--spec", spec, "--depth", "10"]);
    assert_eq!(r["family"], "glue");
    let r = json(&["glue", "--spec", spec, "--depth", "73", "--beta", "2.5"]);
    assert_eq!(r["extreme_count"], 2);
    let r = json(&["glue", "--spec", spec, "--depth", "73", "--beta", "1.8"]);
    assert_eq!(r["extreme_count"], 1);
}
