use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["hartogs"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = hartogs::cli::run_command_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?} failed: {err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    validate(&v);
    v
}

fn schema() -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn validate(v: &Value) {
    let root = schema();
    let mut errors = Vec::new();
    check(&root, &root, v, "$", &mut errors);
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

fn is_rational(s: &str) -> bool {
    let int = |t: &str| {
        let t = t.strip_prefix('-').unwrap_or(t);
        !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
    };
    match s.split_once('/') {
        Some((p, q)) => int(p) && !q.starts_with('-') && int(q) && q != "0",
        None => int(s),
    }
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        other => panic!("unknown type {other}"),
    }
}

/// Validator for the keyword subset used by the shipped schema. Unknown
/// keywords abort so that the schema cannot silently outgrow it.
fn check(root: &Value, schema: &Value, v: &Value, path: &str, errors: &mut Vec<String>) {
    let obj = schema.as_object().expect("schema node must be an object");
    for (key, rule) in obj {
        match key.as_str() {
            "$schema" | "$id" | "title" | "description" | "$defs" => {}
            "$ref" => {
                let name = rule.as_str().unwrap().strip_prefix("#/$defs/").expect("local ref");
                check(root, &root["$defs"][name], v, path, errors);
            }
            "type" => {
                let ok = match rule {
                    Value::String(t) => type_matches(t, v),
                    Value::Array(ts) => ts.iter().any(|t| type_matches(t.as_str().unwrap(), v)),
                    _ => panic!("bad type rule"),
                };
                if !ok {
                    errors.push(format!("{path}: expected {rule}, got {v}"));
                }
            }
            "required" => {
                if let Some(map) = v.as_object() {
                    for r in rule.as_array().unwrap() {
                        if !map.contains_key(r.as_str().unwrap()) {
                            errors.push(format!("{path}: missing {r}"));
                        }
                    }
                }
            }
            "properties" => {
                if let Some(map) = v.as_object() {
                    for (k, sub) in rule.as_object().unwrap() {
                        if let Some(x) = map.get(k) {
                            check(root, sub, x, &format!("{path}.{k}"), errors);
                        }
                    }
                }
            }
            "items" => {
                if let Some(items) = v.as_array() {
                    for (i, x) in items.iter().enumerate() {
                        check(root, rule, x, &format!("{path}[{i}]"), errors);
                    }
                }
            }
            "minItems" | "maxItems" => {
                if let Some(items) = v.as_array() {
                    let bound = rule.as_u64().unwrap() as usize;
                    let ok = if key == "minItems" { items.len() >= bound } else { items.len() <= bound };
                    if !ok {
                        errors.push(format!("{path}: {key} {bound} violated by length {}", items.len()));
                    }
                }
            }
            "minimum" => {
                if let Some(x) = v.as_f64() {
                    if x < rule.as_f64().unwrap() {
                        errors.push(format!("{path}: {x} below minimum {rule}"));
                    }
                }
            }
            "enum" => {
                if !rule.as_array().unwrap().contains(v) {
                    errors.push(format!("{path}: {v} not in {rule}"));
                }
            }
            "oneOf" => {
                let matching = rule
                    .as_array()
                    .unwrap()
                    .iter()
                    .filter(|sub| {
                        let mut e = Vec::new();
                        check(root, sub, v, path, &mut e);
                        e.is_empty()
                    })
                    .count();
                if matching != 1 {
                    errors.push(format!("{path}: {matching} oneOf branches match"));
                }
            }
            "format" => {
                assert_eq!(rule, "rational", "unsupported format");
                if let Some(s) = v.as_str() {
                    if !is_rational(s) {
                        errors.push(format!("{path}: {s:?} is not p/q"));
                    }
                }
            }
            other => panic!("validator does not support keyword {other}"),
        }
    }
}

#[test]
fn validator_rejects_bad_reports() {
    let root = schema();
    let mut errors = Vec::new();
    let bad = serde_json::json!({
        "config": { "m": 0, "n": 1 },
        "sharp_range": { "lo": "4/3", "hi": 4.0 },
        "threshold": "5/0",
        "schur": { "A": "1", "eps_window": ["1/2"], "p_interval": { "lo": "1", "hi": "2" } }
    });
    check(&root, &root, &bad, "$", &mut errors);
    assert_eq!(errors.len(), 4, "{errors:#?}");
}

#[test]
fn range_example() {
    let v = run_json(&["range", "--m", "1", "--l", "1", "--n", "1", "--format", "json"]);
    assert_eq!(v["sharp_range"]["lo"], "4/3");
    assert_eq!(v["sharp_range"]["hi"], "4");
    assert_eq!(v["config"]["m"], 1);
    assert_eq!(v["schur"]["p_interval"], v["sharp_range"]);
    let v = run_json(&["range", "--m", "1", "--l", "1", "--n", "2"]);
    assert_eq!(v["sharp_range"]["lo"], "3/2");
    assert_eq!(v["sharp_range"]["hi"], "3");
}

#[test]
fn kernel_example() {
    let v = run_json(&["kernel", "--m", "1", "--l", "1", "--n", "1", "--a", "0", "--b", "0.5"]);
    let pi2 = std::f64::consts::PI.powi(2);
    let closed = v["closed"][0].as_f64().unwrap();
    assert!((closed - 8.0 / pi2).abs() < 1e-14);
    assert_eq!(v["closed"][1].as_f64().unwrap(), 0.0);
    assert!((v["bound"].as_f64().unwrap() - 8.0).abs() < 1e-14);
    assert!((v["ratio"].as_f64().unwrap() - 1.0 / pi2).abs() < 1e-14);
    let series = v["series"]["value"][0].as_f64().unwrap();
    assert!((series - closed).abs() < 1e-12 * closed);
}

#[test]
fn kernel_complex_arguments() {
    // classical kernel b / (pi^2 (1 - b)^2 (b - a)^2)
    let v = run_json(&["kernel", "--m", "1", "--l", "1", "--a", "0.1,0.2", "--b", "0.3,-0.4"]);
    let (a, b) = (num_complex::Complex64::new(0.1, 0.2), num_complex::Complex64::new(0.3, -0.4));
    let one = num_complex::Complex64::new(1.0, 0.0);
    let expect = b / (std::f64::consts::PI.powi(2) * (one - b).powi(2) * (b - a).powi(2));
    let got = num_complex::Complex64::new(v["closed"][0].as_f64().unwrap(), v["closed"][1].as_f64().unwrap());
    assert!((got - expect).norm() < 1e-13 * expect.norm());
}

#[test]
fn counterexample_example() {
    let v = run_json(&["counterexample", "--m", "3", "--l", "2", "--n", "1"]);
    assert_eq!(v["j0"], 1);
    assert_eq!(v["eta"], serde_json::json!([1, -2]));
    assert_eq!(v["threshold"], "5/2");
    assert_eq!(v["certificate"]["divergent_at_threshold"], true);
    assert_eq!(v["certificate"]["finite_below"], true);
    assert_eq!(v["certificate"]["truncated_integrals"]["verdict"], "Divergent");
}

#[test]
fn every_subcommand_validates() {
    run_json(&["kernel", "--m", "3", "--l", "2", "--a", "0.1,0.05", "--b", "0.4", "--residue", "1"]);
    run_json(&["kernel", "--gamma", "sqrt2", "--b", "0.3"]);
    run_json(&["project", "--m", "2", "--l", "1", "--eta1", "1", "--eta2", "-1"]);
    run_json(&["project", "--m", "1", "--l", "1", "--eta2", "1", "--numeric", "--radial", "8", "--angular", "16", "--levels", "1", "--targets", "2"]);
    run_json(&["verify", "schur", "--m", "1", "--l", "1", "--epsilon", "0.5", "--samples", "500", "--probes", "6", "--seed", "1"]);
    run_json(&["verify", "kernel", "--m", "2", "--l", "1", "--samples", "10", "--bound-samples", "50", "--seed", "1"]);
    run_json(&["verify", "reproducing", "--m", "1", "--l", "1", "--radial", "8", "--angular", "16", "--levels", "1", "--targets", "2"]);
    run_json(&["verify", "auxiliary", "--kind", "ball", "--n", "2", "--epsilon", "0.3", "--points", "0,0.5"]);
    run_json(&["verify", "auxiliary", "--kind", "disk", "--epsilon", "0.5", "--beta", "-0.5"]);
    run_json(&["norms", "--m", "3", "--l", "2", "--alpha", "1", "--beta", "-1", "--p", "2"]);
    run_json(&["norms", "--gamma", "sqrt2", "--n", "2", "--alpha", "1,0", "--beta", "0"]);
    let v = run_json(&["irrational", "--gamma", "sqrt2", "--p", "3"]);
    assert_eq!(v["irrational"]["witness"]["outcome"], "found");
    let v = run_json(&["irrational", "--gamma", "sqrt2", "--p", "2", "--max-m", "1000"]);
    assert_eq!(v["irrational"]["witness"]["outcome"], "not_found");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["range", "--m", "1", "--l", "1", "--bogus"]).0, 2);
    assert_eq!(run(&["range"]).0, 2);
    assert_eq!(run(&["range", "--m", "1", "--l", "1", "--gamma", "2"]).0, 2);
    assert_eq!(run(&["range", "--m", "0", "--l", "1"]).0, 2);
    assert_eq!(run(&["range", "--gamma", "sqrt2"]).0, 2);
    assert_eq!(run(&["irrational", "--gamma", "3/2"]).0, 2);
    assert_eq!(run(&["kernel", "--m", "1", "--l", "1", "--a", "x", "--b", "0.5"]).0, 2);
    assert_eq!(run(&["project", "--m", "1", "--l", "1", "--eta2", "3"]).0, 2);
    // singular kernel at b = 1 is a numerical failure
    let (code, _, err) = run(&["kernel", "--m", "1", "--l", "1", "--a", "0", "--b", "1"]);
    assert_eq!(code, 3, "{err}");
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("counterexample"));
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn strict_mode_requires_seed() {
    let args = ["verify", "schur", "--m", "1", "--l", "1", "--epsilon", "0.5", "--samples", "200", "--probes", "3"];
    let (code, _, err) = run(&args);
    assert_eq!(code, 0);
    assert!(err.contains("seed"));
    let mut strict = vec!["--strict"];
    strict.extend_from_slice(&args);
    let (code, _, err) = run(&strict);
    assert_eq!(code, 2);
    assert!(err.contains("--seed"));
    strict.extend_from_slice(&["--seed", "3"]);
    assert_eq!(run(&strict).0, 0);
}

#[test]
fn csv_and_text_formats() {
    let (code, out, _) = run(&["range", "--m", "3", "--l", "2", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["key", "value"]);
    let rows: Vec<(String, String)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert!(rows.contains(&("sharp_range.lo".into(), "5/3".into())));
    assert!(rows.contains(&("schur.eps_window.0".into(), "1/3".into())));
    let (code, out, _) = run(&["range", "--m", "3", "--l", "2", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "sharp_range.hi: 5/2"));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (code, out, _) = run(&["range", "--m", "1", "--l", "1", "--output", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    validate(&v);
}

#[test]
fn kernel_batch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pairs.csv");
    std::fs::write(
        &path,
        "re_z1,im_z1,re_w,im_w,re_s1,im_s1,re_t,im_t\n0.1,0.0,0.5,0.0,0.2,0.1,0.6,0.1\n0.0,0.0,0.5,0.0,0.0,0.0,1.0,0.0\n",
    )
    .unwrap();
    let (code, out, err) = run(&["kernel", "--m", "1", "--l", "1", "--batch", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert!(rdr.headers().unwrap().iter().any(|h| h == "closed_re"));
    assert_eq!(rdr.records().count(), 2);
}

#[test]
fn reports_identical_across_thread_counts() {
    let args = [
        "verify", "schur", "--m", "1", "--l", "1", "--epsilon", "0.75", "--samples", "4000", "--probes", "20", "--seed", "9",
    ];
    let out = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_hartogs"))
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        o.stdout
    };
    let one = out("1");
    assert!(!one.is_empty());
    assert_eq!(one, out("4"));
    assert_eq!(one, out("1"));
}
