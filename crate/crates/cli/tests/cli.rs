// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdescent"))
        .args(args)
        .env_remove("QDESCENT_CAS_ENDPOINT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json(args: &[&str]) -> Value {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).expect("valid JSON")
}

fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn leaf_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) if a.is_empty() => "[]".into(),
        Value::Object(o) if o.is_empty() => "{}".into(),
        other => other.to_string(),
    }
}

fn flatten(v: &Value, prefix: &str, out: &mut BTreeMap<String, String>) {
    match v {
        Value::Object(o) if !o.is_empty() => {
            for (k, x) in o {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(x, &p, out);
            }
        }
        Value::Array(a) if !a.is_empty() => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, &format!("{prefix}[{i}]"), out);
            }
        }
        leaf => {
            out.insert(prefix.to_string(), leaf_text(leaf));
        }
    }
}

fn parse_key_values(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .take_while(|l| !l.is_empty())
        .map(|l| {
            let (k, v) = l.split_once(" = ").unwrap_or_else(|| panic!("malformed line {l:?}"));
            (k.trim_end().to_string(), v.to_string())
        })
        .collect()
}

fn solution_set(v: &Value) -> Vec<(i64, i64)> {
    let mut s: Vec<(i64, i64)> = v["result"]["solutions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["x"].as_i64().unwrap(), p["y"].as_i64().unwrap()))
        .collect();
    s.sort();
    s
}

const GOLDEN: [(&str, &[&str]); 6] = [
    ("mordell_minus1.json", &["mordell", "--d", "-1"]),
    ("mordell_minus2.json", &["mordell", "--d", "-2"]),
    ("mordell_minus5.json", &["mordell", "--d", "-5"]),
    ("mordell_minus6.json", &["mordell", "--d", "-6"]),
    ("mordell_minus13.json", &["mordell", "--d", "-13"]),
    ("class_number_minus6.json", &["class-number", "--d", "-6"]),
];

#[test]
fn golden_outputs_are_byte_stable() {
    for (file, args) in GOLDEN {
        let expected = std::fs::read_to_string(manifest_path(&format!("tests/golden/{file}"))).unwrap();
        for _ in 0..2 {
            let o = run(args);
            assert!(o.status.success());
            assert_eq!(stdout(&o), expected, "{file}");
        }
    }
}

#[test]
fn mordell_solution_sets() {
    let cases: [(&str, &[(i64, i64)]); 5] = [
        ("-1", &[(1, 0)]),
        ("-2", &[(3, -5), (3, 5)]),
        ("-5", &[]),
        ("-6", &[]),
        ("-13", &[(17, -70), (17, 70)]),
    ];
    for (d, expected) in cases {
        let v = json(&["mordell", "--d", d, "--brute-bound", "10000"]);
        assert_eq!(solution_set(&v), expected, "d = {d}");
        assert_eq!(v["result"]["method"], "descent");
        assert_eq!(v["result"]["cross_check"]["agrees"], true);
    }
}

#[test]
fn class_number_minus_six() {
    let v = json(&["class-number", "--d", "-6"]);
    for k in ["h", "analytic", "forms", "group"] {
        assert_eq!(v["result"][k], 2, "{k}");
    }
}

#[test]
fn table_and_json_carry_the_same_data() {
    let mut cases: Vec<Vec<&str>> = GOLDEN.iter().map(|(_, a)| a.to_vec()).collect();
    cases.push(vec!["mordell", "--d", "-13", "--trace"]);
    cases.push(vec!["class-group", "--d", "-30"]);
    cases.push(vec!["class-group", "--d", "-13", "--method", "mset", "--m", "1,2,3,4"]);
    cases.push(vec!["ideal", "--d", "-5", "--gen", "2", "--gen", "1+sqrt(-5)"]);
    cases.push(vec!["normalize", "--expr", "(x-y)*(x^2+x*y+y^2)", "--rhs", "x^3-y^3"]);
    cases.push(vec!["certify", "factor", "--n", "1111"]);
    for args in cases {
        let mut expected = BTreeMap::new();
        flatten(&json(&args), "", &mut expected);
        let mut targs = args.clone();
        targs.extend(["--format", "table"]);
        let table = run(&targs);
        assert!(table.status.success());
        assert_eq!(parse_key_values(&stdout(&table)), expected, "{args:?}");
    }
}

fn parse_sweep_table(text: &str) -> Vec<BTreeMap<String, String>> {
    let lines: Vec<&str> = text.lines().skip_while(|l| !l.starts_with('|')).collect();
    let cells = |l: &str| -> Vec<String> { l.trim_matches('|').split('|').map(|c| c.trim().to_string()).collect() };
    let header = cells(lines[0]);
    lines[2..].iter().map(|l| header.iter().cloned().zip(cells(l)).collect()).collect()
}

#[test]
fn sweep_matches_expected_counts_and_table() {
    let v = json(&["sweep", "--from", "-13", "--to", "-1", "--jobs", "3"]);
    let rows = v["result"]["rows"].as_array().unwrap();
    let counts: Vec<u64> = rows.iter().map(|r| r["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, [1, 2, 0, 4, 0, 0, 4, 1, 0, 0, 4, 0, 2]);
    let qualifying: Vec<i64> =
        rows.iter().filter(|r| r["qualifies"] == true).map(|r| r["d"].as_i64().unwrap()).collect();
    assert_eq!(qualifying, [-1, -2, -5, -6, -10, -13]);
    assert_eq!(v["result"]["all_agree"], true);

    let table = run(&["sweep", "--from", "-13", "--to", "-1", "--format", "table"]);
    assert!(table.status.success());
    let parsed = parse_sweep_table(&stdout(&table));
    assert_eq!(parsed.len(), rows.len());
    for (t, r) in parsed.iter().zip(rows) {
        assert_eq!(t["-d"], (-r["d"].as_i64().unwrap()).to_string());
        assert_eq!(t["count"], r["count"].to_string());
        assert_eq!(t["qualifies"], r["qualifies"].to_string());
        assert_eq!(t["h"], r["h"].to_string());
        assert_eq!(t["method"], r["method"].as_str().unwrap());
        let pts: Vec<String> = r["points"].as_array().unwrap().iter().map(|p| format!("({},{})", p[0], p[1])).collect();
        let expected = if pts.is_empty() { "-".to_string() } else { pts.join(" ") };
        assert_eq!(t["points"], expected);
    }
}

#[test]
fn sweep_is_independent_of_job_count() {
    let a = json(&["sweep", "--from", "-40", "--to", "-1", "--jobs", "1"]);
    let b = json(&["sweep", "--from", "-40", "--to", "-1", "--jobs", "4"]);
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["class-number", "--d", "-6"]), 0);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["--bogus"]), 64);
    assert_eq!(code(&["class-number"]), 64);
    assert_eq!(code(&["frobnicate"]), 64);
    assert_eq!(code(&["class-group", "--d", "-7"]), 2);
    assert_eq!(code(&["class-group", "--d", "-12"]), 2);
    assert_eq!(code(&["class-group", "--d", "-13", "--method", "mset", "--m", "1,2,3"]), 2);
    assert_eq!(code(&["mordell", "--d", "-4", "--brute-bound", "100"]), 2);
    assert_eq!(code(&["ideal", "--d", "-5", "--gen", "0"]), 1);
    assert_eq!(code(&["ideal", "--d", "-5", "--gen", "1+"]), 1);
    assert_eq!(code(&["certify", "factor", "--n", "1", "--live", "http://127.0.0.1:9/"]), 1);
}

#[test]
fn fallback_output_is_labelled_as_search() {
    let o = run(&["mordell", "--d", "-11", "--brute-bound", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["method"], "search, not proof");
    assert_eq!(solution_set(&v), [(3, -4), (3, 4), (15, -58), (15, 58)]);
}

#[test]
fn certify_from_fixture() {
    let fixture = manifest_path("fixtures/factor_1111.txt");
    let f = fixture.to_str().unwrap();
    let v = json(&["certify", "factor", "--n", "1111", "--fixture", f]);
    assert_eq!(v["result"]["verified"], true);
    assert_eq!(v["result"]["factors"], serde_json::json!([[11, 1], [101, 1]]));
    let wrong = run(&["certify", "factor", "--n", "1112", "--fixture", f]);
    assert_eq!(wrong.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&wrong.stderr).contains("transport"));
}

#[test]
fn timings_only_when_requested() {
    let plain = json(&["mordell", "--d", "-2"]);
    assert!(plain.get("durations_ms").is_none());
    let timed = json(&["mordell", "--d", "-2", "--timings"]);
    let d = timed["durations_ms"].as_object().unwrap();
    assert!(d.contains_key("solve"));
    assert!(d.values().all(|x| x.as_f64().unwrap() >= 0.0));
}

#[test]
fn mordell_trace_reaches_component_equations() {
    let v = json(&["mordell", "--d", "-13", "--trace"]);
    let traces = v["result"]["traces"].as_array().unwrap();
    assert_eq!(traces.len(), 2);
    for t in traces {
        assert_eq!(t["m"], 2);
        assert!(t["b"] == 1 || t["b"] == -1);
    }
}
