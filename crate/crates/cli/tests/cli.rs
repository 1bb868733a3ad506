use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use eulerian::rational;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eulerian")).args(args).env_remove("EULERIAN_BITS").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    json_of(&out)
}

fn fails(args: &[&str], code: i32, kind: &str) {
    let out = run(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    let v = json_of(&out);
    assert_eq!(v["error"]["kind"], kind, "{v}");
    assert!(v["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn table_rt(n: usize) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/rt_table.txt");
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.split_once(' ').filter(|(k, _)| *k == n.to_string()).map(|(_, v)| v.trim().to_string()))
        .unwrap()
}

fn q(v: &Value) -> BigRational {
    rational::parse(v.as_str().expect("rational as string")).unwrap()
}

#[test]
fn exact_rt_seven() {
    let v = ok(&["exact", "rt", "--n", "7"]);
    assert_eq!(v["result"]["value"], "2640");
    assert_eq!(v["command"], "exact rt");
    assert_eq!(v["inputs"]["n"], 7);
    assert_eq!(v["precision"]["exact"], true);
    assert!(v["timing"]["elapsed_ms"].is_number());
}

#[test]
fn exact_counts_beyond_u64_are_strings() {
    let v = ok(&["exact", "rt", "--n", "21"]);
    assert_eq!(v["result"]["value"], table_rt(21).as_str());
}

#[test]
fn exact_eo_complete_five() {
    let v = ok(&["exact", "eo", "--graph", &data("k5.edges")]);
    assert_eq!(v["result"]["value"], "24");
    let by_n = ok(&["exact", "eo", "--n", "5"]);
    assert_eq!(by_n["result"], v["result"]);
}

#[test]
fn exact_small_digraph_families() {
    // Three pairs each empty or doubled, or one of the two directed triangles.
    assert_eq!(ok(&["exact", "ed", "--n", "3"])["result"]["value"], "10");
    assert_eq!(ok(&["exact", "eog", "--n", "3"])["result"]["value"], "3");
}

#[test]
fn exit_codes_by_error_kind() {
    fails(&["exact", "rt", "--n", "4"], 2, "domain");
    fails(&["exact", "rt", "--n", "23"], 3, "size");
    fails(&["exact", "ed", "--n", "6"], 3, "size");
    fails(&["exact", "eo", "--graph", "/definitely/not/here.edges"], 4, "io");
    let path = temp_file("4\n1 2\n2 3\n3 4\n");
    fails(&["exact", "eo", "--graph", path.path().to_str().unwrap()], 2, "domain");
    fails(&["bounds", "--graph", path.path().to_str().unwrap()], 2, "domain");
    let junk = temp_file("3\n1 x\n");
    fails(&["graphinfo", "--graph", junk.path().to_str().unwrap()], 2, "invalid");
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["exact", "rt"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_bracket_k5() {
    let v = ok(&["bounds", "--graph", &data("k5.edges")]);
    let r = &v["result"];
    let count = BigInt::from(24);
    assert_eq!(r["lower"], "243/32");
    assert!(q(&r["lower"]) < BigRational::from_integer(count.clone()));
    let upper_sq: BigInt = r["upper_squared"].as_str().unwrap().parse().unwrap();
    assert!(&count * &count < upper_sq);
    assert_eq!(v["precision"]["bits"], 256);
}

#[test]
fn graphinfo_cycle() {
    let v = ok(&["graphinfo", "--graph", &data("c5.edges")]);
    let r = &v["result"];
    assert_eq!(r["tau"], "5");
    assert_eq!(r["cheeger"], "1");
    assert_eq!(r["cheeger_ratio"], "1/2");
    assert_eq!(r["degrees"], serde_json::json!([2, 2, 2, 2, 2]));
    assert_eq!(r["connected"], true);
}

#[test]
fn graph_formats_agree() {
    let json_graph = temp_file(r#"{"n": 5, "edges": [[1,2],[2,3],[3,4],[4,5],[5,1]]}"#);
    let a = ok(&["graphinfo", "--graph", &data("c5.edges")]);
    let b = ok(&["graphinfo", "--graph", json_graph.path().to_str().unwrap()]);
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn taillab_quadratic_instance_holds() {
    let v = ok(&["taillab", "--instance", &data("quad6.json"), "--m", "2"]);
    let r = &v["result"];
    assert_eq!(r["holds"], true);
    assert_eq!(r["n"], 6);
    assert_eq!(r["kappas"].as_array().unwrap().len(), 2);
    // Mean zero, variance n * 4 * c^2 * (1/4 * 4) with c = 1/1000 on the 6-cycle.
    assert_eq!(r["kappas"][0], "0");
    assert_eq!(r["kappas"][1], "3/500000");
}

#[test]
fn taillab_rejects_bad_instances() {
    let short = temp_file(r#"{"weights": [["1/2","1/2"]], "f": ["0"]}"#);
    fails(&["taillab", "--instance", short.path().to_str().unwrap(), "--m", "1"], 2, "invalid");
    let garbage = temp_file("not json");
    fails(&["taillab", "--instance", garbage.path().to_str().unwrap(), "--m", "1"], 2, "invalid");
}

#[test]
fn expand_rt_twelve() {
    let v = ok(&["expand", "rt", "--order", "12"]);
    let want = [
        "-1/2",
        "1/4",
        "1/4",
        "7/24",
        "37/120",
        "31/60",
        "81/28",
        "5981/336",
        "22937/240",
        "90031/180",
        "1825009/660",
        "4344847/264",
    ];
    let coeffs = &v["result"]["coeffs"];
    assert_eq!(coeffs.as_object().unwrap().len(), 12);
    for (p, w) in want.iter().enumerate() {
        assert_eq!(coeffs[p.to_string()], *w, "power {p}");
    }
    assert_eq!(v["precision"]["exact"], true);
}

#[test]
fn expand_eog_leading_terms() {
    let v = ok(&["expand", "eog", "--order", "4"]);
    let coeffs = &v["result"]["coeffs"];
    for (p, w) in ["-3/8", "11/64", "7/64", "233/2048"].iter().enumerate() {
        assert_eq!(coeffs[p.to_string()], *w);
    }
}

#[test]
fn expand_eval_against_known_count() {
    let v = ok(&["expand", "rt", "--order", "6", "--eval", "21", "--bits", "192"]);
    let ev = &v["result"]["eval"];
    assert_eq!(ev["exact"], table_rt(21).as_str());
    let ratio: f64 = ev["log_ratio"].as_str().unwrap().parse().unwrap();
    assert!(ratio.abs() < 1e-6, "log ratio {ratio}");
    assert_eq!(v["precision"]["bits"], 192);
    // Larger n has no table entry.
    let far = ok(&["expand", "rt", "--order", "3", "--eval", "101"]);
    assert!(far["result"]["eval"]["exact"].is_null());
    fails(&["expand", "rt", "--order", "3", "--eval", "10"], 2, "domain");
    fails(&["expand", "rt", "--order", "13"], 3, "size");
}

#[test]
fn expand_custom_weight_matches_named_family() {
    let named = ok(&["expand", "ed", "--order", "3"]);
    let custom = ok(&["expand", "custom", "--order", "3", "--a", "1/2", "--b", "1/2"]);
    assert_eq!(named["result"]["coeffs"], custom["result"]["coeffs"]);
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_eulerian"))
        .args(["bounds", "--graph", &data("k5.edges")])
        .env("EULERIAN_BITS", "160")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json_of(&out)["precision"]["bits"], 160);
}

#[test]
fn estimate_octahedron() {
    let oct = temp_file("6\n1 3\n1 4\n1 5\n1 6\n2 3\n2 4\n2 5\n2 6\n3 5\n3 6\n4 5\n4 6\n");
    let v = ok(&["estimate", "--graph", oct.path().to_str().unwrap(), "--m", "1", "--k", "2"]);
    let r = &v["result"];
    let est: f64 = r["estimate"].as_str().unwrap().parse().unwrap();
    assert!((est.ln() - 38f64.ln()).abs() < 0.1, "estimate {est}");
    assert_eq!(r["M"], 1);
    let exact = ok(&["exact", "eo", "--graph", oct.path().to_str().unwrap()]);
    assert_eq!(exact["result"]["value"], "38");
}

/// Every string that looks like a rational in a payload parses back to the same value.
fn check_rationals(v: &Value) {
    match v {
        Value::String(s) if !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || c == '/' || c == '-') => {
            let r = rational::parse(s).unwrap();
            assert_eq!(rational::parse(&rational::to_string(&r)).unwrap(), r);
            assert_eq!(rational::to_string(&r), *s, "not in lowest terms");
        }
        Value::Array(xs) => xs.iter().for_each(check_rationals),
        Value::Object(m) => m.values().for_each(check_rationals),
        _ => {}
    }
}

#[test]
fn envelopes_round_trip() {
    let cases: Vec<Vec<String>> = vec![
        vec!["exact".into(), "rt".into(), "--n".into(), "9".into()],
        vec!["bounds".into(), "--graph".into(), data("k5.edges")],
        vec!["graphinfo".into(), "--graph".into(), data("c5.edges")],
        vec!["taillab".into(), "--instance".into(), data("quad6.json"), "--m".into(), "2".into()],
        vec!["expand".into(), "ed".into(), "--order".into(), "5".into()],
        vec!["estimate".into(), "--graph".into(), data("k5.edges")],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let v = ok(&args);
        for key in ["command", "inputs", "result", "timing", "precision"] {
            assert!(v.get(key).is_some(), "{args:?} lacks {key}");
        }
        let text = serde_json::to_string(&v).unwrap();
        let again: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(again, v);
        check_rationals(&v["result"]);
    }
}

#[test]
fn expansion_coefficients_reparse() {
    let v = ok(&["expand", "eog", "--order", "5"]);
    let (tag, coeffs) = eulerian::expansion::ExpansionResult::from_json(&v["result"]).unwrap();
    assert!(tag.contains("3^(n+1)"));
    assert_eq!(coeffs[1], rational::frac(11, 64));
}

#[test]
fn thread_count_does_not_change_results() {
    let k7 = temp_file(&eulerian::Graph::complete(7).to_edge_list());
    let k7 = k7.path().to_str().unwrap().to_string();
    let quad = data("quad6.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["estimate", "--graph", &k7],
        vec!["taillab", "--instance", &quad, "--m", "2"],
        vec!["exact", "eo", "--graph", &k7],
        vec!["expand", "ed", "--order", "6"],
    ];
    for args in cases {
        let base = ok(&[&["--threads", "1"], args.as_slice()].concat());
        for t in ["2", "4"] {
            let other = ok(&[&["--threads", t], args.as_slice()].concat());
            assert_eq!(base["result"], other["result"], "{args:?} with {t} threads");
        }
    }
}

#[test]
fn csv_and_plain_formats() {
    let out = run(&["--format", "csv", "exact", "rt", "--n", "7"]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<(String, String)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert!(rows.contains(&("result.value".to_string(), "2640".to_string())));

    let out = run(&["exact", "rt", "--n", "7", "--format", "plain"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "result.value: 2640"), "{text}");

    let out = run(&["--format", "plain", "exact", "rt", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8(out.stderr).unwrap().contains("error.kind: domain"));
}
