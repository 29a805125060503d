use std::process::{Command, Output};

use serde_json::Value;

const YY1: &str = "K(F1=O(3)+O(0)@H1,F2=G(c=3,k=1,Z=[u,v*w],h=v^2+w^2)@H2,e=id)";

fn qacm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qacm")).args(args).env_remove("QACM_SEED").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = qacm(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn column(v: &Value, key: &str) -> Vec<i64> {
    v["rows"].as_array().unwrap().iter().map(|r| r[key].as_i64().unwrap()).collect()
}

#[test]
fn rank_one_structure_sheaf() {
    let v = json(&["cohomology", "--sheaf", "R1(side=2,a=-1,b=0)", "--tmin", "-2", "--tmax", "2"]);
    assert_eq!(column(&v, "h1"), vec![0; 5]);
    assert_eq!(column(&v, "h0")[2], 1);
    assert_eq!(v["window"], serde_json::json!([-2, 2]));
    assert!(v["generated_at"].is_u64());
}

#[test]
fn yy1_table_has_no_h1() {
    let v = json(&["cohomology", "--sheaf", YY1, "--tmin", "-7", "--tmax", "2", "--no-timestamp"]);
    assert_eq!(column(&v, "h1"), vec![0; 10]);
    assert_eq!(column(&v, "h0")[7], 13);
    assert_eq!(v["flags"]["h1_fast_equals_full"], true);
    assert!(v.get("generated_at").is_none());
}

#[test]
fn csv_carries_the_json_numbers() {
    let args = ["cohomology", "--sheaf", YY1, "--tmin", "-4", "--tmax", "1", "--no-timestamp"];
    let v = json(&args);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = qacm(&csv_args);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,h0,h1,h2,chi"));
    for (line, row) in lines.zip(v["rows"].as_array().unwrap()) {
        let expected: Vec<String> = ["t", "h0", "h1", "h2", "chi"].iter().map(|k| row[k].to_string()).collect();
        assert_eq!(line, expected.join(","));
    }
}

#[test]
fn malformed_descriptor_exits_2() {
    let out = qacm(&["cohomology", "--sheaf", "K(F1=O(3)+O(0)@H1,F2=", "--tmin", "0", "--tmax", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1, column 22"), "{err}");
    let out = qacm(&["cohomology", "--sheaf", "G(c=3,k=1,Z=[u,v*w],h=v^2)@H2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_is_deterministic() {
    let args = ["classify", "--cmax", "3", "--seed", "11", "--no-timestamp"];
    let a = qacm(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let b = qacm(&seq);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["summary"]["all_yy1_acm"], true);
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("qacm.toml");
    std::fs::write(&cfg, "cmax = 2\nseed = 5\nno-timestamp = true\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&["classify", "--config", cfg]);
    assert_eq!((v["config"]["seed"].as_u64(), v["config"]["c_max"].as_i64()), (Some(5), Some(2)));
    assert!(v.get("generated_at").is_none());
    let v = json(&["classify", "--config", cfg, "--seed", "6"]);
    assert_eq!(v["config"]["seed"], 6);
    let out = Command::new(env!("CARGO_BIN_EXE_qacm"))
        .args(["classify", "--config", cfg, "--seed", "6"])
        .env("QACM_SEED", "7")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    std::fs::write(dir.path().join("bad.toml"), "c_max = 2\n").unwrap();
    let out = qacm(&["classify", "--config", dir.path().join("bad.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = qacm(&["classify", "--cmax", "2", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("family,c,k,descriptor,"));
    assert_eq!(text.lines().count(), 1 + 3 + 2 + 3);
}

#[test]
fn ulrich_scan_counts() {
    let v = json(&["ulrich-scan", "--cmax", "6", "--no-timestamp"]);
    let ulrich: Vec<(String, i64)> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["ulrich"] == true)
        .map(|r| (r["family"].as_str().unwrap().to_string(), r["c"].as_i64().unwrap()))
        .collect();
    assert_eq!(ulrich, vec![("yy1".into(), 1), ("aa1".into(), 1), ("aa1".into(), 1)]);
}

#[test]
fn mf_commands() {
    let v = json(&["mf", "example", "--component", "1"]);
    assert_eq!(v["det"], "x^2*y^2");
    assert_eq!(v["verified"], true);
    let on_x: Vec<i64> = v["ranks_at_samples"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["point"]["locus"] != "off")
        .map(|r| r["rank"].as_i64().unwrap())
        .collect();
    assert_eq!(on_x, vec![2; 8]);

    let v = json(&["mf", "hilbert", "--component", "1", "--tmax", "1"]);
    assert_eq!(column(&v, "h0"), vec![0, 4, 12]);

    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.json");
    std::fs::write(&pair, r#"{"q": "x*y", "A": [["x","0"],["0","y"]], "B": [["y","0"],["0","x"]]}"#).unwrap();
    let v = json(&["mf", "verify", "--file", pair.to_str().unwrap()]);
    assert_eq!(v["verified"], true);
    std::fs::write(&pair, r#"{"A": [["x","0"]]}"#).unwrap();
    assert_eq!(qacm(&["mf", "verify", "--file", pair.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qacm(&["mf", "example", "--component", "3"]).status.code(), Some(2));
}

#[test]
fn gluing_report() {
    let v = json(&["gluing-report", "--sheaf", YY1, "--e", "diag(2,3)", "--e", "upper(1,1,v^3)", "--tmin", "-7", "--tmax", "2"]);
    let variants = v["variants"].as_array().unwrap();
    assert_eq!(variants.len(), 2);
    assert_eq!(variants[0]["equal_to_identity"], true);
    assert_eq!(variants[1]["asserted"], false);
    let out = qacm(&["gluing-report", "--sheaf", "O(1)+O(0)@H1", "--e", "id"]);
    assert_eq!(out.status.code(), Some(2));
}
