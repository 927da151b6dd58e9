use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn hquot(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hquot")).args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_heisenberg(dir: &TempDir, name: &str, m: usize, p: u32, d: usize) -> PathBuf {
    let out = path(dir, name);
    let (code, _) = hquot(&[
        "gen", "heisenberg", "--m", &m.to_string(), "--p", &p.to_string(), "--d", &d.to_string(), "--out", s(&out),
    ]);
    assert_eq!(code, 0);
    out
}

#[test]
fn heisenberg_file_has_order_three_to_the_fifteen() {
    let dir = TempDir::new().unwrap();
    let h = gen_heisenberg(&dir, "h.json", 1, 3, 5);
    let v = json(&std::fs::read_to_string(&h).unwrap());
    assert_eq!(v["dimV"].as_u64().unwrap() + v["dimW"].as_u64().unwrap(), 15);
    assert_eq!(v["field"]["modulus"].as_array().unwrap().len(), 6);
}

#[test]
fn emitted_group_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let h = gen_heisenberg(&dir, "h.json", 2, 3, 2);
    let kernel = path(&dir, "k.json");
    std::fs::write(&kernel, r#"{"basis": [[1, 2]]}"#).unwrap();
    let q = path(&dir, "q.json");
    assert_eq!(hquot(&["gen", "quotient", "--of", s(&h), "--kernel-file", s(&kernel), "--out", s(&q)]).0, 0);
    let text = std::fs::read_to_string(&q).unwrap();
    let file: hquot::io::GroupFile = serde_json::from_str(&text).unwrap();
    let g = file.to_group().unwrap();
    assert_eq!(hquot::io::to_json(&hquot::io::GroupFile::from_group(&g, None)), text);
}

#[test]
fn identical_files_are_isomorphic_with_trivial_witness() {
    let dir = TempDir::new().unwrap();
    let h = gen_heisenberg(&dir, "h.json", 1, 3, 3);
    let (code, out) = hquot(&["isotest", s(&h), s(&h)]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "isomorphic");
    assert_eq!(v["witness"]["i"], 0);
    assert_eq!(v["witness"]["c"], serde_json::json!([1, 0, 0]));
}

#[test]
fn abelian_input_fails_at_shape_certification() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "abelian.json");
    std::fs::write(&a, r#"{"p":3,"dimV":2,"dimW":1,"comm":[[[0],[0]],[[0],[0]]]}"#).unwrap();
    let (code, out) = hquot(&["recognize", s(&a)]);
    assert_eq!(code, 1);
    let v = json(&out);
    assert_eq!(v["status"], "not-a-quotient");
    assert_eq!(v["stages"][0]["stage"], "shape certification");
    assert_eq!(v["stages"][0]["status"], "failed");
}

#[test]
fn brahana_dot_product_is_recognized() {
    let dir = TempDir::new().unwrap();
    let b = path(&dir, "b.json");
    assert_eq!(hquot(&["gen", "brahana", "--dot", "--m", "1", "--p", "3", "--d", "2", "--out", s(&b)]).0, 0);
    let (code, out) = hquot(&["recognize", s(&b), "--verbose"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!((v["m"].as_u64(), v["d"].as_u64()), (Some(1), Some(2)));
    assert_eq!(v["details"]["involution"], "symplectic");
    assert_eq!(v["details"]["centroid_is_field"], true);
}

#[test]
fn census_separates_and_isotest_agrees() {
    let dir = TempDir::new().unwrap();
    let report = path(&dir, "census.json");
    let (code, _) = hquot(&["census", "--p", "3", "--d", "5", "--s", "2", "--validate-pairs", "10", "--out", s(&report)]);
    assert_eq!(code, 0);
    let v = json(&std::fs::read_to_string(&report).unwrap());
    assert!(v["orbit_count"].as_u64().unwrap() >= 2);
    assert_eq!(v["subspace_count"], "1210");

    let h = gen_heisenberg(&dir, "h.json", 1, 3, 5);
    let field = json(&std::fs::read_to_string(&h).unwrap())["field"].clone();
    let mut groups = Vec::new();
    for (i, orbit) in v["orbits"].as_array().unwrap().iter().take(2).enumerate() {
        let k = path(&dir, &format!("k{i}.json"));
        std::fs::write(&k, serde_json::json!({ "field": field, "basis": orbit["representative"] }).to_string()).unwrap();
        let q = path(&dir, &format!("q{i}.json"));
        assert_eq!(hquot(&["gen", "quotient", "--of", s(&h), "--kernel-file", s(&k), "--out", s(&q)]).0, 0);
        groups.push(q);
    }
    let (code, out) = hquot(&["isotest", s(&groups[0]), s(&groups[1]), "--oracle", "orbit"]);
    assert_eq!(code, 1);
    let r = json(&out);
    assert_eq!(r["verdict"], "nonisomorphic");
    assert_eq!(r["transcript"]["transcript"].as_array().unwrap().len(), 5);
    assert_eq!(r["oracle"]["agrees"], true);
}

#[test]
fn foreign_modulus_is_a_context_mismatch() {
    let dir = TempDir::new().unwrap();
    let h = gen_heisenberg(&dir, "h.json", 1, 3, 2);
    let k = path(&dir, "k.json");
    std::fs::write(&k, r#"{"field": {"p": 3, "d": 2, "modulus": [2, 2, 1]}, "basis": [[1, 0]]}"#).unwrap();
    let (code, out) = hquot(&["gen", "quotient", "--of", s(&h), "--kernel-file", s(&k)]);
    assert_eq!(code, 2);
    assert!(json(&out)["error"].as_str().unwrap().contains("field context mismatch"));
}

#[test]
fn outputs_are_deterministic() {
    let args = ["gen", "random-kernel", "--p", "3", "--d", "4", "--s", "2", "--seed", "17"];
    assert_eq!(hquot(&args), hquot(&args));
    let census = ["census", "--p", "3", "--d", "4", "--s", "2", "--validate-pairs", "5", "--with-invariants"];
    assert_eq!(hquot(&census).1, hquot(&census).1);
}

#[test]
fn invariants_of_heisenberg_over_gf9() {
    let dir = TempDir::new().unwrap();
    let h = gen_heisenberg(&dir, "h.json", 1, 3, 2);
    let (code, out) = hquot(&["invariants", s(&h)]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["character_invariant"]["abelianization_log"], 4);
    assert_eq!(v["character_invariant"]["derived_log"], 2);
    assert_eq!(v["is_camina"], true);
    assert_eq!(v["aut"]["symplectic_order"], "720");
}

#[test]
fn zero_budget_selftest_skips_census_checks() {
    let out = Command::new(env!("CARGO_BIN_EXE_hquot"))
        .args(["selftest", "--budget", "0"])
        .env("HQUOT_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("SKIPPED")).count(), 3);
    assert!(!text.lines().any(|l| l.starts_with("FAIL")));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(hquot(&["recognize", "/nonexistent/group.json"]).0, 2);
    assert_eq!(hquot(&["census", "--p", "4", "--d", "2", "--s", "1"]).0, 2);
    assert_eq!(hquot(&["census", "--p", "3", "--d", "12", "--s", "6"]).0, 2);
    assert_eq!(hquot(&["frobnicate"]).0, 2);
}
