use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toric-hodge")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut a = args.to_vec();
    a.push("--json");
    let out = run(&a);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    });
    (v, out.status.code().unwrap())
}

#[test]
fn classgroup_of_p1xp1() {
    let (v, code) = json(&["classgroup", "--fixture", "p1xp1"]);
    assert_eq!(code, 0);
    assert_eq!(v["free_rank"], 2);
    assert_eq!(v["torsion"], serde_json::json!([]));
    assert_eq!(v["anticanonical"], serde_json::json!([2, 2]));
}

#[test]
fn polytope_points_of_quartic() {
    let (v, code) = json(&["polytope-points", "--fixture", "projective_space_3"]);
    assert_eq!(code, 0);
    assert_eq!(v["count"], 35);
    let (v, _) = json(&["polytope-points", "--fixture", "projective_space_3", "--coeffs", "-1,0,0,0"]);
    assert_eq!(v["count"], 0);
}

#[test]
fn oda_pair_on_simplex() {
    let (v, code) = json(&["oda-pair", "--fixture", "non_oda_simplex"]);
    assert_eq!(code, 1);
    assert_eq!(v["undecomposable"], serde_json::json!([[1, 1, 1]]));
    let (v, code) = json(&["oda-pair", "--fixture", "projective_space_3", "--alpha", "1,0,0,0", "--beta", "2,0,0,0"]);
    assert_eq!(code, 0);
    assert_eq!(v["target_points"], 20);
}

#[test]
fn oda_search_exit_codes() {
    assert_eq!(run(&["oda-search", "--fixture", "hirzebruch_1", "--bound", "2"]).status.code(), Some(0));
    assert_eq!(run(&["oda-search", "--fixture", "non_oda_simplex", "--bound", "2"]).status.code(), Some(1));
}

#[test]
fn nef_and_ample() {
    assert_eq!(run(&["nef", "--fixture", "hirzebruch_1", "--coeffs", "0,0,1,0"]).status.code(), Some(0));
    assert_eq!(run(&["ample", "--fixture", "hirzebruch_1", "--coeffs", "0,0,1,0"]).status.code(), Some(1));
    assert_eq!(run(&["nef", "--fixture", "hirzebruch_1", "--coeffs", "0,1,0,0"]).status.code(), Some(1));
    let (v, code) = json(&["ample", "--fixture", "non_oda_simplex"]);
    assert_eq!(code, 0);
    assert_eq!(v["very_ample"]["no"]["missing"], serde_json::json!([1, -1, -1]));
    let (v, _) = json(&["ample", "--fixture", "p1xp1"]);
    assert_eq!(v["very_ample"], "yes");
}

#[test]
fn jacobian_dims_of_fermat_quartic() {
    let (v, code) = json(&["jacobian-dims", "--fixture", "projective_space_3", "--fermat", "--gamma", "2", "--exact"]);
    assert_eq!(code, 0);
    let dims: Vec<u64> = v["hodge"].as_array().unwrap().iter().map(|h| h["dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![1, 19, 1]);
    assert_eq!(v["dims"][0]["dim_r"], 10);
    assert_eq!(v["multiplication"]["surjective"], true);
}

#[test]
fn jacobian_dims_from_section_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    fs::write(&path, r#"{"class": [3], "terms": [["x0^3", 1, 1], ["x1^3", 1, 1], ["x2^3", 1, 1], ["x3^3", 1, 1]]}"#)
        .unwrap();
    let (v, code) = json(&["jacobian-dims", "--fixture", "projective_space_3", "--section", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["multiplication"]["defect"], 6);
    fs::write(&path, r#"{"class": [3], "terms": [["x0^2", 1, 1]]}"#).unwrap();
    let out = run(&["jacobian-dims", "--fixture", "projective_space_3", "--section", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn criterion_exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["hodge-criterion", "--fixture", "projective_space_3"]), 0);
    assert_eq!(code(&["hodge-criterion", "--fixture", "projective_space_3", "--class", "3"]), 2);
    assert_eq!(code(&["hodge-criterion", "--fixture", "projective_space_3", "--p", "2"]), 3);
    assert_eq!(code(&["hodge-criterion", "--fixture", "non_oda_simplex"]), 2);
    assert_eq!(code(&["hodge-criterion", "--fixture", "hirzebruch_0"]), 2);
    assert_eq!(code(&["hodge-criterion", "--fixture", "nope"]), 3);
    assert_eq!(code(&["hodge-criterion", "--fixture", "projective_space_3", "--mode", "sideways"]), 3);
    assert_eq!(code(&["hodge-criterion", "--fixture", "projective_space_3", "--prime", "15"]), 3);
    assert_eq!(code(&["hodge-criterion", "--fixture", "projective_space_3", "--coeffs", "1,2"]), 3);
    assert_eq!(code(&["hodge-criterion", "--fixture", "wps_112222", "--class", "4"]), 2);
}

#[test]
fn criterion_modes() {
    let (v, code) = json(&["hodge-criterion", "--fixture", "projective_space_3", "--mode", "jacobian", "--seed", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "CriterionSatisfied");
    let names: Vec<&str> = v["steps"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"multiplication-map") && !names.contains(&"oda-pair"));
    let (v, code) = json(&["hodge-criterion", "--fixture", "projective_space_3", "--mode", "both", "--exact"]);
    assert_eq!(code, 0);
    assert_eq!(v["input"]["rank"]["kind"], "exact");
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["validate"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn fixtures_round_trip_through_files() {
    let (v, code) = json(&["fixtures"]);
    assert_eq!(code, 0);
    let names: Vec<String> = v.as_array().unwrap().iter().map(|n| n.as_str().unwrap().to_string()).collect();
    assert_eq!(names.len(), 10);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for name in &names {
        assert_eq!(run(&["fixtures", name, "--out", out]).status.code(), Some(0));
        let fan = dir.path().join(format!("{name}.fan.json"));
        let div = dir.path().join(format!("{name}.divisor.json"));
        let (from_files, c1) =
            json(&["hodge-criterion", "--fan", fan.to_str().unwrap(), "--divisor", div.to_str().unwrap()]);
        let (from_fixture, c2) = json(&["hodge-criterion", "--fixture", name]);
        assert_eq!(c1, c2, "{name}");
        assert_eq!(from_files, from_fixture, "{name}");
    }
    let fan: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("wps_112222.fan.json")).unwrap()).unwrap();
    assert_eq!(fan["rays"].as_array().unwrap().len(), 6);
    let fan: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("projective_space_3.fan.json")).unwrap()).unwrap();
    assert_eq!(fan["rays"].as_array().unwrap().len(), 4);
}

#[test]
fn malformed_and_invalid_fans() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fan.json");
    fs::write(&path, "{\"dim\": 2, \"rays\": [[1, 0]]").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(run(&["validate", "--fan", p]).status.code(), Some(3));
    fs::write(&path, r#"{"dim": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "max_cones": [[0, 1], [1, 2]]}"#).unwrap();
    let (v, code) = json(&["validate", "--fan", p]);
    assert_eq!(code, 1);
    assert_eq!(v["complete"], false);
    assert_eq!(run(&["hodge-criterion", "--fan", p, "--coeffs", "1,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["classgroup", "--fan", p]).status.code(), Some(3));
    fs::write(&path, r#"{"dim": 2, "rays": [[1, 0], [0, 1]], "max_cones": [[0, 5]]}"#).unwrap();
    assert_eq!(run(&["validate", "--fan", p]).status.code(), Some(3));
}

#[test]
fn json_is_byte_stable() {
    let args = ["hodge-criterion", "--fixture", "projective_space_5", "--mode", "both", "--seed", "4", "--json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
