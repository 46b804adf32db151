use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistorlab")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, v)
}

fn q(re: &str) -> Value {
    serde_json::json!({ "re": re, "im": "0" })
}

#[test]
fn extension_of_o2_splits_as_two_o1() {
    let (code, r) = report(&["bundle", "split", &data("ext_o2.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "PASS");
    assert_eq!(r["result"]["degrees"], serde_json::json!([1, 1]));
    assert!(r["conventions"]["contour"].as_str().unwrap().contains("unit circle"));
}

#[test]
fn cohomology_of_o2() {
    let (code, r) = report(&["bundle", "cohomology", &data("line2.json")]);
    assert_eq!(code, 0);
    assert_eq!((r["result"]["h0"].as_u64(), r["result"]["h1"].as_u64()), (Some(3), Some(0)));
    assert_eq!(r["result"]["h0_direct"], 3);
}

#[test]
fn gauged_bundle_recovers_degrees() {
    let (code, r) = report(&["bundle", "split", &data("gauged_o1_o3.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["degrees"], serde_json::json!([3, 1]));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"rank\": 1, \"transition\": ").unwrap();
    assert_eq!(run(&["bundle", "split", bad.to_str().unwrap()]).status.code(), Some(2));
    // Not a unit on C*.
    std::fs::write(&bad, r#"{"rank":1,"transition":[[[{"pow":0,"coef":{"re":"1","im":"0"}},{"pow":1,"coef":{"re":"1","im":"0"}}]]]}"#)
        .unwrap();
    assert_eq!(run(&["bundle", "split", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["bundle", "split", "--frobnicate", &data("line2.json")]).status.code(), Some(2));
    assert_eq!(run(&["bundle", "split", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn ward_identity_records_scalar() {
    let (code, r) = report(&["ward", "identity", &data("o2_z.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "PASS");
    assert_eq!(r["result"]["scalar"], q("1"));
    let rep = &r["result"]["reports"][0];
    assert_eq!(rep["rho_prime_restriction"], serde_json::json!([[q("-1")]]));
    assert_eq!(rep["extension_splitting"]["degrees"], serde_json::json!([1, 1]));
}

#[test]
fn ward_random_suite_is_seeded() {
    let a = run(&["ward", "identity", &data("o4_w2.json"), "--random", "6", "--seed", "11"]);
    let b = run(&["ward", "identity", &data("o4_w2.json"), "--random", "6", "--seed", "11"]);
    let c = run(&["ward", "identity", &data("o4_w2.json"), "--random", "6", "--seed", "12"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["settings"]["seed"], 11);
    assert_eq!(v["result"]["classes"], 6);
}

#[test]
fn aliased_quadrature_exits_4() {
    let out = run(&["ward", "identity", &data("o2_z.json"), "--nodes", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn penrose_eval_matches_hand_value() {
    // h = u/z + u²/(2z²), ψ = x₀ + x₁z + x₂z²: u(x) = x₁ + x₁²/2 + x₀x₂.
    let (code, r) = report(&["penrose", "eval", &data("germ_k2.json"), &data("space_k2.json"), "--at", "1,2/3,-1"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["u"], serde_json::json!([q("-1/9")]));
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"laplacian_vanishes"));
}

#[test]
fn penrose_certify_quadratic_model() {
    let (code, r) = report(&["penrose", "certify", &data("germ_k2.json"), &data("space_k2.json"), "--at", "1,1,1"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["extension_splitting"], serde_json::json!([1, 1]));
    assert_eq!(r["result"]["certificate"]["status"], "PASS");
}

#[test]
fn degenerate_germ_fails_certificate_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"m":1,"terms":[{"zpow":-3,"umonomial":[1],"coef":{"re":"1","im":"0"}}]}"#).unwrap();
    let out = run(&["penrose", "certify", g.to_str().unwrap(), &data("space_k2.json")]);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "FAIL");
    assert_eq!(v["result"]["certificate"]["extension_splitting"]["degrees"], serde_json::json!([2, 0]));
}

#[test]
fn representation_commands() {
    let (code, r) = report(&["rep", "clebsch", "5"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["conformality"], Value::Null);
    let (code, r) = report(&["rep", "form", "8"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["solution_dim"], 1);
    assert_eq!(run(&["rep", "form", "5"]).status.code(), Some(3));
}

#[test]
fn out_flag_writes_file_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = run(&["rep", "clebsch", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "rep clebsch");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn gh_verify_on_a_coarse_box() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gh.json");
    std::fs::write(
        &input,
        r#"{"gibbons_hawking":{"constant":1.0,"centres":[[0,0,0]]},
            "suite":{"lo":[0.6,0.6,0.6],"hi":[1,1,1],"h":0.02,"refinement":[0.08,0.04,0.02],
                     "options":{"mode":"grid","orientation":"standard","convention":"flat","margin_cells":5,"monopole_threshold":0.001}}}"#,
    )
    .unwrap();
    let plot = dir.path().join("p.csv");
    let out = run(&["gh", "verify", input.to_str().unwrap(), "--plot", plot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&plot).unwrap();
    assert!(csv.starts_with("quantity,h,sup,l2"));
    assert_eq!(csv.lines().count(), 1 + 4 * 3);
}

#[test]
fn gh_rejects_ambiguous_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gh.json");
    std::fs::write(&input, r#"{"centre":[0,0,0]}"#).unwrap();
    assert_eq!(run(&["gh", "verify", input.to_str().unwrap()]).status.code(), Some(2));
}
