use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torickgk"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("TORICKGK_OUT_DIR").output().unwrap()
}

fn cfg(name: &str) -> String {
    config(name).display().to_string()
}

#[test]
fn curvature_of_cp2_is_twelve() {
    let out = run(&["curvature", "-c", &cfg("cp2.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "mu1,mu2,u_gk,p,u_j,s_g,lee2,lap_p");
    let mut n = 0;
    for line in lines {
        let u: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((u - 12.0).abs() < 1e-9);
        n += 1;
    }
    assert!(n > 50);
}

#[test]
fn identities_pass_on_the_worked_square() {
    let out = run(&["identities", "-c", &cfg("square_c03.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "pass");
    assert!(doc["conditions"].as_array().unwrap().len() > 15);
}

#[test]
fn double_guillemin_fails_c1() {
    let out = run(&["compactify", "-c", &cfg("bad_double_guillemin.json"), "--against", "guillemin"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let c1 = doc["conditions"].as_array().unwrap().iter().find(|c| c["name"] == "C1").unwrap();
    assert_eq!(c1["verdict"], "fail");
    assert!(!c1["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn compactify_passes_with_c() {
    let out = run(&["compactify", "-c", &cfg("square_c03.json")]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["compactify", "-c", &cfg("cube_c3.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn deform_csv() {
    let out = run(&["deform", "-c", &cfg("square_c03.json"), "--t-list", "-10,0,0.5,10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,max_curvature_drift,p_min,p_max,admissible");
    assert_eq!(rows.len(), 5);
    for r in &rows[1..] {
        let cells: Vec<&str> = r.split(',').collect();
        assert!(cells[1].parse::<f64>().unwrap() <= 1e-9);
        assert_eq!(cells[4], "true");
    }
}

#[test]
fn extremal_verdicts() {
    assert_eq!(run(&["extremal", "-c", &cfg("cp2.json")]).status.code(), Some(0));
    let out = run(&["extremal", "-c", &cfg("hirzebruch_perturbed.json")]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["residual"].as_f64().unwrap() > 1e-2);
}

#[test]
fn check_polytope_reports_faces() {
    let out = run(&["check-polytope", "-c", &cfg("cube_c3.json")]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 8);
    assert_eq!(doc["face_counts_by_dim"], serde_json::json!([8, 12, 6]));
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema": 1, "polytope": {"preset": "square"}, "potential": {"kind": "guillemin"}, "colour": 1}"#).unwrap();
    let out = run(&["curvature", "-c", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    assert_eq!(run(&["curvature"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["identities", "-c", &cfg("cp2.json"), "--format", "pgm"]).status.code(), Some(2));
    assert_eq!(run(&["curvature", "-c", &cfg("cube_c3.json"), "--format", "pgm"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_errors_exit_three() {
    // Not convex on part of the grid.
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("concave.json");
    std::fs::write(
        &p,
        r#"{"schema": 1, "polytope": {"preset": "square"}, "potential": {"kind": "sum", "terms": [{"kind": "guillemin"}, {"kind": "polynomial", "src": "-3*mu1^2"}]}}"#,
    )
    .unwrap();
    assert_eq!(run(&["curvature", "-c", p.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn output_files_and_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("sub").join("field.pgm");
    let out = run(&["curvature", "-c", &cfg("hirzebruch_perturbed.json"), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let bytes = std::fs::read(&target).unwrap();
    assert!(bytes.starts_with(b"P5\n20 20\n255\n"));
    assert_eq!(bytes.len(), b"P5\n20 20\n255\n".len() + 400);

    let redirected = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["curvature", "-c", &cfg("hirzebruch_perturbed.json")])
        .env("TORICKGK_OUT_DIR", redirected.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(redirected.path().join("hirzebruch_u_gk.pgm")).unwrap(), bytes);
}

#[test]
fn seed_flag_changes_sample_points() {
    let a = run(&["identities", "-c", &cfg("square_c03.json"), "--seed", "1"]).stdout;
    let b = run(&["identities", "-c", &cfg("square_c03.json"), "--seed", "2"]).stdout;
    let c = run(&["identities", "-c", &cfg("square_c03.json"), "--seed", "1"]).stdout;
    assert_ne!(a, b);
    assert_eq!(a, c);
}

#[test]
fn run_entry_point_matches_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let args = ["torickgk", "extremal", "-c", &cfg("cp2.json"), "--out", out.to_str().unwrap()];
    assert_eq!(torickgk_cli::run(args.iter().map(|s| s.to_string()).collect()), 0);
    let direct = run(&["extremal", "-c", &cfg("cp2.json")]).stdout;
    assert_eq!(std::fs::read(out).unwrap(), direct);
}
