use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

fn tad(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tad"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("tad runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn error_of(out: &Output) -> Value {
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    err["error"].clone()
}

fn gaussians() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"family":"gaussian","mu":0.0,"sigma":2.0}"#);
    write(dir.path(), "q.json", r#"{"family":"gaussian","mu":0.0,"sigma":1.0}"#);
    write(dir.path(), "r.json", r#"{"family":"logistic","mu":0.5,"s":0.8}"#);
    dir
}

#[test]
fn div_location_scale_pair() {
    let dir = gaussians();
    let rep = report(&tad(&["div", "--p", "p.json", "--q", "q.json", "--alpha", "1"], dir.path()));
    assert_eq!(rep["verb"], "div");
    let value = rep["results"]["value"].as_f64().unwrap();
    assert!((value - (1.0 - 2f64.ln())).abs() < 1e-10, "{value}");
    assert_eq!(rep["results"]["method"], "qdf_quadrature");
    assert_eq!(rep["results"]["clip"], 0.0);
    assert!(rep["results"]["error_estimate"].as_f64().unwrap() < 1e-10);
    assert_eq!(rep["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn div_entropy_form_agrees() {
    let dir = gaussians();
    let args = ["div", "--p", "r.json", "--q", "q.json", "--alpha", "-1"];
    let qdf = report(&tad(&args, dir.path()))["results"]["value"].as_f64().unwrap();
    let mut with_form = args.to_vec();
    with_form.extend(["--form", "entropy"]);
    let ent = report(&tad(&with_form, dir.path()));
    assert_eq!(ent["results"]["method"], "entropy_form");
    assert!((ent["results"]["value"].as_f64().unwrap() - qdf).abs() < 1e-6);
}

#[test]
fn w2_on_cauchy_is_infinite_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", r#"{"family":"cauchy","x0":0.0,"gamma":1.0}"#);
    write(dir.path(), "b.json", r#"{"family":"cauchy","x0":1.0,"gamma":3.0}"#);
    let rep = report(&tad(&["w2", "--p", "a.json", "--q", "b.json"], dir.path()));
    assert_eq!(rep["results"]["infinite"], true);
    let div = report(&tad(&["div", "--p", "a.json", "--q", "b.json", "--alpha", "0.5"], dir.path()));
    assert!(div["results"]["value"].as_f64().unwrap().is_finite());
}

#[test]
fn w2_finite_value() {
    let dir = gaussians();
    let rep = report(&tad(&["w2", "--p", "p.json", "--q", "q.json"], dir.path()));
    // GL-256 without clipping loses ~2e-5 of tail mass.
    assert!((rep["results"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    assert!(rep["results"]["error_estimate"].is_number());
}

#[test]
fn map_points_and_residual() {
    let dir = gaussians();
    let rep = report(&tad(&["map", "--p", "p.json", "--q", "q.json", "--x", "-1,0.5"], dir.path()));
    let pts = rep["results"]["points"].as_array().unwrap();
    assert!((pts[0]["t"].as_f64().unwrap() + 2.0).abs() < 1e-12);
    assert!((pts[1]["t"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(rep["results"]["monge_ampere_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn geodesic_csv_layout() {
    let dir = gaussians();
    let out = tad(
        &["geodesic", "--p", "p.json", "--q", "q.json", "--alpha", "-1", "--t-steps", "5", "--u-n", "9"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,u,qdf,quantile"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5 * 9);
    let mut ts: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    ts.dedup();
    assert_eq!(ts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    for r in &rows {
        assert_eq!(r.len(), 4);
        // 17 significant digits: d.dddddddddddddddde±x
        let mantissa = r[2].split('e').next().unwrap();
        assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{}", r[2]);
    }
    // α = −1 frames interpolate quantiles linearly: at t = ½, σ = 1.5.
    let mid: Vec<&Vec<&str>> = rows.iter().filter(|r| r[0].parse::<f64>().unwrap() == 0.5).collect();
    let center = mid.iter().find(|r| r[1].parse::<f64>().unwrap() == 0.5).unwrap();
    let qdf_mid: f64 = center[2].parse().unwrap();
    assert!((qdf_mid - 1.5 * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
}

#[test]
fn geodesic_csv_to_file_prints_report() {
    let dir = gaussians();
    let out = tad(
        &["geodesic", "--p", "p.json", "--q", "q.json", "--alpha", "2", "--t-steps", "3", "--output", "g.csv"],
        dir.path(),
    );
    let rep = report(&out);
    assert_eq!(rep["results"]["rows"], 3 * 65);
    let csv = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 65);
}

#[test]
fn check_duality_is_seeded_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let rep = report(&tad(&["check", "duality", "--seed", "0"], dir.path()));
    assert_eq!(rep["passed"], true);
    let assertions = rep["results"]["assertions"].as_array().unwrap();
    assert_eq!(assertions.len(), 20 * 7);
    assert!(assertions.iter().all(|a| a["measured"].as_f64().unwrap() < 1e-10));
}

#[test]
fn check_suites_pass_on_smooth_inputs() {
    let dir = gaussians();
    let suites: [&[&str]; 5] = [
        &["check", "taylor", "--p", "r.json", "--q", "q.json", "--alpha", "0.5"],
        &["check", "pythagorean", "--p", "p.json", "--q", "q.json", "--r", "r.json", "--alpha", "-0.5"],
        &["check", "gamma3", "--poly", "0,1,-0.5,0.25,0.1"],
        &["check", "entropy-derivs", "--p", "r.json"],
        &["check", "geodesic-pde", "--p", "p.json", "--q", "q.json", "--alpha", "0.5"],
    ];
    for args in suites {
        let rep = report(&tad(args, dir.path()));
        assert_eq!(rep["passed"], true, "{args:?}: {rep}");
    }
}

#[test]
fn check_taylor_reports_three_terms() {
    let dir = gaussians();
    let rep = report(&tad(&["check", "taylor", "--p", "p.json", "--q", "q.json", "--alpha", "1"], dir.path()));
    let r = &rep["results"];
    let sum = r["quadratic"].as_f64().unwrap() + r["cubic"].as_f64().unwrap() + r["remainder"].as_f64().unwrap();
    assert!((sum - r["divergence"].as_f64().unwrap()).abs() < 1e-14);
    assert!((r["quadratic"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(r["convergence"].as_array().unwrap().len(), 4);
}

#[test]
fn failed_check_exits_three_with_report() {
    let dir = gaussians();
    // Too few frames for the asymptotic regime at α = 3.
    let out = tad(
        &["check", "geodesic-pde", "--p", "p.json", "--q", "q.json", "--alpha", "3", "--t-steps", "5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["passed"], false);
}

#[test]
fn empirical_spec_reads_samples_relative_to_spec() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("data")).unwrap();
    let samples: String = (1..=400).map(|k| format!("{}\n", (k as f64 / 401.0 - 0.5) * 4.0)).collect();
    write(dir.path(), "data/x.txt", &samples);
    write(
        dir.path(),
        "data/emp.json",
        r#"{"family":"empirical","samples_file":"x.txt","clip_delta":0.05}"#,
    );
    write(dir.path(), "u.json", r#"{"family":"uniform","a":-2.0,"b":2.0}"#);
    let rep = report(&tad(&["div", "--p", "data/emp.json", "--q", "u.json", "--alpha", "1"], dir.path()));
    assert_eq!(rep["results"]["clip"], 0.05);
    assert!(rep["results"]["value"].as_f64().unwrap() < 1e-2);
    let info = report(&tad(&["info", "--spec", "data/emp.json"], dir.path()));
    assert_eq!(info["results"]["data_driven"], true);
    assert_eq!(info["results"]["spec"]["family"], "empirical");
}

#[test]
fn generative_monte_carlo_uses_seed() {
    let dir = tempfile::tempdir().unwrap();
    let reference = r#"{"family":"gaussian","mu":0.0,"sigma":1.0}"#;
    write(dir.path(), "x.json", &format!(r#"{{"family":"generative","ref":{reference},"map":{{"type":"affine","a":2.0,"b":1.0}}}}"#));
    write(
        dir.path(),
        "y.json",
        &format!(r#"{{"family":"generative","ref":{reference},"map":{{"type":"monotone_grid","z":[-9,0,9],"g":[-9,0,9]}}}}"#),
    );
    let run = |seed: &str| {
        report(&tad(
            &["div", "--p", "x.json", "--q", "y.json", "--alpha", "1", "--mc-samples", "500", "--seed", seed],
            dir.path(),
        ))
    };
    let a = run("4");
    assert_eq!(a["results"]["method"], "monte_carlo");
    assert!((a["results"]["value"].as_f64().unwrap() - (1.0 - 2f64.ln())).abs() < 1e-10);
    assert_eq!(a["inputs_digest"], run("4")["inputs_digest"]);
    assert_ne!(a["inputs_digest"], run("5")["inputs_digest"]);
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let dir = gaussians();
    let args = ["check", "pythagorean", "--p", "p.json", "--q", "q.json", "--r", "r.json", "--alpha", "3"];
    let strip = |out: Output| -> String {
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| !l.contains("wall_time_s"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(tad(&args, dir.path())), strip(tad(&args, dir.path())));
}

#[test]
fn output_flag_writes_report() {
    let dir = gaussians();
    let out = tad(&["info", "--spec", "p.json", "--output", "info.json"], dir.path());
    assert!(out.status.success() && out.stdout.is_empty());
    let rep: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("info.json")).unwrap()).unwrap();
    assert!((rep["results"]["second_moment"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    let h = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * 4.0).ln();
    assert!((rep["results"]["entropy"]["value"].as_f64().unwrap() - h).abs() < 1e-4);
}

#[test]
fn exit_codes() {
    let dir = gaussians();
    let d = dir.path();
    let missing = tad(&["div", "--alpha", "1"], d);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(error_of(&missing)["kind"], "usage");
    assert!(error_of(&missing)["message"].as_str().unwrap().contains("--p"));

    assert_eq!(tad(&["frobnicate"], d).status.code(), Some(2));
    let unreadable = tad(&["div", "--p", "nope.json", "--q", "q.json", "--alpha", "1"], d);
    assert_eq!((unreadable.status.code(), error_of(&unreadable)["kind"].clone()), (Some(2), "io".into()));

    write(d, "neg.json", r#"{"family":"gaussian","mu":0.0,"sigma":-1.0}"#);
    let bad = tad(&["div", "--p", "neg.json", "--q", "q.json", "--alpha", "1"], d);
    assert_eq!((bad.status.code(), error_of(&bad)["kind"].clone()), (Some(2), "spec".into()));

    let nonfinite = tad(&["div", "--p", "p.json", "--q", "q.json", "--alpha", "nan"], d);
    assert_eq!(nonfinite.status.code(), Some(2));

    write(d, "tiny.json", r#"{"family":"qdf_grid","u":[0.1,0.5,0.9],"qdf":[1e-150,1e-150,1e-150],"anchor_u":0.5,"anchor_x":0}"#);
    write(d, "huge.json", r#"{"family":"qdf_grid","u":[0.1,0.5,0.9],"qdf":[1e150,1e150,1e150],"anchor_u":0.5,"anchor_x":0}"#);
    let overflow = tad(&["div", "--p", "huge.json", "--q", "tiny.json", "--alpha", "3", "--clip", "0.1"], d);
    assert_eq!((overflow.status.code(), error_of(&overflow)["kind"].clone()), (Some(3), "numerical".into()));

    write(d, "ties.txt", &"1.0\n".repeat(20));
    write(d, "ties.json", r#"{"family":"empirical","samples_file":"ties.txt"}"#);
    let ties = tad(&["info", "--spec", "ties.json"], d);
    assert_eq!((ties.status.code(), error_of(&ties)["kind"].clone()), (Some(3), "estimation".into()));
}

fn mutated_spec() -> impl Strategy<Value = String> {
    prop_oneof![
        "\\PC{0,40}",
        (0usize..60, "\\PC{0,4}").prop_map(|(cut, junk)| {
            let base = r#"{"family":"gaussian","mu":0.0,"sigma":1.0}"#;
            let cut = cut.min(base.len());
            format!("{}{}", &base[..cut], junk)
        }),
        prop::sample::select(vec![
            r#"{"family":"gaussian","mu":0.0}"#,
            r#"{"family":"gaussian","mu":0.0,"sigma":0.0}"#,
            r#"{"family":"gaussian","mu":0.0,"sigma":1.0,"extra":1}"#,
            r#"{"family":"banana"}"#,
            r#"{"family":"uniform","a":1.0,"b":1.0}"#,
            r#"{"family":"qdf_grid","u":[0.5,0.2],"qdf":[1,1],"anchor_u":0.5,"anchor_x":0}"#,
            r#"{"family":"qdf_grid","u":[0.2,0.5],"qdf":[1,-1],"anchor_u":0.5,"anchor_x":0}"#,
            r#"{"family":"empirical","samples_file":"missing.txt"}"#,
            r#"{"family":"generative","ref":{"family":"gaussian","mu":0,"sigma":1},"map":{"type":"affine","a":-1,"b":0}}"#,
            r#"[1,2,3]"#,
        ])
        .prop_map(String::from),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn malformed_specs_exit_two(body in mutated_spec()) {
        let dir = gaussians();
        write(dir.path(), "m.json", &body);
        let out = tad(&["div", "--p", "m.json", "--q", "q.json", "--alpha", "1"], dir.path());
        // A mutation may leave a valid document; everything else must be a clean exit 2.
        if !out.status.success() {
            prop_assert_eq!(out.status.code(), Some(2));
            let err: Value = serde_json::from_slice(&out.stderr).unwrap();
            prop_assert!(err["error"]["message"].is_string());
        }
    }
}
