use std::fs;
use std::process::Command;

use symplectic_nlevel::cli::{main_with_args, run, ExperimentConfig, MethodChoice, OUT_DIR_ENV};
use symplectic_nlevel::testfn::FourierProfile;

fn config(sigmas: &[f64], methods: Vec<MethodChoice>, dir: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(sigmas.iter().map(|&s| FourierProfile::triangle(s)).collect(), methods);
    c.n_list = vec![32, 64];
    c.samples = 4000;
    c.seed = Some(7);
    c.output_dir = Some(dir.to_path_buf());
    c
}

fn all_methods() -> Vec<MethodChoice> {
    vec![MethodChoice::ClosedForm, MethodChoice::MonteCarlo, MethodChoice::Contour, MethodChoice::Determinantal]
}

#[test]
fn compare_all_methods_one_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config(&[0.9], all_methods(), dir.path())).unwrap();
    let count = |m: &str| out.rows.iter().filter(|r| r.method == m).count();
    assert_eq!(count("closed_form_q1"), 1);
    assert_eq!(count("monte_carlo"), 2);
    assert_eq!(count("contour"), 2);
    assert_eq!(count("determinantal"), 2);
    assert!(out.passed(), "{:#?}", out.comparisons);
    assert_eq!(out.exit_code(), 0);
    let cf = out.rows.iter().find(|r| r.method == "closed_form_q1").unwrap();
    assert!((cf.value - 0.55).abs() < 1e-14);
    assert_eq!(cf.n_half, "inf");

    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "method,n,N,sigmas,value,err,wall_time");
    assert_eq!(csv.lines().count(), 8);
    assert!(dir.path().join("breakdown_closed_form_q1.json").exists());
    assert!(dir.path().join("comparisons.csv").exists());
}

#[test]
fn manifest_records_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&[0.5], vec![MethodChoice::ClosedForm], dir.path());
    run(&cfg).unwrap();
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config_hash"].as_str().unwrap(), cfg.hash().unwrap());
    assert_eq!(m["seed"].as_u64(), Some(7));
    assert!(m["end_time_unix"].as_f64().unwrap() >= m["start_time_unix"].as_f64().unwrap());
    for f in m["files"].as_array().unwrap() {
        assert!(dir.path().join(f.as_str().unwrap()).exists(), "{f}");
    }
    // the stored config reproduces the hash
    let again: ExperimentConfig = serde_json::from_value(m["config"].clone()).unwrap();
    assert_eq!(again.hash().unwrap(), cfg.hash().unwrap());
}

#[test]
fn repeated_runs_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let methods = vec![MethodChoice::ClosedForm, MethodChoice::MonteCarlo, MethodChoice::Contour];
    let mut ca = config(&[0.7, 0.6], methods.clone(), a.path());
    ca.record_timings = false;
    let mut cb = config(&[0.7, 0.6], methods, b.path());
    cb.record_timings = false;
    run(&ca).unwrap();
    run(&cb).unwrap();
    for f in ["results.csv", "comparisons.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn high_support_routes_to_double_shift_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config(&[1.25, 1.25], vec![MethodChoice::ClosedForm], dir.path())).unwrap();
    assert!(!out.rows.is_empty());
    assert!(out.rows.iter().all(|r| r.method.starts_with("closed_form_q3")), "{:?}", out.rows);
    assert!(dir.path().join("breakdown_closed_form_q3.json").exists());
}

#[test]
fn schema_violations_are_rejected() {
    let bad = [
        r#"{"profiles":[{"kind":"triangle","sigma":0.9}],"methods":["closed_form"],"bogus":1}"#,
        r#"{"profiles":[{"kind":"triangle","sigma":0.9}],"methods":["monte_carlo"],"N_list":[16]}"#,
        r#"{"profiles":[{"kind":"triangle","sigma":1.6},{"kind":"triangle","sigma":1.6}],"methods":["closed_form"]}"#,
        r#"{"profiles":[{"kind":"triangle","sigma":0.9}],"methods":["contour"]}"#,
        r#"{"profiles":[],"methods":["closed_form"]}"#,
    ];
    for text in bad {
        assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
    }
    let ok = r#"{"profiles":[{"kind":"triangle","sigma":0.9}],"methods":["monte_carlo"],"N_list":[16],"seed":3}"#;
    assert!(ExperimentConfig::from_json(ok).is_ok());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, bad[0]).unwrap();
    let code = main_with_args(["nlevel", "compare", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(main_with_args(["nlevel", "compare", "--sigma", "-1"]), 2);
    assert_eq!(main_with_args(["nlevel", "frobnicate"]), 2);
}

#[test]
fn tolerance_breach_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&[0.9], vec![MethodChoice::ClosedForm, MethodChoice::Determinantal], dir.path());
    cfg.n_list = vec![8];
    cfg.tolerances.finite_n_allowance = 0.0;
    let out = run(&cfg).unwrap();
    assert!(!out.passed());
    assert_eq!(out.exit_code(), 1);
}

#[test]
fn binary_honours_output_env() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_nlevel"))
        .args(["closed-form", "--sigma", "0.4,0.4"])
        .env(OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.contains("closed_form_q1"));
    assert!(String::from_utf8_lossy(&status.stdout).contains("0.693333333"));
}

#[test]
fn sample_subcommand_dumps_angles() {
    let dir = tempfile::tempdir().unwrap();
    let angles = dir.path().join("angles.csv");
    let code = main_with_args([
        "nlevel",
        "sample",
        "--sigma",
        "0.9",
        "--n-list",
        "4",
        "--samples",
        "50",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--dump-angles",
        angles.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&angles).unwrap();
    assert_eq!(text.lines().count(), 1 + 50 * 4);
    let thetas: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(thetas.iter().all(|t| (0.0..=std::f64::consts::PI).contains(t)));
}
