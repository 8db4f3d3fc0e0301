use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semitoric")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn spectrum_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["spectrum", "--model", "coupled", "--k", "10", "--out", &out_arg(d.path())]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let fa = std::fs::read(a.path().join("spectrum_k10.csv")).unwrap();
    let fb = std::fs::read(b.path().join("spectrum_k10.csv")).unwrap();
    assert_eq!(fa, fb);
    // two spheres of dimensions 20 and 50
    let rows = String::from_utf8(fa).unwrap().lines().count();
    assert_eq!(rows, 1 + 20 * 50);
}

#[test]
fn spin_spectrum_window() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--k", "15", "--out", &out_arg(d.path())]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(d.path().join("spectrum_k15.csv")).unwrap();
    let xs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((lo - (-1.0 + 1.0 / 15.0)).abs() < 1e-12, "{lo}");
    assert!(hi <= 2.0 + 1e-12, "{hi}");
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    std::fs::write(&cfg, r#"{"k_list": [3, 4], "probes": {"delta": 0.3}, "seed": 5}"#).unwrap();
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--k", "2", "--out", &out_arg(d.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.path().join("spectrum_k2.csv").exists());
    assert!(!d.path().join("spectrum_k3.csv").exists());
    let resolved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(resolved["k_list"], serde_json::json!([2]));
    assert_eq!(resolved["seed"], 5);
    assert_eq!(resolved["probes"]["delta"], 0.3);
}

#[test]
fn k_max_expands_the_schedule() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--k", "1", "--k-max", "3", "--out", &out_arg(d.path())]);
    assert!(o.status.success());
    for k in 1..=3 {
        assert!(d.path().join(format!("spectrum_k{k}.csv")).exists());
    }
}

#[test]
fn configuration_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("empty.json");
    std::fs::write(&cfg, r#"{"k_list": []}"#).unwrap();
    let out = out_arg(d.path());
    let cases: Vec<Vec<&str>> = vec![
        vec!["spectrum", "--config", cfg.to_str().unwrap(), "--out", &out],
        vec!["spectrum", "--k", "5,3", "--out", &out],
        vec!["spectrum", "--model", "torus", "--out", &out],
        vec!["invariants", "--x", "0.01,0.02", "--out", &out],
        vec!["spectrum", "--model", "coupled", "--r1", "1.3", "--k", "1", "--out", &out],
        vec!["no-such-command"],
    ];
    for args in cases {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn missing_focus_focus_exits_3() {
    // with t = 0 the system is toric: no logarithmic peak anywhere
    let d = tempfile::tempdir().unwrap();
    let o = run(&["invariants", "--model", "coupled", "--t", "0", "--out", &out_arg(d.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn disconnected_charts_exit_4() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("narrow.json");
    std::fs::write(&cfg, r#"{"strip": [-3.3, -2.0]}"#).unwrap();
    let o = run(&["polygon", "--model", "coupled", "--config", cfg.to_str().unwrap(), "--out", &out_arg(d.path())]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_recovers_truth_up_to_translation() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--half", "--seed", "11", "--k", "20,40", "--out", &out_arg(d.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("synth.json")).unwrap()).unwrap();
    for r in v["runs"].as_array().unwrap() {
        assert_eq!(r["points"], r["labelled"]);
        // half-lattice labels are fixed up to a shift along the boundary
        assert_eq!(r["A"], serde_json::json!([[1, 0], [0, 1]]));
        assert_eq!(r["kappa"][1], 0);
    }
}

#[test]
fn label_and_polygon_outputs() {
    let d = tempfile::tempdir().unwrap();
    let out = out_arg(d.path());
    assert!(run(&["label", "--model", "coupled", "--k", "10", "--out", &out]).status.success());
    let g: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("global_k10.json")).unwrap()).unwrap();
    assert_eq!(g["charts"].as_array().unwrap().len(), 2);
    assert_eq!(g["transitions"].as_array().unwrap().len(), 1);

    assert!(run(&["polygon", "--k", "25", "--out", &out]).status.success());
    let p: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("polygon.json")).unwrap()).unwrap();
    assert!(p[0]["hausdorff_over_hbar"].as_f64().unwrap() <= 6.0);
}

#[test]
fn invariants_report_and_figures() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["invariants", "--k", "200,250,300,350", "--out", &out_arg(d.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["model"], "spin-oscillator");
    assert_eq!(r["twisting_p"], 0);
    for key in ["0,0", "0,1", "1,0", "1,1"] {
        assert!(r["S"][key].is_f64(), "{key}");
    }
    assert!((r["focus_focus"][0].as_f64().unwrap() - 1.0).abs() < 0.05);
    for fig in ["dx_fr", "dy_fr", "sigma1", "S01", "S00", "dxdy_fr", "S11", "dh", "spacing_peak"] {
        let text = std::fs::read_to_string(d.path().join(format!("{fig}.csv"))).unwrap();
        assert!(text.lines().count() > 2, "{fig}");
    }
}
