use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surface-lab"))
        .args(args)
        .env_remove("SURFACE_LAB_CALIBRATION")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = ["simulate", "--basis", "z", "--cycles", "11", "--shots", "1000", "--seed", "7"];
    ok(&[&args[..], &["--out", p(&a)]].concat());
    ok(&[&args[..], &["--out", p(&b), "--workers", "2"]].concat());
    for f in ["shots.qshot", "calibration.json", "circuit.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    ok(&["simulate", "--cycles", "11", "--shots", "1000", "--seed", "8", "--out", p(&c)]);
    assert_ne!(std::fs::read(a.join("shots.qshot")).unwrap(), std::fs::read(c.join("shots.qshot")).unwrap());
}

#[test]
fn noiseless_shots_have_no_detection_events() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let det = dir.path().join("det");
    ok(&["simulate", "--basis", "x", "--cycles", "4", "--shots", "500", "--noise", "off", "--out", p(&sim)]);
    let text = ok(&["detect", "--input", p(&sim), "--out", p(&det)]);
    assert!(text.starts_with("detection events: 0 "), "{text}");
    let events: serde_json::Value = serde_json::from_slice(&std::fs::read(det.join("events.json")).unwrap()).unwrap();
    assert_eq!(events["detection_events"], 0);

    let dec = dir.path().join("dec");
    ok(&["decode", "--input", p(&sim), "--out", p(&dec)]);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dec.join("decode.json")).unwrap()).unwrap();
    assert_eq!(summary["decoded"]["fidelity"], 1.0);
    assert_eq!(summary["raw"]["fidelity"], 1.0);
}

#[test]
fn analyze_covers_every_scheme_and_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("an");
    ok(&["analyze", "--cycles", "5", "--shots", "300", "--noise", "off", "--out", p(&out)]);
    let csv = std::fs::read_to_string(out.join("curves.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4 * 2 * 5);
    for scheme in ["none", "data", "ancilla", "both"] {
        for decoded in ["false", "true"] {
            let ks: Vec<&str> =
                rows.iter().filter(|r| r[1] == scheme && r[2] == decoded).map(|r| r[3]).collect();
            assert_eq!(ks, ["1", "2", "3", "4", "5"], "{scheme} {decoded}");
        }
    }
    assert!(rows.iter().all(|r| r[8] == "1.000000"), "noiseless fidelity must be 1");

    // The curve file feeds straight into `fit`.
    let fit = dir.path().join("fit");
    ok(&["fit", "--input", p(&out.join("curves.csv")), "--out", p(&fit)]);
    let fits: serde_json::Value = serde_json::from_slice(&std::fs::read(fit.join("fit.json")).unwrap()).unwrap();
    assert_eq!(fits["curves"].as_array().unwrap().len(), 8);
    assert_eq!(fits["curves"][0]["fit"]["epsilon"], 0.0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"cycles": 2, "shots": 40, "seed": 1, "noise": false}"#).unwrap();
    let out = dir.path().join("s");
    ok(&["simulate", "--config", p(&cfg), "--shots", "64", "--out", p(&out)]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["cycles"], 2);
    assert_eq!(m["config"]["shots"], 64);
    assert!(m["config"]["noise"].is_null());
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes_separate_config_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["simulate", "--distance", "4", "--out", p(dir.path())]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--engine", "warp", "--out", p(dir.path())]).status.code(), Some(2));
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
    let bad_cfg = dir.path().join("bad.json");
    std::fs::write(&bad_cfg, r#"{"shotz": 3}"#).unwrap();
    assert_eq!(run(&["layout", "--config", p(&bad_cfg)]).status.code(), Some(2));

    let missing = dir.path().join("missing");
    assert_eq!(run(&["detect", "--input", p(&missing), "--out", p(&dir.path().join("d"))]).status.code(), Some(3));

    let sim = dir.path().join("sim");
    ok(&["simulate", "--cycles", "2", "--shots", "50", "--out", p(&sim)]);
    let mut bytes = std::fs::read(sim.join("shots.qshot")).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    std::fs::write(sim.join("shots.qshot"), bytes).unwrap();
    let out = run(&["detect", "--input", p(&sim), "--out", p(&dir.path().join("d2"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("digest"));
}

#[test]
fn layout_prints_json() {
    let text = ok(&["layout"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["distance"], 3);
}
