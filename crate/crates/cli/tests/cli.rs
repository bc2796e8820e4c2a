use std::path::PathBuf;
use std::process::Command;

use optaudit::file;
use optaudit::{EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use optaudit_core::theories::{self, qubit};
use optaudit_core::theory::Transformation;
use serde_json::Value;

fn theory_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("theories")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["optaudit"];
    argv.extend_from_slice(args);
    let code = optaudit::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn statuses(report: &Value) -> Vec<(String, String)> {
    report["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["id"].as_str().unwrap().to_string(), r["status"].as_str().unwrap().to_string()))
        .collect()
}

fn verdict(report: &Value, id: &str) -> String {
    report["postulates"][id]["verdict"].as_str().unwrap().to_string()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect()
}

#[test]
fn bundled_files_round_trip() {
    for name in ["qubit.json", "qutrit.json", "classical_bit.json", "gbit.json"] {
        let loaded = file::read(theory_path(name).as_ref()).unwrap();
        let text = file::serialize(&loaded);
        let again = file::load(file::parse(&text).unwrap()).unwrap();
        assert_eq!(file::to_file(&again), file::to_file(&loaded), "{name}");
        assert_eq!(again.theory.dim(), loaded.theory.dim());
        assert_eq!(file::serialize(&again), text);
    }
}

#[test]
fn explicit_coordinates_round_trip() {
    let text = r#"{"version": 1, "kind": {"classical": {"k": 2}}, "faithful_state": {"coordinates": [0.5, 0, 0, 0.5]}}"#;
    let loaded = file::load(file::parse(text).unwrap()).unwrap();
    assert!(loaded.faithful.is_some());
    let again = file::load(file::parse(&file::serialize(&loaded)).unwrap()).unwrap();
    assert_eq!(file::to_file(&again), file::to_file(&loaded));
}

#[test]
fn malformed_files_are_rejected() {
    let cases = [
        r#"{"version": 1, "kind": {"quantum": {"d": 2}}, "colour": 1}"#,
        r#"{"version": 2, "kind": "gbit"}"#,
        r#"{"version": 1}"#,
        r#"{"version": 1, "kind": "gbit", "unit_effect": [1, 0, 0]}"#,
        r#"{"version": 1, "kind": {"quantum": {"d": "two"}}}"#,
    ];
    for text in cases {
        let err = file::parse(text).and_then(file::load).unwrap_err();
        assert!(matches!(err, file::LoadError::Parse(_)), "{text}: {err}");
    }
    let err = file::load(file::parse(r#"{"version": 1, "kind": "gbit", "faithful_state": "bell"}"#).unwrap())
        .unwrap_err();
    assert!(matches!(err, file::LoadError::Invalid(_)));
}

#[test]
fn parse_errors_name_the_field() {
    let err = file::parse(r#"{"version": 1, "kind": {"quantum": {"d": "two"}}}"#).unwrap_err();
    assert!(err.to_string().contains("kind.quantum.d"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("optaudit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"version\": 1, \"kind\": ").unwrap();
    let bad = bad.to_string_lossy().into_owned();
    assert_eq!(run(&["audit", &bad]).0, EXIT_USAGE);
    assert_eq!(run(&["audit", "/nonexistent/theory.json"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["--help"]).0, EXIT_OK);
    let qubit = theory_path("qubit.json");
    assert_eq!(run(&["transpose", &qubit, "--map", "{\"kraus\": 3}"]).0, EXIT_USAGE);
    // A product state is not faithful.
    let product = "[0.5, 0, 0, 0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0.5, 0, 0, 0.5]";
    let (code, _, err) = run(&["transpose", &qubit, "--map", "\"identity\"", "--state", product]);
    assert_eq!(code, EXIT_NUMERICAL, "{err}");

    let status = Command::new(env!("CARGO_BIN_EXE_optaudit"))
        .args(["audit", &bad])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn transpose_of_lowering_channel_is_raising() {
    let lowering = r#"{"kraus": [[[[0, 0], [1, 0]], [[0, 0], [0, 0]]]]}"#;
    let report = run_json(&["transpose", &theory_path("qubit.json"), "--map", lowering, "--json"]);
    let t = theories::build_quantum(2).unwrap();
    let raising = Transformation::from_kraus(&t, &[qubit::ket_bra(1, 0)]).unwrap();
    let got = matrix(&report["transpose"]);
    for (r, row) in got.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            assert!((x - raising.matrix()[(r, c)]).abs() < 1e-12);
        }
    }
    assert!(report["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn gns_signatures() {
    for (name, positive, negative) in [("qubit.json", 3, 1), ("qutrit.json", 6, 3), ("classical_bit.json", 2, 0)] {
        let report = run_json(&["gns", &theory_path(name), "--json"]);
        let sig = &report["signature"];
        assert_eq!(sig["positive"], positive, "{name}");
        assert_eq!(sig["negative"], negative, "{name}");
        assert_eq!(sig["zero"], 0, "{name}");
        assert_eq!(report["gram_null_rank"], 0);
        assert_eq!(report["identity_preserving"], true);
    }
    let (code, _, err) = run(&["gns", &theory_path("gbit.json")]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--state"));
}

#[test]
fn qubit_audit_passes() {
    let report = run_json(&["audit", &theory_path("qubit.json"), "--json", "--seed", "3"]);
    for (id, status) in statuses(&report) {
        assert_eq!(status, "pass", "{id}");
    }
    for p in ["P1", "P2", "P3", "P4", "P5"] {
        assert_eq!(verdict(&report, p), "consistent", "{p}");
    }
}

#[test]
fn classical_bit_audit_findings() {
    let report = run_json(&["audit", &theory_path("classical_bit.json"), "--json"]);
    let findings: Vec<String> = statuses(&report)
        .into_iter()
        .filter(|(_, s)| s != "pass")
        .map(|(id, s)| format!("{id}:{s}"))
        .collect();
    assert_eq!(
        findings,
        [
            "dimension.adm_from_idim:finding",
            "dimension.adm_from_pair_idim:finding",
            "dimension.scalar_span_idim:finding"
        ]
    );
    assert_eq!(verdict(&report, "P4"), "inconsistent");
    assert_eq!(verdict(&report, "P5"), "consistent");
}

#[test]
fn gbit_audit_findings() {
    let report = run_json(&["audit", &theory_path("gbit.json"), "--json"]);
    let status = statuses(&report);
    let of = |id: &str| status.iter().find(|(i, _)| i == id).map(|(_, s)| s.as_str()).unwrap();
    assert_eq!(of("dimension.adm_from_idim"), "finding");
    assert_eq!(of("dimension.pair_idim"), "pass");
    assert_eq!(of("norms.axioms"), "pass");
    assert_eq!(of("composite.no_signaling"), "pass");
    assert_eq!(of("gns.born"), "skipped");
    assert_eq!(verdict(&report, "P4"), "inconsistent");
    assert_eq!(verdict(&report, "P5"), "undecided");
}

#[test]
fn check_filter_and_text_output() {
    let (code, out, _) = run(&["audit", &theory_path("qutrit.json"), "--checks", "faithful,gns.cstar"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("faithful.symmetric"));
    assert!(out.contains("gns.cstar"));
    assert!(!out.contains("norms.axioms"));
}
