use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_invisibility"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON document")
}

fn with_fixtures() -> TempDir {
    let dir = TempDir::new().unwrap();
    ok_json(dir.path(), &["fixtures", "all"]);
    dir
}

fn f64_at(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("`{key}` missing in {v}"))
}

#[test]
fn metamer_space_is_one_dimensional_for_every_bank() {
    let dir = with_fixtures();
    for bank in ["normal", "s_mutant", "m_mutant", "l_mutant"] {
        let receptors = format!("{bank}.csv");
        let v = ok_json(
            dir.path(),
            &[
                "metamer",
                "space",
                "--receptors",
                &receptors,
                "--illuminants",
                "leds.csv",
            ],
        );
        assert_eq!(v["dimension"], 1);
        let basis = v["metamer_basis"].as_array().unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].as_array().unwrap().len(), 4);
        assert_eq!(v["response_matrix"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn minimal_body_is_invisible() {
    let dir = with_fixtures();
    let csv = std::fs::read_to_string(dir.path().join("minimal.csv")).unwrap();
    assert_eq!(csv, "mass,x,y,z\n1,0,0,1\n0.5,0,0,-2\n-1,0,0,-1\n-0.5,0,0,2\n");
    let v = ok_json(dir.path(), &["body", "invisible", "--input", "minimal.csv"]);
    assert_eq!(v["invisible"], true);
}

#[test]
fn qubit_interval_along_sigma1() {
    let dir = with_fixtures();
    let v = ok_json(
        dir.path(),
        &["qstate", "interval", "--rho", "rho.json", "--direction", "sigma1.json"],
    );
    assert!((f64_at(&v, "lo") + 0.4).abs() < 1e-9);
    assert!((f64_at(&v, "hi") - 0.4).abs() < 1e-9);
}

#[test]
fn cube_and_octahedron_fixtures_are_equivalent() {
    let dir = with_fixtures();
    let v = ok_json(
        dir.path(),
        &["body", "equivalent", "--input", "cube.csv", "--other", "octahedron.csv"],
    );
    assert_eq!(v["equivalent"], true);
    let v = ok_json(
        dir.path(),
        &[
            "body",
            "equivalent",
            "--input",
            "cube.csv",
            "--other",
            "tetrahedron.csv",
        ],
    );
    assert_eq!(v["equivalent"], false);
}

#[test]
fn discrimination_table_over_builtin_banks() {
    let dir = with_fixtures();
    let v = ok_json(
        dir.path(),
        &[
            "metamer",
            "table",
            "--receptors",
            "normal.csv",
            "--receptors",
            "s_mutant.csv",
            "--receptors",
            "m_mutant.csv",
            "--receptors",
            "l_mutant.csv",
            "--illuminants",
            "leds.csv",
            "--base",
            "1,1,1,1",
        ],
    );
    let table = v["discrimination_table"].as_object().unwrap();
    assert_eq!(table.len(), 4);
    for (row, cols) in table {
        assert_eq!(cols[row], false);
    }
    assert_eq!(f64_at(&v, "off_diagonal_fraction"), 1.0);
}

#[test]
fn metamer_family_endpoints_are_boundary_metamers() {
    let dir = with_fixtures();
    let fam = ok_json(
        dir.path(),
        &[
            "metamer",
            "family",
            "--receptors",
            "normal.csv",
            "--illuminants",
            "leds.csv",
            "--base",
            "1,2,2,1",
        ],
    );
    let base: Vec<f64> = serde_json::from_value(fam["base"].clone()).unwrap();
    let dir_v: Vec<f64> = serde_json::from_value(fam["direction"].clone()).unwrap();
    let (lo, hi) = (f64_at(&fam["lambda_range"], "lo"), f64_at(&fam["lambda_range"], "hi"));
    assert!(lo < 0.0 && hi > 0.0);
    for t in [lo, hi] {
        let member: Vec<String> = base.iter().zip(&dir_v).map(|(b, d)| format!("{}", b + t * d)).collect();
        let v = ok_json(
            dir.path(),
            &[
                "metamer",
                "distinguish",
                "--receptors",
                "normal.csv",
                "--illuminants",
                "leds.csv",
                "--b1",
                "1,2,2,1",
                "--b2",
                &member.join(","),
            ],
        );
        assert_eq!(v["indistinguishable"], true);
    }
}

#[test]
fn parity_output_round_trips_through_csv() {
    let dir = with_fixtures();
    let v = ok_json(
        dir.path(),
        &[
            "body",
            "parity",
            "--input",
            "tetrahedron.csv",
            "--body-out",
            "parity.csv",
        ],
    );
    assert_eq!(v["invisible"], true);
    let again = ok_json(dir.path(), &["body", "invisible", "--input", "parity.csv"]);
    assert_eq!(again["invisible"], true);
}

#[test]
fn rotation_needs_isotropic_inertia() {
    let dir = with_fixtures();
    let v = ok_json(
        dir.path(),
        &[
            "body",
            "rotate",
            "--input",
            "octahedron.csv",
            "--axis",
            "1,2,3",
            "--angle-deg",
            "-40",
            "--improper",
        ],
    );
    assert_eq!(v["invisible"], true);

    std::fs::write(dir.path().join("rod.csv"), "mass,x,y,z\n1,0,0,1\n1,0,0,-1\n").unwrap();
    let out = run(
        dir.path(),
        &[
            "body",
            "rotate",
            "--input",
            "rod.csv",
            "--axis",
            "1,0,0",
            "--angle-deg",
            "90",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(&out);
    assert_eq!(err["error"]["kind"], "precondition");
    assert_eq!(err["error"]["precondition"], "isotropic_inertia");
}

#[test]
fn qstate_invisible_reconstruct_and_sample() {
    let dir = with_fixtures();
    let v = ok_json(dir.path(), &["qstate", "invisible", "--suite", "suite.json"]);
    assert_eq!(v["dimension"], 2);

    let v = ok_json(dir.path(), &["qstate", "reconstruct", "--record", "record.json"]);
    assert_eq!(v["physical"], true);

    let v = ok_json(
        dir.path(),
        &[
            "qstate",
            "sample",
            "--record",
            "record.json",
            "--count",
            "25",
            "--seed",
            "7",
        ],
    );
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 25);
    for s in samples {
        // Tr(ρ σ3) = ρ00 − ρ11
        let d = s[0][0][0].as_f64().unwrap() - s[1][1][0].as_f64().unwrap();
        assert!((d - 0.6).abs() < 1e-9);
    }

    let v = ok_json(
        dir.path(),
        &[
            "qstate",
            "compare",
            "--suite-a",
            "suite.json",
            "--suite-b",
            "suite.json",
        ],
    );
    assert_eq!(v["report"]["dim_intersection"], 2);
}

#[test]
fn empty_suite_needs_dim() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("empty.json"), "[]").unwrap();
    let out = run(dir.path(), &["qstate", "invisible", "--suite", "empty.json"]);
    assert_eq!(out.status.code(), Some(2));
    let v = ok_json(
        dir.path(),
        &["qstate", "invisible", "--suite", "empty.json", "--dim", "3"],
    );
    assert_eq!(v["dimension"], 8);
}

#[test]
fn fixtures_are_byte_identical_across_runs() {
    let a = with_fixtures();
    let b = with_fixtures();
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 15);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?} differs");
    }
}

#[test]
fn fixture_names_write_expected_files() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(dir.path(), &["fixtures", "pauli", "--dir", "out"]);
    assert_eq!(
        v["written"],
        serde_json::json!(["sigma1.json", "sigma2.json", "sigma3.json"])
    );
    let sigma2: Value = serde_json::from_slice(&std::fs::read(dir.path().join("out/sigma2.json")).unwrap()).unwrap();
    assert_eq!(
        sigma2,
        serde_json::json!([[[0.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]]])
    );

    let v = ok_json(dir.path(), &["fixtures", "leds"]);
    assert_eq!(v["written"], serde_json::json!(["leds.csv"]));
    let leds = std::fs::read_to_string(dir.path().join("leds.csv")).unwrap();
    assert!(leds.starts_with("wavelength_nm,led450,led510,led570,led630\n380,"));
    assert_eq!(leds.lines().count(), 402);
}

#[test]
fn output_is_deterministic() {
    let dir = with_fixtures();
    let args = [
        "qstate",
        "sample",
        "--record",
        "record.json",
        "--count",
        "10",
        "--seed",
        "42",
    ];
    let a = run(dir.path(), &args);
    let b = run(dir.path(), &args);
    assert_eq!(a.stdout, b.stdout);
    let c = run(
        dir.path(),
        &[
            "qstate",
            "sample",
            "--record",
            "record.json",
            "--count",
            "10",
            "--seed",
            "43",
        ],
    );
    assert_ne!(a.stdout, c.stdout);

    let args = [
        "metamer",
        "space",
        "--receptors",
        "m_mutant.csv",
        "--illuminants",
        "leds.csv",
    ];
    assert_eq!(run(dir.path(), &args).stdout, run(dir.path(), &args).stdout);
}

#[test]
fn output_flag_writes_the_report() {
    let dir = with_fixtures();
    let out = run(
        dir.path(),
        &["body", "summary", "--input", "cube.csv", "--output", "summary.json"],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(f64_at(&v["summary"], "total_mass"), 8.0);
    assert_eq!(v["summary"]["inertia_origin"], v["summary"]["inertia_cm"]);
}

#[test]
fn reports_reparse_into_library_types() {
    let dir = with_fixtures();
    let v = ok_json(dir.path(), &["qstate", "reconstruct", "--record", "record.json"]);
    let op: invisibility::greybox::HermitianOperator = serde_json::from_value(v["operator"].clone()).unwrap();
    assert!((op.trace() - 1.0).abs() < 1e-12);

    let v = ok_json(
        dir.path(),
        &["qstate", "interval", "--rho", "rho.json", "--direction", "sigma2.json"],
    );
    let iv: invisibility::FeasibleInterval = serde_json::from_value(v).unwrap();
    assert!((iv.width() - 0.8).abs() < 1e-9);

    // an unbounded range survives the round trip
    std::fs::write(
        dir.path().join("pos.csv"),
        "mass,x,y,z\n1,0,0,1\n1,0,0,-1\n0.5,0,0,2\n0.5,0,0,-2\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("none.csv"), "mass,x,y,z\n").unwrap();
    let v = ok_json(
        dir.path(),
        &["body", "family", "--input", "pos.csv", "--invisible", "none.csv"],
    );
    assert_eq!(v["lambda_range"], serde_json::json!({ "lo": "-inf", "hi": "+inf" }));
    let iv: invisibility::FeasibleInterval = serde_json::from_value(v["lambda_range"].clone()).unwrap();
    assert_eq!(iv, invisibility::FeasibleInterval::UNBOUNDED);

    let v = ok_json(
        dir.path(),
        &["body", "family", "--input", "pos.csv", "--invisible", "minimal.csv"],
    );
    assert_eq!(v["lambda_range"], serde_json::json!({ "lo": -1.0, "hi": 1.0 }));
}

#[test]
fn malformed_inputs_exit_with_two() {
    let dir = with_fixtures();
    let p = dir.path();
    std::fs::write(p.join("bad_header.csv"), "m,x,y,z\n1,0,0,0\n").unwrap();
    std::fs::write(p.join("bad_number.csv"), "mass,x,y,z\n1,zero,0,0\n").unwrap();
    std::fs::write(p.join("bad.json"), "{ not json").unwrap();
    std::fs::write(p.join("nonherm.json"), "[[[1,0],[1,0]],[[0,0],[0,0]]]").unwrap();
    std::fs::write(p.join("bad_grid.csv"), "wavelength_nm,a\n500,1\n400,1\n").unwrap();

    let cases: &[&[&str]] = &[
        &["body", "invisible", "--input", "bad_header.csv"],
        &["body", "invisible", "--input", "bad_number.csv"],
        &["body", "invisible", "--input", "missing.csv"],
        &["qstate", "physical", "--rho", "bad.json"],
        &["qstate", "physical", "--rho", "nonherm.json"],
        &["qstate", "reconstruct", "--record", "bad.json"],
        &[
            "metamer",
            "space",
            "--receptors",
            "bad_grid.csv",
            "--illuminants",
            "leds.csv",
        ],
        &["fixtures", "no-such-fixture"],
        &["qstate", "no-such-op"],
        &["body", "rotate", "--input", "cube.csv", "--axis", "1,2"],
        &["body", "invisible", "--input", "cube.csv", "--tol-rel", "-1"],
    ];
    for args in cases {
        let out = run(p, args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let err = error_json(&run(p, &["body", "invisible", "--input", "bad_number.csv"]));
    assert_eq!(err["error"]["kind"], "parse");
}

#[test]
fn domain_errors_exit_with_one() {
    let dir = with_fixtures();
    let p = dir.path();
    // the same observable recorded with two different values
    let s3 = std::fs::read_to_string(p.join("sigma3.json")).unwrap();
    std::fs::write(
        p.join("inconsistent.json"),
        format!(r#"{{"observables": [{s3}, {s3}], "values": [0.2, 0.7]}}"#),
    )
    .unwrap();
    let out = run(p, &["qstate", "reconstruct", "--record", "inconsistent.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "infeasible_record");

    // consistent but unphysical: ⟨σ3⟩ = 2 needs a negative eigenvalue
    std::fs::write(
        p.join("unphysical.json"),
        format!(r#"{{"observables": [{s3}], "values": [2.0]}}"#),
    )
    .unwrap();
    let v = ok_json(p, &["qstate", "reconstruct", "--record", "unphysical.json"]);
    assert_eq!(v["physical"], false);
    let out = run(p, &["qstate", "sample", "--record", "unphysical.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["precondition"], "physical_base_state");

    // center of mass at x = 2
    std::fs::write(p.join("shifted.csv"), "mass,x,y,z\n1,1,0,0\n1,3,0,0\n").unwrap();
    let out = run(p, &["body", "parity", "--input", "shifted.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["precondition"], "cm_at_origin");

    let out = run(p, &["body", "family", "--input", "cube.csv", "--invisible", "cube.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["precondition"], "invisible_direction");
}
