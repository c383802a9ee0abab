//! Built-in fixture files.

use std::path::Path;

use invisibility::colorimetry::synthetic;
use invisibility::greybox::{DensityState, HermitianOperator, MeasurementRecord};
use invisibility::io;
use invisibility::rigid_body::{self, PlatonicKind};
use num_complex::Complex64;
use serde::Serialize;

use crate::{write_file, Failure, Outcome};

pub const NAMES: [&str; 11] = [
    "normal",
    "s-mutant",
    "m-mutant",
    "l-mutant",
    "leds",
    "tetrahedron",
    "cube",
    "octahedron",
    "minimal-body",
    "pauli",
    "qubit",
];

/// Diagonal qubit state used by the `qubit` fixture, `diag((1+v)/2, (1-v)/2)`.
pub const QUBIT_V: f64 = 0.6;

fn json_bytes<T: Serialize>(value: &T) -> Outcome<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Failure::Input {
        kind: "io",
        message: e.to_string(),
    })?;
    out.push(b'\n');
    Ok(out)
}

fn files(name: &str) -> Outcome<Vec<(String, Vec<u8>)>> {
    let grid = synthetic::default_grid();
    let mut out = Vec::new();
    match name {
        "normal" | "s-mutant" | "m-mutant" | "l-mutant" => {
            let bank_name = name.replace('-', "_");
            let bank = synthetic::receptor_bank(&bank_name, &grid).expect("built-in bank names are known");
            let mut buf = Vec::new();
            io::write_spectra(&mut buf, bank.grid(), bank.responses())?;
            out.push((format!("{bank_name}.csv"), buf));
        }
        "leds" => {
            let leds = synthetic::led_bank(&grid);
            let mut buf = Vec::new();
            io::write_spectra(&mut buf, leds.grid(), leds.spectra())?;
            out.push(("leds.csv".into(), buf));
        }
        "tetrahedron" | "cube" | "octahedron" => {
            let kind: PlatonicKind = name.parse()?;
            // The octahedron is sized to match the unit cube's mass and inertia.
            let (mass, scale) = match kind {
                PlatonicKind::Octahedron => (4.0 / 3.0, 3f64.sqrt()),
                _ => (1.0, 1.0),
            };
            let mut buf = Vec::new();
            io::write_body(&mut buf, &rigid_body::platonic_fixture(kind, mass, scale)?)?;
            out.push((format!("{name}.csv"), buf));
        }
        "minimal-body" => {
            let mut buf = Vec::new();
            io::write_body(&mut buf, &rigid_body::minimal_invisible_body(1.0, 1.0, 2.0)?)?;
            out.push(("minimal.csv".into(), buf));
        }
        "pauli" => {
            let ops = [
                HermitianOperator::pauli_x(),
                HermitianOperator::pauli_y(),
                HermitianOperator::pauli_z(),
            ];
            for (k, op) in ops.iter().enumerate() {
                out.push((format!("sigma{}.json", k + 1), json_bytes(op)?));
            }
        }
        "qubit" => {
            let rho = DensityState::qubit((1.0 + QUBIT_V) / 2.0, Complex64::new(0.0, 0.0))?;
            let sz = HermitianOperator::pauli_z();
            let record = MeasurementRecord::new(vec![sz.clone()], vec![QUBIT_V])?;
            out.push(("rho.json".into(), json_bytes(&rho)?));
            out.push(("suite.json".into(), json_bytes(&[sz])?));
            out.push(("record.json".into(), json_bytes(&record)?));
        }
        "all" => {
            for n in NAMES {
                out.extend(files(n)?);
            }
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown fixture `{other}`; expected one of {}, all",
                NAMES.join(", ")
            )))
        }
    }
    Ok(out)
}

/// Writes the files of fixture `name` into `dir` and returns their file names.
pub fn write(name: &str, dir: &Path) -> Outcome<Vec<String>> {
    let files = files(name)?;
    std::fs::create_dir_all(dir).map_err(|e| Failure::Input {
        kind: "io",
        message: format!("{}: {e}", dir.display()),
    })?;
    for (file, bytes) in &files {
        write_file(&dir.join(file), bytes)?;
    }
    Ok(files.into_iter().map(|(f, _)| f).collect())
}
