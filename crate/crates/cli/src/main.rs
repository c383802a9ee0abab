//! Command-line front end: reads spectra, bodies and operators from disk, runs
//! one operation and prints a single JSON document.
//!
//! Exit status is 0 on success, 1 when the operation itself fails (a violated
//! precondition, an infeasible record) and 2 for unreadable or malformed input
//! and usage errors.

mod fixtures;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use invisibility::colorimetry::{self, IlluminantBank, IlluminationVector, ReceptorBank};
use invisibility::greybox::{self, DensityState, HermitianOperator, MeasurementRecord};
use invisibility::rigid_body::{self, PointMassSet, Rotation3};
use invisibility::{io, Error, Tolerance};
use nalgebra::{Matrix3, Vector3};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "invisibility",
    version,
    about = "Invisibility spaces of positive linear measurements"
)]
struct Cli {
    /// Relative tolerance for rank and residual decisions
    #[arg(long, global = true, default_value_t = Tolerance::DEFAULT_REL)]
    tol_rel: f64,

    /// Absolute tolerance added to every threshold
    #[arg(long, global = true, default_value_t = 0.0)]
    tol_abs: f64,

    /// Seed for sampling
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of standard output
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Illuminant mixtures that receptor banks cannot tell apart
    Metamer {
        #[command(subcommand)]
        op: MetamerOp,
    },
    /// Point-mass bodies with matching mass, center of mass and inertia
    Body {
        #[command(subcommand)]
        op: BodyOp,
    },
    /// Density matrices consistent with measured expectation values
    Qstate {
        #[command(subcommand)]
        op: QstateOp,
    },
    /// Write built-in fixture files
    Fixtures {
        /// One of: normal, s-mutant, m-mutant, l-mutant, leds, tetrahedron,
        /// cube, octahedron, minimal-body, pauli, qubit, all
        name: String,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum MetamerOp {
    /// Response matrix and its null space
    Space {
        #[arg(long)]
        receptors: PathBuf,
        #[arg(long)]
        illuminants: PathBuf,
    },
    /// Physical metamers of a strictly positive base mixture
    Family {
        #[arg(long)]
        receptors: PathBuf,
        #[arg(long)]
        illuminants: PathBuf,
        /// Comma-separated illuminant weights
        #[arg(long, value_parser = parse_list)]
        base: List,
    },
    /// Which banks can separate each bank's metamer pair (rows fooled, columns observing)
    Table {
        /// Receptor bank file; repeat for each bank. The file stem names the bank.
        #[arg(long, required = true)]
        receptors: Vec<PathBuf>,
        #[arg(long)]
        illuminants: PathBuf,
        #[arg(long, value_parser = parse_list)]
        base: List,
    },
    /// Whether two mixtures give the same responses
    Distinguish {
        #[arg(long)]
        receptors: PathBuf,
        #[arg(long)]
        illuminants: PathBuf,
        #[arg(long, value_parser = parse_list)]
        b1: List,
        #[arg(long, value_parser = parse_list)]
        b2: List,
    },
}

#[derive(Subcommand)]
enum BodyOp {
    /// Total mass, center of mass and inertia tensors
    Summary {
        #[arg(long)]
        input: PathBuf,
    },
    /// Whether all three moments vanish
    Invisible {
        #[arg(long)]
        input: PathBuf,
    },
    /// Whether two physical bodies share all three moments
    Equivalent {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
    /// Range of t keeping input + t * invisible physical
    Family {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        invisible: PathBuf,
    },
    /// Invisible body from a body and its point reflection
    Parity {
        #[arg(long)]
        input: PathBuf,
        /// Also write the resulting body as CSV
        #[arg(long)]
        body_out: Option<PathBuf>,
    },
    /// Invisible body from a body and its rotated copy
    Rotate {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated rotation axis
        #[arg(long, value_parser = parse_list, default_value = "0,0,1")]
        axis: List,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        angle_deg: f64,
        /// Compose the rotation with the point reflection
        #[arg(long)]
        improper: bool,
        #[arg(long)]
        body_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum QstateOp {
    /// Tr(rho M)
    Expect {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        observable: PathBuf,
    },
    /// Basis of traceless operators invisible to a suite
    Invisible {
        #[arg(long)]
        suite: PathBuf,
        /// Hilbert-space dimension, required when the suite is empty
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Whether an operator is a density matrix
    Physical {
        #[arg(long)]
        rho: PathBuf,
    },
    /// Range of t keeping rho + t * direction positive semidefinite
    Interval {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        direction: PathBuf,
    },
    /// Minimum-norm operator reproducing a record
    Reconstruct {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Random physical states reproducing a record
    Sample {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Compare the invisible spaces of two suites
    Compare {
        #[arg(long)]
        suite_a: PathBuf,
        #[arg(long)]
        suite_b: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
    },
}

/// Why a run stopped. `Input` covers everything up to having parsed, valid
/// inputs in memory; `Domain` is an operation refusing them.
enum Failure {
    Usage(String),
    Input { kind: &'static str, message: String },
    Domain(Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) | Failure::Input { .. } => 2,
        }
    }

    fn report(&self) -> Value {
        let (kind, precondition, message) = match self {
            Failure::Usage(m) => ("usage", None, m.clone()),
            Failure::Input { kind, message } => (*kind, None, message.clone()),
            Failure::Domain(e) => (e.kind(), e.precondition(), e.to_string()),
        };
        json!({ "error": { "kind": kind, "precondition": precondition, "message": message } })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// A comma-separated list of finite numbers given as one argument.
#[derive(Clone, Debug)]
struct List(Vec<f64>);

fn parse_list(s: &str) -> std::result::Result<List, String> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{t}` is not finite"))
            }
        })
        .collect::<std::result::Result<_, _>>()
        .map(List)
}

/// Opens `path` and runs `read` on it. Any failure here, including a file
/// that parses but violates the type's invariants, is an input error.
fn load<T>(path: &Path, read: impl FnOnce(BufReader<File>) -> invisibility::Result<T>) -> Outcome<T> {
    let file = File::open(path).map_err(|e| Failure::Input {
        kind: "io",
        message: format!("{}: {e}", path.display()),
    })?;
    read(BufReader::new(file)).map_err(|e| Failure::Input {
        kind: e.kind(),
        message: format!("{}: {e}", path.display()),
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Outcome<()> {
    std::fs::write(path, contents).map_err(|e| Failure::Input {
        kind: "io",
        message: format!("{}: {e}", path.display()),
    })
}

fn receptors(path: &Path) -> Outcome<ReceptorBank> {
    load(path, io::read_receptor_bank)
}

fn illuminants(path: &Path) -> Outcome<IlluminantBank> {
    load(path, io::read_illuminant_bank)
}

fn body(path: &Path) -> Outcome<PointMassSet> {
    load(path, io::read_body)
}

fn operator(path: &Path) -> Outcome<HermitianOperator> {
    load(path, io::read_operator)
}

fn state(path: &Path) -> Outcome<DensityState> {
    load(path, |r| DensityState::new(io::read_operator(r)?))
}

fn suite(path: &Path) -> Outcome<Vec<HermitianOperator>> {
    load(path, io::read_suite)
}

fn record(path: &Path) -> Outcome<MeasurementRecord> {
    load(path, io::read_record)
}

fn illumination(weights: List) -> Outcome<IlluminationVector> {
    IlluminationVector::new(weights.0).map_err(|e| Failure::Usage(e.to_string()))
}

fn resolve_dim(explicit: Option<usize>, found: Option<usize>) -> Outcome<usize> {
    match (explicit, found) {
        (Some(d), Some(f)) if d != f => Err(Failure::Usage(format!(
            "--dim {d} does not match operators of dimension {f}"
        ))),
        (Some(d), _) | (None, Some(d)) => Ok(d),
        (None, None) => Err(Failure::Usage("--dim is required when there are no operators".into())),
    }
}

fn suite_dim(ops: &[HermitianOperator]) -> Option<usize> {
    ops.first().map(HermitianOperator::dim)
}

fn body_rows(b: &PointMassSet) -> Value {
    let rows: Vec<[f64; 4]> = b
        .points()
        .iter()
        .map(|p| [p.mass, p.position.x, p.position.y, p.position.z].map(|x| x + 0.0))
        .collect();
    json!(rows)
}

fn constructed_body(b: PointMassSet, tol: Tolerance, out: Option<&Path>) -> Outcome<Value> {
    if let Some(path) = out {
        let mut buf = Vec::new();
        io::write_body(&mut buf, &b)?;
        write_file(path, &buf)?;
    }
    Ok(json!({
        "body": body_rows(&b),
        "invisible": rigid_body::is_invisible(&b, tol),
        "residuals": rigid_body::moment_residuals(&b),
    }))
}

fn run_metamer(op: MetamerOp, tol: Tolerance) -> Outcome<Value> {
    match op {
        MetamerOp::Space {
            receptors: r,
            illuminants: i,
        } => {
            let m = colorimetry::response_matrix(&receptors(&r)?, &illuminants(&i)?)?;
            let k = colorimetry::metamer_space(&m, tol);
            Ok(json!({
                "response_matrix": m.to_rows(),
                "dimension": k.dim(),
                "metamer_basis": k.to_rows(),
            }))
        }
        MetamerOp::Family {
            receptors: r,
            illuminants: i,
            base,
        } => {
            let fam = colorimetry::metamer_family(&receptors(&r)?, &illuminants(&i)?, &illumination(base)?, tol)?;
            Ok(json!(fam))
        }
        MetamerOp::Table {
            receptors: paths,
            illuminants: i,
            base,
        } => {
            let mut banks = Vec::with_capacity(paths.len());
            for p in &paths {
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .ok_or_else(|| Failure::Usage(format!("{}: no file name", p.display())))?;
                banks.push((name, receptors(p)?));
            }
            let table = colorimetry::discrimination_table(&banks, &illuminants(&i)?, &illumination(base)?, tol)?;
            Ok(json!({
                "discrimination_table": table,
                "off_diagonal_fraction": table.off_diagonal_fraction(),
            }))
        }
        MetamerOp::Distinguish {
            receptors: r,
            illuminants: i,
            b1,
            b2,
        } => {
            let same = colorimetry::indistinguishable(
                &receptors(&r)?,
                &illuminants(&i)?,
                &illumination(b1)?,
                &illumination(b2)?,
                tol,
            )?;
            Ok(json!({ "indistinguishable": same }))
        }
    }
}

fn run_body(op: BodyOp, tol: Tolerance) -> Outcome<Value> {
    match op {
        BodyOp::Summary { input } => Ok(json!({ "summary": rigid_body::summary(&body(&input)?, tol) })),
        BodyOp::Invisible { input } => {
            let b = body(&input)?;
            Ok(json!({
                "invisible": rigid_body::is_invisible(&b, tol),
                "residuals": rigid_body::moment_residuals(&b),
            }))
        }
        BodyOp::Equivalent { input, other } => {
            let eq = rigid_body::are_equivalent(&body(&input)?, &body(&other)?, tol)?;
            Ok(json!({ "equivalent": eq }))
        }
        BodyOp::Family { input, invisible } => {
            let fam = rigid_body::equivalent_family(&body(&input)?, &body(&invisible)?, tol)?;
            let sites: Vec<[f64; 3]> = fam.sites.iter().map(|x| [x.x, x.y, x.z]).collect();
            Ok(json!({
                "sites": sites,
                "base_masses": fam.base_masses,
                "direction_masses": fam.direction_masses,
                "lambda_range": fam.lambda_range,
            }))
        }
        BodyOp::Parity { input, body_out } => {
            let out = rigid_body::parity_construction(&body(&input)?, tol)?;
            constructed_body(out, tol, body_out.as_deref())
        }
        BodyOp::Rotate {
            input,
            axis,
            angle_deg,
            improper,
            body_out,
        } => {
            let [x, y, z] = <[f64; 3]>::try_from(axis.0)
                .map_err(|a| Failure::Usage(format!("--axis needs 3 components, got {}", a.len())))?;
            let mut r = Rotation3::about_axis(Vector3::new(x, y, z), angle_deg.to_radians())
                .map_err(|e| Failure::Usage(e.to_string()))?;
            if improper {
                r = Rotation3::new(-Matrix3::identity() * r.matrix())?;
            }
            let out = rigid_body::rotation_construction(&body(&input)?, &r, tol)?;
            constructed_body(out, tol, body_out.as_deref())
        }
    }
}

fn run_qstate(op: QstateOp, tol: Tolerance, seed: u64) -> Outcome<Value> {
    match op {
        QstateOp::Expect { rho, observable } => {
            let v = greybox::expectation(&state(&rho)?, &operator(&observable)?)?;
            Ok(json!({ "expectation": v }))
        }
        QstateOp::Invisible { suite: s, dim } => {
            let ops = suite(&s)?;
            let d = resolve_dim(dim, suite_dim(&ops))?;
            let basis = greybox::invisible_space(d, &ops, tol)?;
            Ok(json!({
                "dim": d,
                "dimension": basis.len(),
                "invisible_basis": basis.operators(),
            }))
        }
        QstateOp::Physical { rho } => {
            let op = operator(&rho)?;
            Ok(json!({
                "physical": greybox::is_physical(&op, tol),
                "trace": op.trace(),
                "min_eigenvalue": op.min_eigenvalue(),
            }))
        }
        QstateOp::Interval { rho, direction } => {
            let iv = greybox::feasible_step_interval(&state(&rho)?, &operator(&direction)?, tol)?;
            Ok(json!(iv))
        }
        QstateOp::Reconstruct { record: r, dim } => {
            let rec = record(&r)?;
            let d = resolve_dim(dim, rec.dim())?;
            Ok(json!(greybox::reconstruct_affine(&rec, d, tol)?))
        }
        QstateOp::Sample { record: r, dim, count } => {
            let rec = record(&r)?;
            let d = resolve_dim(dim, rec.dim())?;
            let samples = greybox::ambiguity_sample(&rec, d, count, seed, tol)?;
            Ok(json!({ "seed": seed, "samples": samples }))
        }
        QstateOp::Compare { suite_a, suite_b, dim } => {
            let (a, b) = (suite(&suite_a)?, suite(&suite_b)?);
            let d = resolve_dim(dim, suite_dim(&a).or(suite_dim(&b)))?;
            if let (Some(da), Some(db)) = (suite_dim(&a), suite_dim(&b)) {
                if da != db {
                    return Err(Failure::Usage(format!("suites have dimensions {da} and {db}")));
                }
            }
            Ok(json!({ "report": greybox::blind_spot_compare(d, &a, &b, tol)? }))
        }
    }
}

fn run(cli: Cli) -> Outcome<Value> {
    let tol = if cli.tol_rel > 0.0 && cli.tol_abs >= 0.0 {
        Tolerance::new(cli.tol_rel, cli.tol_abs).map_err(|e| Failure::Usage(e.to_string()))?
    } else {
        return Err(Failure::Usage(format!(
            "tolerances must be positive, got --tol-rel {} --tol-abs {}",
            cli.tol_rel, cli.tol_abs
        )));
    };
    match cli.command {
        Command::Metamer { op } => run_metamer(op, tol),
        Command::Body { op } => run_body(op, tol),
        Command::Qstate { op } => run_qstate(op, tol, cli.seed),
        Command::Fixtures { name, dir } => {
            let written = fixtures::write(&name, &dir)?;
            Ok(json!({ "written": written }))
        }
    }
}

fn render(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON values always serialize");
    s.push(b'\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    let result = run(cli).and_then(|report| {
        let bytes = render(&report);
        match &output {
            Some(path) => write_file(path, &bytes),
            None => std::io::stdout().write_all(&bytes).map_err(|e| Failure::Input {
                kind: "io",
                message: e.to_string(),
            }),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = std::io::stderr().write_all(&render(&f.report()));
            ExitCode::from(f.exit_code())
        }
    }
}
