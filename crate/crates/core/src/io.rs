//! Readers and writers for the on-disk formats.
//!
//! * Spectra: CSV, header `wavelength_nm,<name1>,<name2>,...`, one row per
//!   wavelength.
//! * Bodies: CSV, header `mass,x,y,z`, one row per point mass.
//! * Operators: JSON, a matrix is an array of rows of `[re, im]` pairs; a suite
//!   is an array of matrices; a record is `{"observables": [...], "values": [...]}`.

use std::io::{Read, Write};

use crate::colorimetry::{IlluminantBank, ReceptorBank, Spectrum, SpectrumGrid};
use crate::error::{Error, Result};
use crate::greybox::{HermitianOperator, MeasurementRecord};
use crate::rigid_body::{PointMass, PointMassSet};

pub const SPECTRA_KEY: &str = "wavelength_nm";
pub const BODY_HEADER: [&str; 4] = ["mass", "x", "y", "z"];

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_number(field: &str, row: usize, col: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("row {row}, column `{col}`: `{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("row {row}, column `{col}`: non-finite value")));
    }
    Ok(v)
}

/// Reads a spectra table into its grid and named columns.
pub fn read_spectra<R: Read>(reader: R) -> Result<(SpectrumGrid, Vec<Spectrum>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some(SPECTRA_KEY) {
        return Err(Error::Parse(format!("first column must be `{SPECTRA_KEY}`")));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if names.is_empty() {
        return Err(Error::Parse("spectra file has no spectrum columns".into()));
    }
    let mut wavelengths = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        wavelengths.push(parse_number(&rec[0], row + 1, SPECTRA_KEY)?);
        for (k, name) in names.iter().enumerate() {
            columns[k].push(parse_number(&rec[k + 1], row + 1, name)?);
        }
    }
    let grid = SpectrumGrid::new(wavelengths)?;
    let spectra = names
        .into_iter()
        .zip(columns)
        .map(|(n, s)| Spectrum::new(n, s))
        .collect();
    Ok((grid, spectra))
}

pub fn read_receptor_bank<R: Read>(reader: R) -> Result<ReceptorBank> {
    let (grid, spectra) = read_spectra(reader)?;
    ReceptorBank::new(grid, spectra)
}

pub fn read_illuminant_bank<R: Read>(reader: R) -> Result<IlluminantBank> {
    let (grid, spectra) = read_spectra(reader)?;
    IlluminantBank::new(grid, spectra)
}

pub fn write_spectra<W: Write>(mut w: W, grid: &SpectrumGrid, spectra: &[Spectrum]) -> Result<()> {
    let io = |e: std::io::Error| Error::Parse(e.to_string());
    let header: Vec<&str> = std::iter::once(SPECTRA_KEY)
        .chain(spectra.iter().map(|s| s.name.as_str()))
        .collect();
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (i, &wl) in grid.wavelengths().iter().enumerate() {
        let row: Vec<String> = std::iter::once(format_number(wl))
            .chain(spectra.iter().map(|s| format_number(s.samples[i])))
            .collect();
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}

pub fn read_body<R: Read>(reader: R) -> Result<PointMassSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(BODY_HEADER) {
        return Err(Error::Parse(format!("body header must be `{}`", BODY_HEADER.join(","))));
    }
    let mut points = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut v = [0.0; 4];
        for (k, col) in BODY_HEADER.iter().enumerate() {
            v[k] = parse_number(&rec[k], row + 1, col)?;
        }
        points.push(PointMass::new(v[0], [v[1], v[2], v[3]]));
    }
    PointMassSet::new(points)
}

pub fn write_body<W: Write>(mut w: W, body: &PointMassSet) -> Result<()> {
    let io = |e: std::io::Error| Error::Parse(e.to_string());
    writeln!(w, "{}", BODY_HEADER.join(",")).map_err(io)?;
    for p in body.points() {
        let row = [p.mass, p.position.x, p.position.y, p.position.z].map(format_number);
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}

pub fn read_operator<R: Read>(reader: R) -> Result<HermitianOperator> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn read_suite<R: Read>(reader: R) -> Result<Vec<HermitianOperator>> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn read_record<R: Read>(reader: R) -> Result<MeasurementRecord> {
    let record: MeasurementRecord = serde_json::from_reader(reader)?;
    record.validate()?;
    Ok(record)
}
