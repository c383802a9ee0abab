//! Response matrices, invisible metamers, and diagnostic metamer families.
//!
//! A receptor bank samples sensitivity curves `c_a(λ)` and an illuminant bank
//! samples emission spectra `I_k(λ)` on a shared wavelength grid. The response
//! matrix integrates their products; its kernel is the space of illuminant
//! weight vectors that no receptor can see.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, FeasibleInterval, KernelBasis, RealMatrix, Tolerance};

/// Strictly increasing sample wavelengths in nanometers.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumGrid(Vec<f64>);

impl SpectrumGrid {
    pub const MAX_NM: f64 = 1e4;

    pub fn new(wavelengths: Vec<f64>) -> Result<Self> {
        if wavelengths.len() < 2 {
            return Err(Error::invalid("wavelength grid needs at least two samples"));
        }
        if let Some(w) = wavelengths.iter().find(|&&w| !(w > 0.0 && w < Self::MAX_NM)) {
            return Err(Error::invalid(format!("wavelength {w} nm outside (0, 1e4)")));
        }
        if wavelengths.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::invalid("wavelength grid must be strictly increasing"));
        }
        Ok(Self(wavelengths))
    }

    /// `count` evenly spaced samples from `start` to `end` inclusive.
    pub fn uniform(start: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid("wavelength grid needs at least two samples"));
        }
        let step = (end - start) / (count - 1) as f64;
        Self::new((0..count).map(|i| start + step * i as f64).collect())
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Trapezoidal integral of sampled values over the grid.
    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        let v: Vec<f64> = values.into_iter().collect();
        debug_assert_eq!(v.len(), self.0.len());
        self.0
            .windows(2)
            .zip(v.windows(2))
            .map(|(w, f)| 0.5 * (w[1] - w[0]) * (f[0] + f[1]))
            .sum()
    }
}

/// A named nonnegative sampled function.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub name: String,
    pub samples: Vec<f64>,
}

impl Spectrum {
    pub fn new(name: impl Into<String>, samples: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            samples,
        }
    }

    /// Samples `f` on every grid wavelength.
    pub fn sample(name: impl Into<String>, grid: &SpectrumGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::new(name, grid.wavelengths().iter().map(|&w| f(w)).collect())
    }
}

fn validate_spectra(grid: &SpectrumGrid, spectra: &[Spectrum], what: &str) -> Result<()> {
    if spectra.is_empty() {
        return Err(Error::invalid(format!("{what} bank is empty")));
    }
    for s in spectra {
        if s.samples.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{what} `{}` has {} samples, grid has {}",
                s.name,
                s.samples.len(),
                grid.len()
            )));
        }
        if let Some(x) = s.samples.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::invalid(format!(
                "{what} `{}` has invalid sample {x}; samples must be finite and >= 0",
                s.name
            )));
        }
        if !s.samples.iter().any(|&x| x > 0.0) {
            return Err(Error::invalid(format!("{what} `{}` has no positive sample", s.name)));
        }
    }
    Ok(())
}

/// Receptor sensitivity curves on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceptorBank {
    grid: SpectrumGrid,
    responses: Vec<Spectrum>,
}

impl ReceptorBank {
    pub fn new(grid: SpectrumGrid, responses: Vec<Spectrum>) -> Result<Self> {
        validate_spectra(&grid, &responses, "receptor")?;
        Ok(Self { grid, responses })
    }

    pub fn grid(&self) -> &SpectrumGrid {
        &self.grid
    }

    pub fn responses(&self) -> &[Spectrum] {
        &self.responses
    }
}

/// Illuminant emission spectra on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct IlluminantBank {
    grid: SpectrumGrid,
    spectra: Vec<Spectrum>,
}

impl IlluminantBank {
    pub fn new(grid: SpectrumGrid, spectra: Vec<Spectrum>) -> Result<Self> {
        validate_spectra(&grid, &spectra, "illuminant")?;
        Ok(Self { grid, spectra })
    }

    pub fn grid(&self) -> &SpectrumGrid {
        &self.grid
    }

    pub fn spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }
}

/// Brightness multipliers, one per illuminant. Negative entries are allowed;
/// [`IlluminationVector::is_physical`] tells whether the vector is realizable.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IlluminationVector(Vec<f64>);

impl IlluminationVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::invalid(format!("non-finite illumination weight {w}")));
        }
        Ok(Self(weights))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_physical(&self) -> bool {
        self.0.iter().all(|&w| w >= 0.0)
    }

    /// `self + t * direction`.
    pub fn offset(&self, direction: &IlluminationVector, t: f64) -> IlluminationVector {
        IlluminationVector(self.0.iter().zip(&direction.0).map(|(b, d)| b + t * d).collect())
    }

    fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

impl From<&DVector<f64>> for IlluminationVector {
    fn from(v: &DVector<f64>) -> Self {
        IlluminationVector(v.iter().copied().collect())
    }
}

/// `M[a][k] = ∫ c_a(λ) I_k(λ) dλ` by the trapezoidal rule on the shared grid.
pub fn response_matrix(receptors: &ReceptorBank, illuminants: &IlluminantBank) -> Result<RealMatrix> {
    if receptors.grid != illuminants.grid {
        return Err(Error::invalid(
            "receptor and illuminant banks are sampled on different grids",
        ));
    }
    let grid = &receptors.grid;
    let m = DMatrix::from_fn(receptors.responses.len(), illuminants.spectra.len(), |a, k| {
        let c = &receptors.responses[a].samples;
        let i = &illuminants.spectra[k].samples;
        grid.integrate(c.iter().zip(i).map(|(x, y)| x * y))
    });
    RealMatrix::new(m)
}

/// The invisible-metamer space: an orthonormal basis of `ker M`.
pub fn metamer_space(response: &RealMatrix, tol: Tolerance) -> KernelBasis {
    linalg::kernel_basis(response, tol)
}

fn is_invisible_to(response: &RealMatrix, diff: &DVector<f64>, norm_m: f64, tol: Tolerance) -> bool {
    let r = (response.as_matrix() * diff).norm();
    r <= tol.threshold(norm_m * diff.norm())
}

/// Whether the two illuminations produce the same response in every receptor.
pub fn indistinguishable(
    receptors: &ReceptorBank,
    illuminants: &IlluminantBank,
    b1: &IlluminationVector,
    b2: &IlluminationVector,
    tol: Tolerance,
) -> Result<bool> {
    let n = illuminants.len();
    if b1.len() != n || b2.len() != n {
        return Err(Error::invalid(format!(
            "illumination vectors of length {} and {} for {n} illuminants",
            b1.len(),
            b2.len()
        )));
    }
    let m = response_matrix(receptors, illuminants)?;
    let diff = b1.to_dvector() - b2.to_dvector();
    Ok(is_invisible_to(&m, &diff, m.spectral_norm(), tol))
}

/// A one-parameter family `base + t * direction` of metamers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetamerFamily {
    pub base: IlluminationVector,
    pub direction: IlluminationVector,
    pub lambda_range: FeasibleInterval,
}

impl MetamerFamily {
    pub fn member(&self, t: f64) -> IlluminationVector {
        self.base.offset(&self.direction, t)
    }
}

/// Builds the family of physical illuminations that the bank cannot tell
/// apart from `base`. The bank's metamer space must be one-dimensional.
pub fn metamer_family(
    receptors: &ReceptorBank,
    illuminants: &IlluminantBank,
    base: &IlluminationVector,
    tol: Tolerance,
) -> Result<MetamerFamily> {
    if base.len() != illuminants.len() {
        return Err(Error::invalid(format!(
            "base has {} weights for {} illuminants",
            base.len(),
            illuminants.len()
        )));
    }
    if let Some(w) = base.weights().iter().find(|&&w| w <= 0.0) {
        return Err(Error::invalid(format!(
            "base illumination must be strictly positive, found weight {w}"
        )));
    }
    let m = response_matrix(receptors, illuminants)?;
    let kernel = metamer_space(&m, tol);
    if kernel.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            expected: 1,
            found: kernel.dim(),
        });
    }
    let direction = IlluminationVector::from(&kernel.vectors()[0]);
    let lambda_range = linalg::positivity_interval(base.weights(), direction.weights())?;
    Ok(MetamerFamily {
        base: base.clone(),
        direction,
        lambda_range,
    })
}

/// For each ordered pair of banks, whether the column bank can tell apart the
/// members of the row bank's metamer family.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminationTable {
    pub names: Vec<String>,
    /// `entries[i][j]`: bank `j` distinguishes along bank `i`'s invisible direction.
    pub entries: Vec<Vec<bool>>,
}

impl DiscriminationTable {
    pub fn get(&self, row: &str, col: &str) -> Option<bool> {
        let i = self.names.iter().position(|n| n == row)?;
        let j = self.names.iter().position(|n| n == col)?;
        Some(self.entries[i][j])
    }

    /// Fraction of off-diagonal entries that are `true`.
    pub fn off_diagonal_fraction(&self) -> f64 {
        let n = self.names.len();
        if n < 2 {
            return 0.0;
        }
        let hits = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .filter(|&(i, j)| self.entries[i][j])
            .count();
        hits as f64 / (n * (n - 1)) as f64
    }

    /// `{row: {col: bool}}`.
    pub fn to_nested_map(&self) -> BTreeMap<String, BTreeMap<String, bool>> {
        self.names
            .iter()
            .zip(&self.entries)
            .map(|(row, entries)| {
                let inner = self.names.iter().cloned().zip(entries.iter().copied()).collect();
                (row.clone(), inner)
            })
            .collect()
    }
}

impl Serialize for DiscriminationTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_nested_map().serialize(s)
    }
}

/// Differential-diagnosis table over several receptor banks sharing one
/// illuminant bank.
pub fn discrimination_table(
    banks: &[(String, ReceptorBank)],
    illuminants: &IlluminantBank,
    base: &IlluminationVector,
    tol: Tolerance,
) -> Result<DiscriminationTable> {
    let mut responses = Vec::with_capacity(banks.len());
    let mut directions = Vec::with_capacity(banks.len());
    for (_, bank) in banks {
        let family = metamer_family(bank, illuminants, base, tol)?;
        let m = response_matrix(bank, illuminants)?;
        let norm = m.spectral_norm();
        responses.push((m, norm));
        directions.push(family.direction.to_dvector());
    }
    let entries = directions
        .iter()
        .map(|d| {
            responses
                .iter()
                .map(|(m, norm)| !is_invisible_to(m, d, *norm, tol))
                .collect()
        })
        .collect();
    Ok(DiscriminationTable {
        names: banks.iter().map(|(n, _)| n.clone()).collect(),
        entries,
    })
}

/// Synthetic receptor and illuminant fixtures.
///
/// Receptors are Gaussians in log-wavelength, `exp(-(ln(λ/peak))² / (2 w²))`
/// with `w = width_nm / peak_nm`; illuminants are ordinary Gaussians.
pub mod synthetic {
    use super::*;

    pub const GRID_START_NM: f64 = 380.0;
    pub const GRID_END_NM: f64 = 780.0;
    pub const GRID_STEP_NM: f64 = 1.0;

    /// `(name, peak_nm, width_nm)` for the normal trichromat.
    pub const NORMAL_CONES: [(&str, f64, f64); 3] = [("S", 440.0, 30.0), ("M", 540.0, 45.0), ("L", 570.0, 50.0)];

    /// Peak shifts of the single-cone variants.
    pub const S_SHIFT_NM: f64 = 15.0;
    pub const M_SHIFT_NM: f64 = -10.0;
    pub const L_SHIFT_NM: f64 = 8.0;

    pub const LED_PEAKS_NM: [f64; 4] = [450.0, 510.0, 570.0, 630.0];
    pub const LED_WIDTH_NM: f64 = 15.0;

    /// Names of the built-in receptor banks, in table order.
    pub const BANK_NAMES: [&str; 4] = ["normal", "s_mutant", "m_mutant", "l_mutant"];

    pub fn default_grid() -> SpectrumGrid {
        let n = ((GRID_END_NM - GRID_START_NM) / GRID_STEP_NM).round() as usize + 1;
        SpectrumGrid::uniform(GRID_START_NM, GRID_END_NM, n).expect("valid built-in grid")
    }

    pub fn log_gaussian(peak_nm: f64, width_nm: f64) -> impl Fn(f64) -> f64 {
        let w = width_nm / peak_nm;
        move |l: f64| {
            let z = (l / peak_nm).ln() / w;
            (-0.5 * z * z).exp()
        }
    }

    pub fn gaussian(peak_nm: f64, width_nm: f64) -> impl Fn(f64) -> f64 {
        move |l: f64| {
            let z = (l - peak_nm) / width_nm;
            (-0.5 * z * z).exp()
        }
    }

    /// Receptor bank with the given per-cone peak shifts `[S, M, L]`.
    pub fn cone_bank(grid: &SpectrumGrid, shifts_nm: [f64; 3]) -> ReceptorBank {
        let responses = NORMAL_CONES
            .iter()
            .zip(shifts_nm)
            .map(|(&(name, peak, width), shift)| Spectrum::sample(name, grid, log_gaussian(peak + shift, width)))
            .collect();
        ReceptorBank::new(grid.clone(), responses).expect("valid built-in bank")
    }

    /// A built-in bank by name (see [`BANK_NAMES`]).
    pub fn receptor_bank(name: &str, grid: &SpectrumGrid) -> Option<ReceptorBank> {
        let shifts = match name {
            "normal" => [0.0, 0.0, 0.0],
            "s_mutant" => [S_SHIFT_NM, 0.0, 0.0],
            "m_mutant" => [0.0, M_SHIFT_NM, 0.0],
            "l_mutant" => [0.0, 0.0, L_SHIFT_NM],
            _ => return None,
        };
        Some(cone_bank(grid, shifts))
    }

    pub fn all_banks(grid: &SpectrumGrid) -> Vec<(String, ReceptorBank)> {
        BANK_NAMES
            .iter()
            .map(|&n| (n.to_string(), receptor_bank(n, grid).expect("known bank")))
            .collect()
    }

    pub fn led_bank(grid: &SpectrumGrid) -> IlluminantBank {
        let spectra = LED_PEAKS_NM
            .iter()
            .map(|&p| Spectrum::sample(format!("led{}", p as u32), grid, gaussian(p, LED_WIDTH_NM)))
            .collect();
        IlluminantBank::new(grid.clone(), spectra).expect("valid built-in LED bank")
    }
}
