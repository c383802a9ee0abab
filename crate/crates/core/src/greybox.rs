//! Under-determined quantum states.
//!
//! A finite suite of expectation values `Tr(ρ M_j) = v_j` pins a density
//! matrix only up to the traceless Hermitian operators orthogonal to every
//! `M_j`. This module computes that invisible space, a particular solution of
//! the affine constraints, the positive-semidefinite step range along any
//! invisible direction, and samples of the physical states the suite cannot
//! tell apart.
//!
//! Hermitian `d x d` matrices are handled through a real coordinate map of
//! dimension `d²`: the `d` diagonal entries, then `√2·Re` and `√2·Im` of each
//! strict upper-triangle entry in row-major order. Under this map the
//! Hilbert–Schmidt inner product `Tr(XY)` is the Euclidean dot product.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{self, FeasibleInterval, KernelBasis, RealMatrix, Tolerance};

/// Entrywise Hermiticity tolerance, relative to `max(1, max |entry|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor of a physical state: `λ_min ≥ -PSD_REL · (1 + ‖ρ‖)`.
pub const PSD_REL: f64 = 1e-9;
/// Relative shrink applied to feasible intervals before sampling.
pub const SAMPLE_SHRINK: f64 = 1e-6;

/// Below this `λ_min / (1 + ‖ρ‖)` the step interval is found by bisection.
const PENCIL_CUTOFF: f64 = 1e-8;

/// A finite complex Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct HermitianOperator(DMatrix<Complex64>);

impl HermitianOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || matrix.ncols() != d {
            return Err(Error::invalid(format!(
                "operator must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("operator has a non-finite entry"));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let dev = (&matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::invalid(format!(
                "operator is not Hermitian: max |M - M†| = {dev:.3e}"
            )));
        }
        // symmetrize away the rounding-level anti-Hermitian part
        let sym = (&matrix + matrix.adjoint()).scale(0.5);
        Ok(Self(sym))
    }

    /// Builds from real entries.
    pub fn from_real(rows: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * rows {
            return Err(Error::invalid("entry count does not match dimension"));
        }
        Self::new(DMatrix::from_row_iterator(
            rows,
            rows,
            entries.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn pauli_x() -> Self {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        Self(DMatrix::from_row_slice(2, 2, &[o, l, l, o]))
    }

    pub fn pauli_y() -> Self {
        let o = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let mi = Complex64::new(0.0, -1.0);
        Self(DMatrix::from_row_slice(2, 2, &[o, mi, i, o]))
    }

    pub fn pauli_z() -> Self {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let ml = Complex64::new(-1.0, 0.0);
        Self(DMatrix::from_row_slice(2, 2, &[l, o, o, ml]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    /// Frobenius norm, which equals the Euclidean norm of the real coordinates.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &HermitianOperator, factor: f64) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self(&self.0 + other.0.scale(factor)))
    }

    /// Real coordinates under which `Tr(XY)` is the dot product.
    pub fn to_real_coords(&self) -> DVector<f64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d);
        v.extend((0..d).map(|i| self.0[(i, i)].re));
        for i in 0..d {
            for j in i + 1..d {
                v.push(SQRT_2 * self.0[(i, j)].re);
                v.push(SQRT_2 * self.0[(i, j)].im);
            }
        }
        DVector::from_vec(v)
    }

    /// Inverse of [`HermitianOperator::to_real_coords`].
    pub fn from_real_coords(dim: usize, coords: &[f64]) -> Result<Self> {
        if coords.len() != dim * dim {
            return Err(Error::invalid(format!(
                "{} real coordinates for a {dim}x{dim} operator",
                coords.len()
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(coords[i], 0.0);
        }
        let mut k = dim;
        for i in 0..dim {
            for j in i + 1..dim {
                let z = Complex64::new(coords[k], coords[k + 1]) / SQRT_2;
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
                k += 2;
            }
        }
        Self::new(m)
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for HermitianOperator {
    type Error = Error;

    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("operator rows must form a square matrix"));
        }
        Self::new(DMatrix::from_row_iterator(
            d,
            d,
            rows.iter().flatten().map(|&[re, im]| Complex64::new(re, im)),
        ))
    }
}

impl From<HermitianOperator> for Vec<Vec<[f64; 2]>> {
    fn from(op: HermitianOperator) -> Self {
        op.0.row_iter()
            // + 0.0 turns -0.0 into 0.0
            .map(|r| r.iter().map(|z| [z.re + 0.0, z.im + 0.0]).collect())
            .collect()
    }
}

fn check_dims(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `Tr(A B)`.
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<Complex64> {
    check_dims(a, b)?;
    Ok(a.0.iter().zip(b.0.transpose().iter()).map(|(x, y)| x * y).sum())
}

fn psd_floor(op: &HermitianOperator, tol: Tolerance) -> f64 {
    -(PSD_REL * (1.0 + op.spectral_norm()) + tol.abs)
}

/// Unit trace and no eigenvalue below the PSD floor.
pub fn is_physical(rho: &HermitianOperator, tol: Tolerance) -> bool {
    (rho.trace() - 1.0).abs() <= TRACE_TOL + tol.abs && rho.min_eigenvalue() >= psd_floor(rho, tol)
}

/// A Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct DensityState(HermitianOperator);

impl DensityState {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let lmin = op.min_eigenvalue();
        if lmin < psd_floor(&op, Tolerance::default()) {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {lmin:.6e}"
            )));
        }
        Ok(Self(op))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianOperator::identity(dim).scaled(1.0 / dim as f64))
    }

    /// `[[a, β], [β*, 1 - a]]`.
    pub fn qubit(a: f64, beta: Complex64) -> Result<Self> {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(a, 0.0), beta, beta.conj(), Complex64::new(1.0 - a, 0.0)],
        );
        Self::new(HermitianOperator::new(m)?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }
}

impl TryFrom<HermitianOperator> for DensityState {
    type Error = Error;

    fn try_from(op: HermitianOperator) -> Result<Self> {
        Self::new(op)
    }
}

impl From<DensityState> for HermitianOperator {
    fn from(s: DensityState) -> Self {
        s.0
    }
}

/// `Re Tr(ρ M)`.
pub fn expectation(rho: &DensityState, observable: &HermitianOperator) -> Result<f64> {
    let t = trace_product(&rho.0, observable)?;
    debug_assert!(
        t.im.abs() <= 1e-10 * (1.0 + rho.0.norm() * observable.norm()),
        "Tr(ρM) has imaginary part {}",
        t.im
    );
    Ok(t.re)
}

/// Observables together with their measured expectation values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub observables: Vec<HermitianOperator>,
    pub values: Vec<f64>,
}

impl MeasurementRecord {
    pub fn new(observables: Vec<HermitianOperator>, values: Vec<f64>) -> Result<Self> {
        let record = Self { observables, values };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        if self.observables.len() != self.values.len() {
            return Err(Error::invalid(format!(
                "{} observables but {} values",
                self.observables.len(),
                self.values.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite measured value {v}")));
        }
        if let Some(first) = self.observables.first() {
            for m in &self.observables[1..] {
                check_dims(first, m)?;
            }
        }
        Ok(())
    }

    /// Hilbert-space dimension, if any observable is present.
    pub fn dim(&self) -> Option<usize> {
        self.observables.first().map(HermitianOperator::dim)
    }
}

/// Traceless Hermitian operators annihilated by every observable of a suite,
/// orthonormal under `Re Tr(X† Y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvisibleOperatorBasis {
    dim: usize,
    real: KernelBasis,
    operators: Vec<HermitianOperator>,
}

impl InvisibleOperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the invisible space.
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    /// The same basis in real coordinates.
    pub fn real_basis(&self) -> &KernelBasis {
        &self.real
    }

    /// Orthogonal projector onto the space, in real coordinates.
    pub fn projector(&self) -> DMatrix<f64> {
        self.real.projector()
    }

    /// `Σ c_i X_i`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<HermitianOperator> {
        if coeffs.len() != self.len() {
            return Err(Error::invalid("coefficient count does not match basis size"));
        }
        let v = self.real.to_columns() * DVector::from_column_slice(coeffs);
        HermitianOperator::from_real_coords(self.dim, v.as_slice())
    }
}

fn constraint_rows(dim: usize, suites: &[&[HermitianOperator]]) -> Result<RealMatrix> {
    let mut rows = vec![HermitianOperator::identity(dim).to_real_coords()];
    for m in suites.iter().flat_map(|s| s.iter()) {
        if m.dim() != dim {
            return Err(Error::invalid(format!(
                "observable of dimension {} in a suite of dimension {dim}",
                m.dim()
            )));
        }
        rows.push(m.to_real_coords());
    }
    let n = dim * dim;
    RealMatrix::new(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

fn operators_from_kernel(dim: usize, real: KernelBasis) -> Result<InvisibleOperatorBasis> {
    let operators = real
        .vectors()
        .iter()
        .map(|v| HermitianOperator::from_real_coords(dim, v.as_slice()))
        .collect::<Result<_>>()?;
    Ok(InvisibleOperatorBasis { dim, real, operators })
}

/// The traceless Hermitian operators `X` with `Tr(X M_j) = 0` for every
/// observable of `suite`.
pub fn invisible_space(dim: usize, suite: &[HermitianOperator], tol: Tolerance) -> Result<InvisibleOperatorBasis> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let a = constraint_rows(dim, &[suite])?;
    operators_from_kernel(dim, linalg::kernel_basis(&a, tol))
}

/// The closed range of `t` for which `ρ + t X` stays positive semidefinite.
///
/// When `ρ` is positive definite the bounds come from the eigenvalues `μ` of
/// `ρ^{-1/2} X ρ^{-1/2}`: `ρ + t X ⪰ 0` iff `1 + t μ ≥ 0` for every `μ`.
/// Near-singular states fall back to bisection on `λ_min(ρ + t X)`.
pub fn feasible_step_interval(rho: &DensityState, x: &HermitianOperator, tol: Tolerance) -> Result<FeasibleInterval> {
    check_dims(&rho.0, x)?;
    let xnorm = x.norm();
    let tr = x.trace();
    if tr.abs() > TRACE_TOL * (1.0 + xnorm) + tol.abs {
        return Err(Error::invalid(format!("step direction has trace {tr:.3e}, expected 0")));
    }
    if xnorm <= tol.abs || xnorm == 0.0 {
        return Ok(FeasibleInterval::UNBOUNDED);
    }

    let eig = SymmetricEigen::new(rho.0 .0.clone());
    let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let rho_norm = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);

    if lmin > PENCIL_CUTOFF * (1.0 + rho_norm) {
        Ok(pencil_interval(&eig, x))
    } else {
        Ok(bisect_interval(rho, x, rho_norm))
    }
}

fn pencil_interval(eig: &SymmetricEigen<Complex64, nalgebra::Dyn>, x: &HermitianOperator) -> FeasibleInterval {
    let u = &eig.eigenvectors;
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)));
    let w = u * inv_sqrt * u.adjoint();
    let k = &w * &x.0 * &w;
    let k = (&k + k.adjoint()).scale(0.5);
    let mu = SymmetricEigen::new(k).eigenvalues;
    let scale = mu.iter().map(|m| m.abs()).fold(0.0, f64::max);

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for &m in mu.iter() {
        if m.abs() <= 1e-14 * scale {
            continue;
        }
        if m > 0.0 {
            lo = lo.max(-1.0 / m);
        } else {
            hi = hi.min(-1.0 / m);
        }
    }
    FeasibleInterval { lo, hi }
}

fn bisect_interval(rho: &DensityState, x: &HermitianOperator, rho_norm: f64) -> FeasibleInterval {
    let f = |t: f64| rho.0.add_scaled(x, t).expect("dimensions checked").min_eigenvalue();
    let floor = -f64::max(1e-12 * (1.0 + rho_norm), -f(0.0));
    let ev = x.eigenvalues();
    let (xmin, xmax) = (ev[0], ev[ev.len() - 1]);

    // λ_min(ρ + tX) ≤ ‖ρ‖ + t·λ_min(X), so these brackets are infeasible
    let search = |bound: f64| {
        let (mut inside, mut outside) = (0.0, bound);
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if f(mid) >= floor {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let hi = search(2.0 * (rho_norm + 1.0) / -xmin);
    let lo = search(-2.0 * (rho_norm + 1.0) / xmax);
    FeasibleInterval { lo, hi }
}

/// Minimum-Frobenius-norm Hermitian solution of the affine constraints,
/// flagged with whether it is a physical state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reconstruction {
    pub operator: HermitianOperator,
    pub physical: bool,
}

impl Reconstruction {
    pub fn into_state(self) -> Result<DensityState> {
        if !self.physical {
            return Err(Error::precondition_failed(
                "physical_base_state",
                "the affine reconstruction is not positive semidefinite",
            ));
        }
        DensityState::new(self.operator)
    }
}

/// Solves `Tr ρ = 1`, `Tr(ρ M_j) = v_j` for the minimum-norm Hermitian `ρ`.
pub fn reconstruct_affine(record: &MeasurementRecord, dim: usize, tol: Tolerance) -> Result<Reconstruction> {
    record.validate()?;
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let a = constraint_rows(dim, &[&record.observables])?;
    let mut b = vec![1.0];
    b.extend(&record.values);
    let b = DVector::from_vec(b);
    let (x, residual) = linalg::min_norm_solve(&a, &b, tol)?;
    let threshold = tol
        .threshold(a.spectral_norm() * x.norm() + b.norm())
        .max(1e-12 * (1.0 + b.norm()));
    if residual > threshold {
        return Err(Error::InfeasibleRecord { residual, threshold });
    }
    let operator = HermitianOperator::from_real_coords(dim, x.as_slice())?;
    let physical = is_physical(&operator, tol);
    Ok(Reconstruction { operator, physical })
}

/// `count` physical states reproducing the record, drawn by stepping from the
/// minimum-norm solution along uniformly random invisible directions by a
/// uniformly random feasible amount. Deterministic in `seed`.
pub fn ambiguity_sample(
    record: &MeasurementRecord,
    dim: usize,
    count: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<Vec<DensityState>> {
    let base = reconstruct_affine(record, dim, tol)?.into_state()?;
    let basis = invisible_space(dim, &record.observables, tol)?;
    if basis.is_empty() {
        return Ok(vec![base; count]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    while samples.len() < count {
        let mut c: Vec<f64> = (0..basis.len()).map(|_| rng.sample(StandardNormal)).collect();
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            continue;
        }
        c.iter_mut().for_each(|x| *x /= n);
        let direction = basis.combine(&c)?;
        let range = feasible_step_interval(&base, &direction, tol)?.shrink_toward_zero(SAMPLE_SHRINK);
        let t = if range.lo < range.hi {
            rng.random_range(range.lo..=range.hi)
        } else {
            0.0
        };
        samples.push(DensityState::new(base.0.add_scaled(&direction, t)?)?);
    }
    Ok(samples)
}

/// Comparison of the invisible spaces of two measurement suites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlindSpotReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_intersection: usize,
    /// An invisible direction of suite A that suite B detects.
    pub a_resolved_by_b: Option<HermitianOperator>,
    /// An invisible direction of suite B that suite A detects.
    pub b_resolved_by_a: Option<HermitianOperator>,
}

/// A unit vector of `space` orthogonal to `common`, if `common` is a proper
/// subspace.
fn outside_direction(
    dim: usize,
    space: &KernelBasis,
    common: &KernelBasis,
    tol: Tolerance,
) -> Result<Option<HermitianOperator>> {
    if space.dim() <= common.dim() {
        return Ok(None);
    }
    let q = space.to_columns();
    let mut v: DVector<f64> = if common.is_empty() {
        q.column(0).into_owned()
    } else {
        let overlap = RealMatrix::new(common.to_columns().transpose() * &q)?;
        let coeffs = linalg::kernel_basis(&overlap, tol);
        match coeffs.vectors().first() {
            Some(c) => &q * c,
            None => return Ok(None),
        }
    };
    v /= v.norm();
    linalg::canonical_sign(&mut v);
    HermitianOperator::from_real_coords(dim, v.as_slice()).map(Some)
}

pub fn blind_spot_compare(
    dim: usize,
    suite_a: &[HermitianOperator],
    suite_b: &[HermitianOperator],
    tol: Tolerance,
) -> Result<BlindSpotReport> {
    let a = invisible_space(dim, suite_a, tol)?;
    let b = invisible_space(dim, suite_b, tol)?;
    let both = constraint_rows(dim, &[suite_a, suite_b])?;
    let common = linalg::kernel_basis(&both, tol);
    Ok(BlindSpotReport {
        dim_a: a.len(),
        dim_b: b.len(),
        dim_intersection: common.dim(),
        a_resolved_by_b: outside_direction(dim, &a.real, &common, tol)?,
        b_resolved_by_a: outside_direction(dim, &b.real, &common, tol)?,
    })
}
