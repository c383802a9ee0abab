//! Rank-revealing null spaces and positivity-cone interval arithmetic.
//!
//! Every domain in this crate reduces to the same two questions: which
//! combinations of the underlying variables does a linear measurement map
//! annihilate, and how far can one move along such a combination before a
//! physical variable turns negative. [`kernel_basis`] answers the first,
//! [`positivity_interval`] the second for componentwise-nonnegative cones.

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Rank cutoff used when deciding whether a singular value is zero.
///
/// A singular value `s` counts toward the rank when
/// `s > rel * s_max + abs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const DEFAULT_REL: f64 = 1e-10;

    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel.is_finite() && rel > 0.0) {
            return Err(Error::invalid(format!("relative tolerance must be > 0, got {rel}")));
        }
        if !(abs.is_finite() && abs >= 0.0) {
            return Err(Error::invalid(format!("absolute tolerance must be >= 0, got {abs}")));
        }
        Ok(Self { rel, abs })
    }

    /// `rel * scale + abs`.
    #[inline]
    pub fn threshold(&self, scale: f64) -> f64 {
        self.rel * scale + self.abs
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: Self::DEFAULT_REL,
            abs: 0.0,
        }
    }
}

/// A dense real matrix with at least one row and one column and finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix(DMatrix<f64>);

impl RealMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::invalid(format!(
                "matrix must be non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if let Some(bad) = matrix.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite matrix entry {bad}")));
        }
        Ok(Self(matrix))
    }

    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(rows.len(), ncols, &flat)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Row-major copy of the entries, one `Vec` per row.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.cols() {
            return Err(Error::invalid(format!(
                "vector of length {} applied to matrix with {} columns",
                v.len(),
                self.cols()
            )));
        }
        Ok(&self.0 * v)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        singular_values(&self.0).iter().copied().fold(0.0, f64::max)
    }
}

/// Orthonormal basis of a numerical null space.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBasis {
    dim_ambient: usize,
    vectors: Vec<DVector<f64>>,
}

impl KernelBasis {
    pub(crate) fn from_vectors(dim_ambient: usize, vectors: Vec<DVector<f64>>) -> Self {
        debug_assert!(vectors.iter().all(|v| v.len() == dim_ambient));
        Self { dim_ambient, vectors }
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    /// Number of basis vectors.
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    /// Basis vectors as columns of a `dim_ambient x dim` matrix.
    pub fn to_columns(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim_ambient, self.vectors.len(), |i, j| self.vectors[j][i])
    }

    /// Orthogonal projector onto the spanned subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        let q = self.to_columns();
        &q * q.transpose()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(|v| v.iter().copied().collect()).collect()
    }
}

fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

fn rank_threshold(sigma: &[f64], tol: Tolerance) -> f64 {
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    tol.threshold(smax)
}

/// Number of singular values above `tol.rel * sigma_max + tol.abs`.
pub fn numerical_rank(a: &RealMatrix, tol: Tolerance) -> usize {
    let sigma = singular_values(a.as_matrix());
    let cut = rank_threshold(&sigma, tol);
    sigma.iter().filter(|&&s| s > cut).count()
}

/// Flips `v` so that its first non-negligible component is positive.
pub(crate) fn canonical_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if scale == 0.0 {
        return;
    }
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Orthonormal basis of the numerical null space of `a`.
///
/// Wide matrices are padded with zero rows so that the SVD yields the full
/// right-singular basis; the kernel is spanned by the right-singular vectors
/// whose singular values fall at or below the rank cutoff.
pub fn kernel_basis(a: &RealMatrix, tol: Tolerance) -> KernelBasis {
    let (m, n) = (a.rows(), a.cols());
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a.as_matrix());
        p
    } else {
        a.as_matrix().clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let cut = rank_threshold(&sigma, tol);

    let vectors = sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(i, _)| {
            let mut v: DVector<f64> = v_t.row(i).transpose();
            v /= v.norm();
            canonical_sign(&mut v);
            v
        })
        .collect();
    KernelBasis::from_vectors(n, vectors)
}

/// Minimum-norm least-squares solution of `a x = b`, with singular values at
/// or below the rank cutoff treated as zero. Returns `(x, ‖a x − b‖)`.
pub fn min_norm_solve(a: &RealMatrix, b: &DVector<f64>, tol: Tolerance) -> Result<(DVector<f64>, f64)> {
    if b.len() != a.rows() {
        return Err(Error::invalid(format!(
            "right-hand side of length {} for a matrix with {} rows",
            b.len(),
            a.rows()
        )));
    }
    let svd = a.as_matrix().clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested left singular vectors");
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let cut = rank_threshold(&sigma, tol);

    let mut x = DVector::zeros(a.cols());
    for (i, &s) in sigma.iter().enumerate() {
        if s > cut {
            let coeff = u.column(i).dot(b) / s;
            x += v_t.row(i).transpose() * coeff;
        }
    }
    let residual = (a.as_matrix() * &x - b).norm();
    Ok((x, residual))
}

/// A closed interval on the extended real line, or the empty set.
///
/// Unbounded ends are stored as `f64::INFINITY` / `f64::NEG_INFINITY` and
/// serialize as the strings `"+inf"` / `"-inf"`. The empty interval is
/// stored as `[+inf, -inf]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibleInterval {
    #[serde(with = "extended_real")]
    pub lo: f64,
    #[serde(with = "extended_real")]
    pub hi: f64,
}

impl FeasibleInterval {
    pub const UNBOUNDED: Self = Self {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub const EMPTY: Self = Self {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::invalid(format!("malformed interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    /// Shrinks both finite ends toward zero by the factor `1 - rel`.
    pub fn shrink_toward_zero(&self, rel: f64) -> Self {
        if self.is_empty() {
            return *self;
        }
        let f = 1.0 - rel;
        Self {
            lo: if self.lo.is_finite() { self.lo * f } else { self.lo },
            hi: if self.hi.is_finite() { self.hi * f } else { self.hi },
        }
    }
}

/// Extended-real serde encoding: finite values as JSON numbers, infinities as
/// `"+inf"` / `"-inf"`.
pub mod extended_real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if *x == f64::INFINITY {
            s.serialize_str("+inf")
        } else if *x == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        struct ExtendedReal;

        impl Visitor<'_> for ExtendedReal {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"+inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
                match v {
                    "+inf" | "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(ExtendedReal)
    }
}

/// The range of `t` for which `base + t * direction` stays componentwise
/// nonnegative.
///
/// Components with a zero direction impose no bound. The interval is closed
/// and always contains `t = 0`.
pub fn positivity_interval(base: &[f64], direction: &[f64]) -> Result<FeasibleInterval> {
    if base.len() != direction.len() {
        return Err(Error::invalid(format!(
            "base has {} components, direction has {}",
            base.len(),
            direction.len()
        )));
    }
    if let Some(bad) = base.iter().chain(direction).find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite component {bad}")));
    }
    if let Some((k, b)) = base.iter().enumerate().find(|(_, &b)| b < 0.0) {
        return Err(Error::invalid(format!("base component {k} is negative ({b})")));
    }

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (&b, &d) in base.iter().zip(direction) {
        if d > 0.0 {
            lo = lo.max(-b / d);
        } else if d < 0.0 {
            hi = hi.min(-b / d);
        }
    }
    // -0.0 from zero base components
    Ok(FeasibleInterval {
        lo: lo + 0.0,
        hi: hi + 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> RealMatrix {
        RealMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let a = RealMatrix::new(DMatrix::identity(3, 3)).unwrap();
        assert!(kernel_basis(&a, Tolerance::default()).is_empty());
        assert_eq!(numerical_rank(&a, Tolerance::default()), 3);
    }

    #[test]
    fn kernel_of_augmented_identity() {
        let a = m(&[&[1., 0., 0., 1.], &[0., 1., 0., 1.], &[0., 0., 1., 1.]]);
        let k = kernel_basis(&a, Tolerance::default());
        assert_eq!(k.dim(), 1);
        let v = &k.vectors()[0];
        // (-1,-1,-1,1)/2 up to the sign convention, which makes the first entry positive
        let expected = DVector::from_vec(vec![0.5, 0.5, 0.5, -0.5]);
        assert_abs_diff_eq!((v - &expected).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((a.as_matrix() * v).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn positive_wide_matrix_has_one_dimensional_kernel() {
        let a = m(&[&[1., 2., 3., 4.], &[2., 1., 5., 1.], &[3., 3., 1., 2.]]);
        assert_eq!(numerical_rank(&a, Tolerance::default()), 3);
        assert_eq!(kernel_basis(&a, Tolerance::default()).dim(), 1);
    }

    #[test]
    fn rank_examples() {
        let zero = RealMatrix::new(DMatrix::zeros(3, 4)).unwrap();
        assert_eq!(numerical_rank(&zero, Tolerance::default()), 0);
        assert_eq!(kernel_basis(&zero, Tolerance::default()).dim(), 4);
        let id = RealMatrix::new(DMatrix::identity(5, 5)).unwrap();
        assert_eq!(numerical_rank(&id, Tolerance::default()), 5);
        assert_eq!(numerical_rank(&m(&[&[1., 2.], &[2., 4.]]), Tolerance::default()), 1);
    }

    #[test]
    fn tall_matrix_kernel() {
        let a = m(&[&[1., 1.], &[2., 2.], &[3., 3.]]);
        let k = kernel_basis(&a, Tolerance::default());
        assert_eq!(k.dim(), 1);
        let s = 0.5f64.sqrt();
        assert_abs_diff_eq!(
            (&k.vectors()[0] - DVector::from_vec(vec![s, -s])).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn rejects_non_finite() {
        assert!(RealMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]).is_err());
        assert!(RealMatrix::from_row_slice(0, 0, &[]).is_err());
        assert!(Tolerance::new(0.0, 0.0).is_err());
        assert!(Tolerance::new(1e-10, -1.0).is_err());
    }

    #[test]
    fn min_norm_solution() {
        // x + y = 2 has minimum-norm solution (1, 1)
        let a = m(&[&[1., 1.]]);
        let (x, r) = min_norm_solve(&a, &DVector::from_vec(vec![2.0]), Tolerance::default()).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-14);
        assert!(r < 1e-14);
        // inconsistent: x = 1 and x = 2
        let a = m(&[&[1.], &[1.]]);
        let (x, r) = min_norm_solve(&a, &DVector::from_vec(vec![1.0, 2.0]), Tolerance::default()).unwrap();
        assert_abs_diff_eq!(x[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r, 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn interval_examples() {
        let iv = positivity_interval(&[1., 2., 1., 0.5], &[0., 0., 0., 0.]).unwrap();
        assert_eq!(iv, FeasibleInterval::UNBOUNDED);

        let iv = positivity_interval(&[1., 2., 1., 0.5], &[1., -1., 1., -1.]).unwrap();
        assert_eq!(iv, FeasibleInterval { lo: -1.0, hi: 0.5 });

        let iv = positivity_interval(&[1., 0., 3.], &[1., -2., 1.]).unwrap();
        assert_eq!(iv.hi, 0.0);
        assert_eq!(iv.lo, -1.0);

        assert!(positivity_interval(&[1., -0.1], &[1., 1.]).is_err());
        assert!(positivity_interval(&[1.], &[1., 1.]).is_err());
    }

    #[test]
    fn interval_serialization() {
        let s = serde_json::to_string(&FeasibleInterval::UNBOUNDED).unwrap();
        assert_eq!(s, r#"{"lo":"-inf","hi":"+inf"}"#);
        let iv: FeasibleInterval = serde_json::from_str(r#"{"lo":-0.4,"hi":"+inf"}"#).unwrap();
        assert_eq!(
            iv,
            FeasibleInterval {
                lo: -0.4,
                hi: f64::INFINITY
            }
        );
        let e: FeasibleInterval =
            serde_json::from_str(&serde_json::to_string(&FeasibleInterval::EMPTY).unwrap()).unwrap();
        assert!(e.is_empty());
    }
}
