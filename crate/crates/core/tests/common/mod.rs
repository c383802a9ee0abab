//! Brute-force oracles shared by the integration tests. None of these call
//! into the code paths they are used to check.

#![allow(dead_code)]

use invisibility::greybox::{DensityState, HermitianOperator};
use invisibility::rigid_body::PointMassSet;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Trapezoid over `n` equal panels of `[a, b]`, evaluating `f` directly.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + h * i as f64)).sum();
    h * (0.5 * f(a) + inner + 0.5 * f(b))
}

/// Total mass, CM and inertia (about origin and about CM) by explicit index
/// loops over plain arrays.
pub struct Moments {
    pub total: f64,
    pub cm: [f64; 3],
    pub inertia_origin: [[f64; 3]; 3],
    pub inertia_cm: [[f64; 3]; 3],
}

pub fn direct_moments(body: &PointMassSet) -> Moments {
    let pts: Vec<(f64, [f64; 3])> = body
        .points()
        .iter()
        .map(|p| (p.mass, [p.position.x, p.position.y, p.position.z]))
        .collect();
    let total: f64 = pts.iter().map(|p| p.0).sum();
    let mut cm = [0.0; 3];
    for (m, x) in &pts {
        for a in 0..3 {
            cm[a] += m * x[a];
        }
    }
    for c in &mut cm {
        *c /= total;
    }
    let inertia = |center: [f64; 3]| {
        let mut out = [[0.0; 3]; 3];
        for (m, x) in &pts {
            let r = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
            let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            for a in 0..3 {
                for b in 0..3 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    out[a][b] += m * (r2 * delta - r[a] * r[b]);
                }
            }
        }
        out
    };
    Moments {
        total,
        cm,
        inertia_origin: inertia([0.0; 3]),
        inertia_cm: inertia(cm),
    }
}

/// `Σ_i Σ_j A_ij B_ji`.
pub fn direct_trace_product(a: &HermitianOperator, b: &HermitianOperator) -> Complex64 {
    let d = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a.matrix()[(i, j)] * b.matrix()[(j, i)];
        }
    }
    acc
}

pub fn min_eig(m: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Boundary of `{t : λ_min(ρ + tX) ≥ 0}` on one side of zero, by bisection
/// between 0 and `bound` (which must be infeasible).
pub fn bisect_psd_boundary(rho: &DMatrix<Complex64>, x: &DMatrix<Complex64>, bound: f64) -> f64 {
    let (mut inside, mut outside) = (0.0, bound);
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if min_eig(&(rho + x * Complex64::new(mid, 0.0))) >= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

pub fn random_complex_matrix<R: Rng>(rng: &mut R, d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> HermitianOperator {
    let g = random_complex_matrix(rng, d);
    HermitianOperator::new((&g + g.adjoint()).scale(0.5)).unwrap()
}

pub fn random_traceless<R: Rng>(rng: &mut R, d: usize) -> HermitianOperator {
    let h = random_hermitian(rng, d);
    let shift = h.trace() / d as f64;
    h.add_scaled(&HermitianOperator::identity(d), -shift).unwrap()
}

/// Full-rank density matrix `G G† / Tr(G G†)`.
pub fn random_full_rank_state<R: Rng>(rng: &mut R, d: usize) -> DensityState {
    let g = random_complex_matrix(rng, d);
    let p = &g * g.adjoint();
    let tr: f64 = p.diagonal().iter().map(|z| z.re).sum();
    let op = HermitianOperator::new(p.scale(1.0 / tr)).unwrap();
    DensityState::new(op).unwrap()
}

/// Uniformly random rotation from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> nalgebra::Matrix3<f64> {
    let q = nalgebra::Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    *nalgebra::UnitQuaternion::from_quaternion(q)
        .to_rotation_matrix()
        .matrix()
}
