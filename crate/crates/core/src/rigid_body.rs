//! Signed point-mass distributions, dynamical invisibility, and the
//! constructions that generate dynamically equivalent bodies.
//!
//! A body's rigid-body dynamics depend only on its total mass, center of mass,
//! and inertia tensor about the center of mass. All three moment sums are
//! linear in the masses, so the bodies with vanishing moments (invisible
//! bodies) form a linear space. Adding an invisible body to a physical one
//! gives an equivalent physical body as long as no mass turns negative.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, FeasibleInterval, Tolerance};

/// Positions within this fraction of the body's extent are one site.
pub const MERGE_REL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointMass {
    pub mass: f64,
    pub position: Vector3<f64>,
}

impl PointMass {
    pub fn new(mass: f64, position: [f64; 3]) -> Self {
        Self {
            mass,
            position: Vector3::from(position),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointMassSet {
    points: Vec<PointMass>,
}

impl PointMassSet {
    pub fn new(points: Vec<PointMass>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.mass.is_finite() || p.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("point {i} has a non-finite entry")));
            }
        }
        Ok(Self { points })
    }

    pub fn from_tuples(points: &[(f64, [f64; 3])]) -> Result<Self> {
        Self::new(points.iter().map(|&(m, x)| PointMass::new(m, x)).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[PointMass] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|p| p.mass).sum()
    }

    /// `Σ |m_j|`.
    pub fn absolute_mass(&self) -> f64 {
        self.points.iter().map(|p| p.mass.abs()).sum()
    }

    /// Largest distance of any point from the origin.
    pub fn extent(&self) -> f64 {
        self.points.iter().map(|p| p.position.norm()).fold(0.0, f64::max)
    }

    /// All masses nonnegative and total mass positive.
    pub fn is_physical(&self) -> bool {
        self.points.iter().all(|p| p.mass >= 0.0) && self.total_mass() > 0.0
    }

    /// Same masses, positions shifted by `offset`.
    pub fn translated(&self, offset: Vector3<f64>) -> Self {
        self.map_points(|p| PointMass {
            mass: p.mass,
            position: p.position + offset,
        })
    }

    /// Masses multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        self.map_points(|p| PointMass {
            mass: factor * p.mass,
            position: p.position,
        })
    }

    fn map_points(&self, f: impl Fn(&PointMass) -> PointMass) -> Self {
        Self {
            points: self.points.iter().map(f).collect(),
        }
    }

    fn chain(&self, other: &PointMassSet) -> Self {
        Self {
            points: self.points.iter().chain(&other.points).copied().collect(),
        }
    }
}

/// `Σ m x`.
pub fn mass_dipole(body: &PointMassSet) -> Vector3<f64> {
    body.points
        .iter()
        .fold(Vector3::zeros(), |acc, p| acc + p.position * p.mass)
}

/// `Σ m (|x - c|² δ - (x - c)(x - c)ᵀ)`.
pub fn inertia_about(body: &PointMassSet, center: &Vector3<f64>) -> Matrix3<f64> {
    body.points.iter().fold(Matrix3::zeros(), |acc, p| {
        let r = p.position - center;
        acc + (Matrix3::identity() * r.norm_squared() - r * r.transpose()) * p.mass
    })
}

/// Total mass, center of mass, and inertia tensors of a body.
#[derive(Clone, Debug, PartialEq)]
pub struct MechanicalSummary {
    pub total_mass: f64,
    /// `None` when the total mass vanishes within tolerance.
    pub center_of_mass: Option<Vector3<f64>>,
    pub inertia_about_origin: Matrix3<f64>,
    pub inertia_about_cm: Option<Matrix3<f64>>,
}

fn matrix_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

impl Serialize for MechanicalSummary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            total_mass: f64,
            center_of_mass: Option<[f64; 3]>,
            inertia_origin: [[f64; 3]; 3],
            inertia_cm: Option<[[f64; 3]; 3]>,
        }
        Repr {
            total_mass: self.total_mass,
            center_of_mass: self.center_of_mass.map(|c| [c.x, c.y, c.z]),
            inertia_origin: matrix_rows(&self.inertia_about_origin),
            inertia_cm: self.inertia_about_cm.as_ref().map(matrix_rows),
        }
        .serialize(s)
    }
}

pub fn summary(body: &PointMassSet, tol: Tolerance) -> MechanicalSummary {
    let total_mass = body.total_mass();
    let inertia_about_origin = inertia_about(body, &Vector3::zeros());
    let (center_of_mass, inertia_about_cm) = if total_mass.abs() > tol.threshold(body.absolute_mass()) {
        let cm = mass_dipole(body) / total_mass;
        (Some(cm), Some(inertia_about(body, &cm)))
    } else {
        (None, None)
    };
    MechanicalSummary {
        total_mass,
        center_of_mass,
        inertia_about_origin,
        inertia_about_cm,
    }
}

/// The three moment sums of a body in units of `Σ|m|`, `Σ|m|·r_max` and
/// `Σ|m|·r_max²`. All zero for the empty body.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentResiduals {
    pub mass: f64,
    pub dipole: f64,
    pub inertia: f64,
}

impl MomentResiduals {
    pub fn max(&self) -> f64 {
        self.mass.max(self.dipole).max(self.inertia)
    }
}

pub fn moment_residuals(body: &PointMassSet) -> MomentResiduals {
    let s = body.absolute_mass();
    if s == 0.0 {
        return MomentResiduals {
            mass: 0.0,
            dipole: 0.0,
            inertia: 0.0,
        };
    }
    let r = body.extent();
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    MomentResiduals {
        mass: body.total_mass().abs() / s,
        dipole: ratio(mass_dipole(body).norm(), s * r),
        inertia: ratio(inertia_about(body, &Vector3::zeros()).norm(), s * r * r),
    }
}

/// Zero total mass, zero mass dipole and zero inertia tensor about the
/// origin, each relative to the body's own mass and length scales.
pub fn is_invisible(body: &PointMassSet, tol: Tolerance) -> bool {
    let s = body.absolute_mass();
    let r = body.extent();
    body.total_mass().abs() <= tol.threshold(s)
        && mass_dipole(body).norm() <= tol.threshold(s * r)
        && inertia_about(body, &Vector3::zeros()).norm() <= tol.threshold(s * r * r)
}

fn require_centered(body: &PointMassSet, tol: Tolerance) -> Result<()> {
    let dipole = mass_dipole(body).norm();
    let bound = tol.threshold(body.absolute_mass() * body.extent());
    if dipole > bound {
        return Err(Error::precondition_failed(
            "cm_at_origin",
            format!("mass dipole |Σ m x| = {dipole:.6e} exceeds {bound:.6e}"),
        ));
    }
    Ok(())
}

/// Appends the point reflection of the body with negated masses.
pub fn parity_construction(body: &PointMassSet, tol: Tolerance) -> Result<PointMassSet> {
    require_centered(body, tol)?;
    let image = body.map_points(|p| PointMass {
        mass: -p.mass,
        position: -p.position,
    });
    Ok(body.chain(&image))
}

/// A proper or improper rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub const ORTHOGONALITY_TOL: f64 = 1e-10;

    pub fn new(matrix: Matrix3<f64>) -> Result<Self> {
        let dev = (matrix.transpose() * matrix - Matrix3::identity()).norm();
        if dev.is_nan() || dev > Self::ORTHOGONALITY_TOL {
            return Err(Error::invalid(format!(
                "rotation matrix is not orthogonal: |RᵀR - 1| = {dev:.3e}"
            )));
        }
        Ok(Self(matrix))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Proper rotation by `angle` radians about `axis`.
    pub fn about_axis(axis: Vector3<f64>, angle: f64) -> Result<Self> {
        let axis =
            nalgebra::Unit::try_new(axis, 1e-300).ok_or_else(|| Error::invalid("rotation axis must be nonzero"))?;
        Ok(Self(*nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix()))
    }

    /// Reflection through the plane with the given normal.
    pub fn reflection(normal: Vector3<f64>) -> Result<Self> {
        let n = nalgebra::Unit::try_new(normal, 1e-300)
            .ok_or_else(|| Error::invalid("reflection normal must be nonzero"))?;
        Ok(Self(Matrix3::identity() - n.into_inner() * n.transpose() * 2.0))
    }

    /// This rotation followed by inversion through the origin.
    pub fn inverted(&self) -> Self {
        Self(-self.0)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn is_proper(&self) -> bool {
        self.0.determinant() > 0.0
    }
}

/// Appends the rotated copy of an isotropic, centered body with negated masses.
pub fn rotation_construction(body: &PointMassSet, rotation: &Rotation3, tol: Tolerance) -> Result<PointMassSet> {
    require_centered(body, tol)?;
    let inertia = inertia_about(body, &Vector3::zeros());
    let trace = inertia.trace();
    let anisotropy = (inertia - Matrix3::identity() * (trace / 3.0)).norm();
    let bound = tol.threshold(trace.abs());
    if anisotropy > bound {
        return Err(Error::precondition_failed(
            "isotropic_inertia",
            format!("|I - (tr I / 3)·1| = {anisotropy:.6e} exceeds {bound:.6e}"),
        ));
    }
    let r = rotation.matrix();
    let image = body.map_points(|p| PointMass {
        mass: -p.mass,
        position: r * p.position,
    });
    Ok(body.chain(&image))
}

/// `a ∪ (-b)` for two centered bodies with equal total mass and equal
/// inertia tensors about the origin.
pub fn generalized_rotation_construction(a: &PointMassSet, b: &PointMassSet, tol: Tolerance) -> Result<PointMassSet> {
    require_centered(a, tol)?;
    require_centered(b, tol)?;
    let s = a.absolute_mass().max(b.absolute_mass());
    let r = a.extent().max(b.extent());
    let dm = (a.total_mass() - b.total_mass()).abs();
    if dm > tol.threshold(s) {
        return Err(Error::precondition_failed(
            "equal_total_mass",
            format!(
                "total masses {} and {} differ by {dm:.6e}",
                a.total_mass(),
                b.total_mass()
            ),
        ));
    }
    let di = (inertia_about(a, &Vector3::zeros()) - inertia_about(b, &Vector3::zeros())).norm();
    if di > tol.threshold(s * r * r) {
        return Err(Error::precondition_failed(
            "equal_inertia",
            format!("inertia tensors differ by {di:.6e} (Frobenius)"),
        ));
    }
    Ok(a.chain(&b.scaled(-1.0)))
}

/// Merges points whose positions agree within `MERGE_REL * r_max`, keeping
/// first-appearance order.
fn merge_sites(points: impl IntoIterator<Item = PointMass>, r_max: f64) -> Vec<(PointMass, f64)> {
    let eps = MERGE_REL * r_max;
    // (merged point, Σ|m| of the contributions)
    let mut sites: Vec<(PointMass, f64)> = Vec::new();
    for p in points {
        match sites.iter_mut().find(|(s, _)| (s.position - p.position).norm() <= eps) {
            Some((s, abs)) => {
                s.mass += p.mass;
                *abs += p.mass.abs();
            }
            None => sites.push((p, p.mass.abs())),
        }
    }
    sites
}

/// `Σ c_i · body_i`, with coincident points merged and cancelled sites dropped.
pub fn superpose(terms: &[(f64, &PointMassSet)]) -> PointMassSet {
    let r_max = terms.iter().map(|(_, b)| b.extent()).fold(0.0, f64::max);
    let scaled = terms.iter().flat_map(|&(c, b)| {
        b.points.iter().map(move |p| PointMass {
            mass: c * p.mass,
            position: p.position,
        })
    });
    let points = merge_sites(scaled, r_max)
        .into_iter()
        .filter(|(p, abs)| p.mass.abs() > 1e-12 * abs)
        .map(|(p, _)| p)
        .collect();
    PointMassSet { points }
}

/// Equal total mass, center of mass, and inertia tensor about the center of
/// mass. Both bodies must be physical.
pub fn are_equivalent(a: &PointMassSet, b: &PointMassSet, tol: Tolerance) -> Result<bool> {
    for (label, body) in [("first", a), ("second", b)] {
        if !body.is_physical() {
            return Err(Error::invalid(format!(
                "{label} body is not physical (needs all masses >= 0 and positive total)"
            )));
        }
    }
    let sa = summary(a, tol);
    let sb = summary(b, tol);
    let s = a.total_mass().max(b.total_mass());
    let r = a.extent().max(b.extent());
    if (sa.total_mass - sb.total_mass).abs() > tol.threshold(s) {
        return Ok(false);
    }
    let (Some(ca), Some(cb)) = (sa.center_of_mass, sb.center_of_mass) else {
        return Ok(false);
    };
    if (ca - cb).norm() > tol.threshold(r) {
        return Ok(false);
    }
    let (Some(ia), Some(ib)) = (sa.inertia_about_cm, sb.inertia_about_cm) else {
        return Ok(false);
    };
    Ok((ia - ib).norm() <= tol.threshold(s * r * r))
}

/// The line of bodies `base + t · invisible` on merged sites.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalentFamily {
    pub sites: Vec<Vector3<f64>>,
    pub base_masses: Vec<f64>,
    pub direction_masses: Vec<f64>,
    pub lambda_range: FeasibleInterval,
}

impl EquivalentFamily {
    pub fn member(&self, t: f64) -> PointMassSet {
        let points = self
            .sites
            .iter()
            .zip(self.base_masses.iter().zip(&self.direction_masses))
            .map(|(x, (b, d))| PointMass {
                mass: b + t * d,
                position: *x,
            })
            .collect();
        PointMassSet { points }
    }
}

/// The range of `t` for which `base + t · invisible` keeps every mass
/// nonnegative. Every member in that range is dynamically equivalent to
/// `base`.
pub fn equivalent_family(base: &PointMassSet, invisible: &PointMassSet, tol: Tolerance) -> Result<EquivalentFamily> {
    if !base.is_physical() {
        return Err(Error::invalid(
            "base body is not physical (needs all masses >= 0 and positive total)",
        ));
    }
    if !is_invisible(invisible, tol) {
        let r = moment_residuals(invisible);
        return Err(Error::precondition_failed(
            "invisible_direction",
            format!(
                "direction body is not invisible (scaled residuals mass {:.3e}, dipole {:.3e}, inertia {:.3e})",
                r.mass, r.dipole, r.inertia
            ),
        ));
    }
    let r_max = base.extent().max(invisible.extent());
    let eps = MERGE_REL * r_max;

    let base_sites = merge_sites(base.points.iter().copied(), r_max);
    let mut sites: Vec<Vector3<f64>> = base_sites.iter().map(|(p, _)| p.position).collect();
    let mut base_masses: Vec<f64> = base_sites.iter().map(|(p, _)| p.mass).collect();
    let mut direction_masses = vec![0.0; sites.len()];

    for p in &invisible.points {
        match sites.iter().position(|x| (x - p.position).norm() <= eps) {
            Some(k) => direction_masses[k] += p.mass,
            None => {
                sites.push(p.position);
                base_masses.push(0.0);
                direction_masses.push(p.mass);
            }
        }
    }
    let lambda_range = linalg::positivity_interval(&base_masses, &direction_masses)?;
    Ok(EquivalentFamily {
        sites,
        base_masses,
        direction_masses,
        lambda_range,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlatonicKind {
    Tetrahedron,
    Cube,
    Octahedron,
}

impl std::str::FromStr for PlatonicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tetrahedron" => Ok(Self::Tetrahedron),
            "cube" => Ok(Self::Cube),
            "octahedron" => Ok(Self::Octahedron),
            other => Err(Error::invalid(format!("unknown platonic solid `{other}`"))),
        }
    }
}

/// Equal masses on the vertices of a Platonic solid centered at the origin.
///
/// Tetrahedron: the even-parity corners of `(±1, ±1, ±1)`. Cube: all eight
/// corners. Octahedron: `±e_i`. Coordinates are multiplied by `scale`.
pub fn platonic_fixture(kind: PlatonicKind, mass: f64, scale: f64) -> Result<PointMassSet> {
    if !(mass > 0.0 && mass.is_finite() && scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!(
            "platonic fixture needs positive mass and scale, got {mass} and {scale}"
        )));
    }
    let corners = [-1.0, 1.0].into_iter().flat_map(|x| {
        [-1.0, 1.0]
            .into_iter()
            .flat_map(move |y| [-1.0, 1.0].map(|z| [x, y, z]))
    });
    let vertices: Vec<[f64; 3]> = match kind {
        PlatonicKind::Tetrahedron => corners.filter(|c| c[0] * c[1] * c[2] > 0.0).collect(),
        PlatonicKind::Cube => corners.collect(),
        PlatonicKind::Octahedron => (0..3)
            .flat_map(|i| {
                [1.0, -1.0].map(|s| {
                    let mut v = [0.0; 3];
                    v[i] = s;
                    v
                })
            })
            .collect(),
    };
    PointMassSet::new(
        vertices
            .into_iter()
            .map(|v| PointMass::new(mass, v.map(|c| c * scale)))
            .collect(),
    )
}

/// The four-point invisible body with masses `m, m·l1/l2, -m, -m·l1/l2` at
/// heights `l1, -l2, -l1, l2` on the z axis.
pub fn minimal_invisible_body(m: f64, l1: f64, l2: f64) -> Result<PointMassSet> {
    let m2 = m * l1 / l2;
    PointMassSet::from_tuples(&[
        (m, [0.0, 0.0, l1]),
        (m2, [0.0, 0.0, -l2]),
        (-m, [0.0, 0.0, -l1]),
        (-m2, [0.0, 0.0, l2]),
    ])
}
