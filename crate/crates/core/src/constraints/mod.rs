//! Affine-correspondence constraints on the rig motion.
//!
//! One correspondence is chosen as the anchor: the world frame is placed at its 3D point
//! with the orientation of the view-1 rig. The two translations from that frame into the
//! views are then linear in two depths along the anchor's viewing rays, so every essential
//! matrix between a pair of rig cameras is affine in `(λ1, λ2)` and, with the Cayley
//! denominator cleared, quadratic in `q`. Stacking the epipolar and affine residuals of the
//! correspondences yields a polynomial matrix `F(q)` with `F(q) (λ1, λ2, 1)ᵀ = 0`; its
//! vanishing minors form the equation systems solved for `q`.

pub mod poly;

use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix3, Rotation3, Vector3};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{plucker_line, skew, CameraRig, NormalizedImagePoint, PluckerLine};
use crate::polysolver::{det_poly, DeterminantSystem, Minor};
pub use poly::{PolyMatrix, TrivariatePoly};

/// A point match plus the 2×2 local affine frame mapping view-1 patches into view 2,
/// all in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCorrespondence {
    pub x: NormalizedImagePoint,
    pub x_prime: NormalizedImagePoint,
    pub affine: Matrix2<f64>,
    pub cam_view1: usize,
    pub cam_view2: usize,
}

impl AffineCorrespondence {
    pub fn new(
        x: NormalizedImagePoint,
        x_prime: NormalizedImagePoint,
        affine: Matrix2<f64>,
        cam_view1: usize,
        cam_view2: usize,
    ) -> Self {
        Self { x, x_prime, affine, cam_view1, cam_view2 }
    }

    /// Seen by different cameras in the two views.
    pub fn is_inter(&self) -> bool {
        self.cam_view1 != self.cam_view2
    }

    pub fn validate(&self, rig: &CameraRig) -> Result<()> {
        rig.camera(self.cam_view1)?;
        rig.camera(self.cam_view2)?;
        let det = self.affine.determinant();
        if !det.is_finite() || det == 0.0 {
            return Err(Error::InvalidCorrespondence("affine frame is singular"));
        }
        if ![self.x.u, self.x.v, self.x_prime.u, self.x_prime.v].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidCorrespondence("non-finite image point"));
        }
        Ok(())
    }

    /// Viewing rays in the view-1 and view-2 rig frames.
    pub fn lines(&self, rig: &CameraRig) -> Result<(PluckerLine, PluckerLine)> {
        Ok((plucker_line(rig, self.cam_view1, &self.x)?, plucker_line(rig, self.cam_view2, &self.x_prime)?))
    }
}

/// Degrees of freedom of the estimated motion: full 6DOF, or 5DOF with a known angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    Six,
    Five,
}

/// `E(λ1, λ2) = constant + λ1 · lambda1 + λ2 · lambda2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthEssentialTriple {
    pub constant: Matrix3<f64>,
    pub lambda1: Matrix3<f64>,
    pub lambda2: Matrix3<f64>,
}

impl DepthEssentialTriple {
    pub fn eval(&self, lambda1: f64, lambda2: f64) -> Matrix3<f64> {
        self.constant + self.lambda1 * lambda1 + self.lambda2 * lambda2
    }

    /// Coefficient matrix multiplying column `col` of `(λ1, λ2, 1)`.
    fn column(&self, col: usize) -> &Matrix3<f64> {
        match col {
            0 => &self.lambda1,
            1 => &self.lambda2,
            _ => &self.constant,
        }
    }
}

/// Depth-linear essential matrix for cameras `(cam_a, cam_b)` when the world frame sits
/// on the anchor rays `(view1, view2)`. Linear in `rotation`, which may be any 3×3 matrix.
fn depth_essential_parts(
    rig: &CameraRig,
    view1: &PluckerLine,
    view2: &PluckerLine,
    cam_a: usize,
    cam_b: usize,
    rotation: &Matrix3<f64>,
) -> Result<DepthEssentialTriple> {
    let a = rig.camera(cam_a)?;
    let b = rig.camera(cam_b)?;
    let qa = a.rotation.matrix();
    let qbt = b.rotation.matrix().transpose();
    let lambda1 = -(qbt * rotation * skew(&view1.direction) * qa);
    let lambda2 = qbt * skew(&view2.direction) * rotation * qa;
    let constant = qbt
        * (rotation * skew(&(a.center - view1.closest_point()))
            + skew(&(view2.closest_point() - b.center)) * rotation)
        * qa;
    Ok(DepthEssentialTriple { constant, lambda1, lambda2 })
}

/// Essential matrix of `ac`'s camera pair as an affine function of the depths of `ac`'s
/// own 3D point, for a known rig rotation.
pub fn essential_in_depths(
    rig: &CameraRig,
    ac: &AffineCorrespondence,
    rotation: &Rotation3<f64>,
) -> Result<DepthEssentialTriple> {
    let (l1, l2) = ac.lines(rig)?;
    depth_essential_parts(rig, &l1, &l2, ac.cam_view1, ac.cam_view2, rotation.matrix())
}

/// Same as [`essential_in_depths`] but for the camera pair of `ac` with the world frame
/// anchored on `anchor`.
pub fn essential_in_anchor_depths(
    rig: &CameraRig,
    anchor: &AffineCorrespondence,
    ac: &AffineCorrespondence,
    rotation: &Rotation3<f64>,
) -> Result<DepthEssentialTriple> {
    let (l1, l2) = anchor.lines(rig)?;
    depth_essential_parts(rig, &l1, &l2, ac.cam_view1, ac.cam_view2, rotation.matrix())
}

/// Which residual of a correspondence a matrix row carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintRow {
    Epipolar,
    Affine(usize),
}

fn row_value(e: &Matrix3<f64>, ac: &AffineCorrespondence, row: ConstraintRow) -> f64 {
    let x = ac.x.homogeneous();
    let xp = ac.x_prime.homogeneous();
    match row {
        ConstraintRow::Epipolar => xp.dot(&(e * x)),
        ConstraintRow::Affine(k) => {
            let ex = e * x;
            let etxp = e.transpose() * xp;
            etxp[k] + ac.affine[(0, k)] * ex[0] + ac.affine[(1, k)] * ex[1]
        }
    }
}

/// Epipolar residual `x'ᵀ E x` followed by the two affine residuals
/// `(Eᵀ x')₁₂ + Aᵀ (E x)₁₂`.
pub fn ac_residuals(e: &Matrix3<f64>, ac: &AffineCorrespondence) -> Vector3<f64> {
    Vector3::new(
        row_value(e, ac, ConstraintRow::Epipolar),
        row_value(e, ac, ConstraintRow::Affine(0)),
        row_value(e, ac, ConstraintRow::Affine(1)),
    )
}

/// Coefficient matrices of `(1 + |q|²) R(q)` for the ten monomials of degree ≤ 2.
fn cayley_basis() -> [Matrix3<f64>; 10] {
    use poly::monomial_index as idx;
    let mut basis = [Matrix3::zeros(); 10];
    let mut set = |mono: usize, r: usize, c: usize, v: f64| basis[mono][(r, c)] += v;
    // constant
    for d in 0..3 {
        set(idx(0, 0, 0), d, d, 1.0);
    }
    // x², y², z² on the diagonal
    for (d, sx, sy, sz) in [(0, 1.0, -1.0, -1.0), (1, -1.0, 1.0, -1.0), (2, -1.0, -1.0, 1.0)] {
        set(idx(2, 0, 0), d, d, sx);
        set(idx(0, 2, 0), d, d, sy);
        set(idx(0, 0, 2), d, d, sz);
    }
    // cross terms
    set(idx(1, 1, 0), 0, 1, 2.0);
    set(idx(1, 1, 0), 1, 0, 2.0);
    set(idx(1, 0, 1), 0, 2, 2.0);
    set(idx(1, 0, 1), 2, 0, 2.0);
    set(idx(0, 1, 1), 1, 2, 2.0);
    set(idx(0, 1, 1), 2, 1, 2.0);
    // linear (skew) terms
    set(idx(0, 0, 1), 0, 1, -2.0);
    set(idx(0, 0, 1), 1, 0, 2.0);
    set(idx(0, 1, 0), 0, 2, 2.0);
    set(idx(0, 1, 0), 2, 0, -2.0);
    set(idx(1, 0, 0), 1, 2, -2.0);
    set(idx(1, 0, 0), 2, 1, 2.0);
    basis
}

/// One row of a constraint matrix: the residual `row` of `ac`, with the world frame on
/// `anchor`, as three quadratics multiplying `(λ1, λ2, 1)`.
pub fn constraint_row(
    rig: &CameraRig,
    anchor: &AffineCorrespondence,
    ac: &AffineCorrespondence,
    row: ConstraintRow,
) -> Result<[TrivariatePoly; 3]> {
    let (l1, l2) = anchor.lines(rig)?;
    let basis = cayley_basis();
    let mut coeffs = [[0.0; 10]; 3];
    for (mono, c) in basis.iter().enumerate() {
        let parts = depth_essential_parts(rig, &l1, &l2, ac.cam_view1, ac.cam_view2, c)?;
        for (col, out) in coeffs.iter_mut().enumerate() {
            out[mono] = row_value(parts.column(col), ac, row);
        }
    }
    Ok(coeffs.map(|c| TrivariatePoly::from_coeffs(2, c.to_vec())))
}

fn rays_coincide(a: &PluckerLine, b: &PluckerLine) -> bool {
    let scale = 1.0 + a.moment.norm().max(b.moment.norm());
    (a.direction - b.direction).norm() < 1e-12 && (a.moment - b.moment).norm() < 1e-12 * scale
}

/// Rows of the anchored constraint matrix as `(slot, residual)`, slot 0 being the anchor:
/// the anchor's two affine residuals, then the other correspondence's epipolar residual
/// and its affine residuals. The 5DOF matrix keeps the first four rows.
pub const CONSTRAINT_ROWS: [(usize, ConstraintRow); 5] = [
    (0, ConstraintRow::Affine(0)),
    (0, ConstraintRow::Affine(1)),
    (1, ConstraintRow::Epipolar),
    (1, ConstraintRow::Affine(0)),
    (1, ConstraintRow::Affine(1)),
];

pub fn row_count(dof: Dof) -> usize {
    match dof {
        Dof::Six => 5,
        Dof::Five => 4,
    }
}

/// The hidden-variable matrix `F(q)` (5×3 for 6DOF, 4×3 for 5DOF) with the world frame on
/// `acs[anchor]`; columns multiply `(λ1, λ2, 1)`.
pub fn build_constraint_matrix(
    rig: &CameraRig,
    acs: &[AffineCorrespondence; 2],
    anchor: usize,
    dof: Dof,
) -> Result<PolyMatrix> {
    if anchor > 1 {
        return Err(Error::InvalidConfig("anchor must be 0 or 1"));
    }
    for ac in acs {
        ac.validate(rig)?;
    }
    let (a1, a2) = acs[0].lines(rig)?;
    let (b1, b2) = acs[1].lines(rig)?;
    if rays_coincide(&a1, &b1) && rays_coincide(&a2, &b2) {
        return Err(Error::DegenerateInput("correspondences share identical rays in both views"));
    }
    let slots = [&acs[anchor], &acs[1 - anchor]];
    let mut entries = Vec::with_capacity(15);
    for &(slot, row) in CONSTRAINT_ROWS.iter().take(row_count(dof)) {
        entries.extend(constraint_row(rig, slots[0], slots[slot], row)?);
    }
    PolyMatrix::new(row_count(dof), 3, entries)
}

/// Index triples `i < j < k` below `n`, in lexicographic order.
fn triples(n: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..n).flat_map(move |i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k])))
}

/// Vanishing 3×3 minors of `F` (rank ≤ 2).
pub fn rank_two_minors(f: &PolyMatrix) -> Result<Vec<TrivariatePoly>> {
    triples(f.rows()).map(|rows| det_poly(&f.submatrix(&rows, &[0, 1, 2]))).collect()
}

/// Vanishing 2×2 minors of the anchor's two affine rows (rank 1).
pub fn anchor_block_minors(f: &PolyMatrix) -> Result<Vec<TrivariatePoly>> {
    [[0, 1], [0, 2], [1, 2]]
        .iter()
        .map(|cols| det_poly(&f.submatrix(&[0, 1], cols)))
        .collect()
}

/// `|q|² − tan²(θ/2)`: the rotation has angle `θ`.
pub fn angle_sphere(angle: f64) -> TrivariatePoly {
    let r = (angle / 2.0).tan();
    let mut p = TrivariatePoly::zero(2);
    p.add_term(1.0, 2, 0, 0);
    p.add_term(1.0, 0, 2, 0);
    p.add_term(1.0, 0, 0, 2);
    p.add_term(-r * r, 0, 0, 0);
    p
}

fn rank_two_minor_sets(matrix: usize, rows: usize) -> impl Iterator<Item = Minor> {
    triples(rows).map(move |r| Minor { matrix, rows: r.to_vec(), cols: alloc::vec![0, 1, 2] })
}

fn anchor_block_minor_sets(matrix: usize) -> impl Iterator<Item = Minor> {
    [[0, 1], [0, 2], [1, 2]]
        .into_iter()
        .map(move |c| Minor { matrix, rows: alloc::vec![0, 1], cols: c.to_vec() })
}

/// Equation system in factored form: the anchored matrices `F_0`, `F_1` and the minors
/// that must vanish.
///
/// 6DOF: the ten 3×3 minors of each anchored 5×3 matrix (20 sextics), plus with
/// `use_extra` the three 2×2 minors of each anchor block (6 quartics).
/// 5DOF: the four 3×3 minors of each anchored 4×3 matrix (8 sextics), with `use_extra`
/// the first anchor's three block minors, and the angle sphere.
pub fn build_determinant_system(
    rig: &CameraRig,
    acs: &[AffineCorrespondence; 2],
    dof: Dof,
    use_extra: bool,
    angle: Option<f64>,
) -> Result<DeterminantSystem> {
    let angle = match (dof, angle) {
        (Dof::Five, None) => return Err(Error::MissingAnglePrior),
        (Dof::Five, Some(a)) if !(a.is_finite() && (0.0..core::f64::consts::PI).contains(&a)) => {
            return Err(Error::InvalidConfig("rotation angle prior must lie in [0, π)"))
        }
        (_, a) => a,
    };
    let f0 = build_constraint_matrix(rig, acs, 0, dof)?;
    let f1 = build_constraint_matrix(rig, acs, 1, dof)?;
    let mut minors: Vec<Minor> = rank_two_minor_sets(0, f0.rows()).chain(rank_two_minor_sets(1, f1.rows())).collect();
    let mut extra = Vec::new();
    match dof {
        Dof::Six => {
            if use_extra {
                minors.extend(anchor_block_minor_sets(0).chain(anchor_block_minor_sets(1)));
            }
        }
        Dof::Five => {
            if use_extra {
                minors.extend(anchor_block_minor_sets(0));
            }
            extra.push(angle_sphere(angle.unwrap_or_default()));
        }
    }
    Ok(DeterminantSystem { matrices: alloc::vec![f0, f1], minors, extra })
}

/// Polynomial system in `q` whose real roots include the rig rotation: the expansion of
/// [`build_determinant_system`], every polynomial scaled to unit max-abs coefficient.
pub fn build_equation_system(
    rig: &CameraRig,
    acs: &[AffineCorrespondence; 2],
    dof: Dof,
    use_extra: bool,
    angle: Option<f64>,
) -> Result<Vec<TrivariatePoly>> {
    build_determinant_system(rig, acs, dof, use_extra, angle)?.expand()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cayley_to_rotation, CayleyVector};

    #[test]
    fn cayley_basis_reassembles_the_rotation() {
        let q = CayleyVector::new(0.3, -0.7, 0.2);
        let monos = [
            (0, 0, 0),
            (1, 0, 0),
            (0, 1, 0),
            (0, 0, 1),
            (2, 0, 0),
            (1, 1, 0),
            (1, 0, 1),
            (0, 2, 0),
            (0, 1, 1),
            (0, 0, 2),
        ];
        let mut m = Matrix3::zeros();
        for (a, b, c) in monos {
            m += cayley_basis()[poly::monomial_index(a, b, c)] * (q.x.powi(a as i32) * q.y.powi(b as i32) * q.z.powi(c as i32));
        }
        let r = cayley_to_rotation(q);
        assert!((m / (1.0 + q.norm() * q.norm()) - r.matrix()).norm() < 1e-15);
    }

    #[test]
    fn residuals_scale_linearly() {
        let ac = AffineCorrespondence::new(
            NormalizedImagePoint::new(0.1, -0.2),
            NormalizedImagePoint::new(0.15, -0.1),
            Matrix2::new(1.1, 0.1, -0.05, 0.9),
            0,
            0,
        );
        let e = Matrix3::new(0.1, -0.4, 0.2, 0.3, 0.05, -0.6, -0.2, 0.7, 0.01);
        let r = ac_residuals(&e, &ac);
        let r2 = ac_residuals(&(e * 3.5), &ac);
        assert!((r2 - r * 3.5).norm() < 1e-15);
    }

    #[test]
    fn epipole_ray_has_zero_epipolar_residual() {
        let ac = AffineCorrespondence::new(
            NormalizedImagePoint::new(0.0, 0.0),
            NormalizedImagePoint::new(0.0, 0.0),
            Matrix2::identity(),
            0,
            0,
        );
        let e = skew(&Vector3::z());
        assert_eq!(ac_residuals(&e, &ac)[0], 0.0);
    }

    #[test]
    fn sphere_vanishes_at_matching_angle() {
        let angle = 0.6;
        let q = CayleyVector::new(1.0, 2.0, -0.5);
        let q = CayleyVector::from_vector(&(q.to_vector().normalize() * (angle / 2.0).tan()));
        assert!(angle_sphere(angle).eval(q).abs() < 1e-15);
    }
}
