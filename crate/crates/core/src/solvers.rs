//! Minimal relative-pose solvers from two affine correspondences: full 6DOF, and 5DOF when
//! the rotation angle is known. Both inter-camera and intra-camera correspondence pairs.

use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, DVector, Matrix3, OMatrix, Rotation3, Vector3, U3};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::constraints::{
    ac_residuals, build_determinant_system, PolyMatrix, essential_in_anchor_depths, row_count, AffineCorrespondence, ConstraintRow,
    Dof, CONSTRAINT_ROWS,
};
use crate::error::{Error, Result};
use crate::geometry::{
    camera_pair_essential, cayley_to_rotation, rig_relative_pose, rotation_angle, translation_from_depth, CameraRig,
    CayleyVector, Pose,
};
use crate::polysolver::{find_determinant_roots, RootOptions};

/// Whether the two correspondences of a sample are seen by different cameras in the two
/// views (inter) or by the same camera (intra).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Inter,
    Intra,
}

impl Mode {
    pub fn matches(self, ac: &AffineCorrespondence) -> bool {
        ac.is_inter() == (self == Mode::Inter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub roots: RootOptions,
    /// Add the rank-1 anchor block minors to the system. `None` picks the mode default:
    /// off for inter, on for intra (6DOF), off for 5DOF.
    pub use_extra: Option<bool>,
    /// `σ₂/σ₁` of the anchor matrix below which the depth null space counts as 2D.
    pub tau_rank: f64,
    /// Residual bound for least-squares roots of the 5DOF system, which is overdetermined
    /// and has no exact common root once the data is noisy.
    pub five_dof_stationary: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { roots: RootOptions::default(), use_extra: None, tau_rank: 1e-6, five_dof_stationary: Some(1e-3) }
    }
}

impl SolverOptions {
    pub fn use_extra_for(&self, mode: Mode, dof: Dof) -> bool {
        self.use_extra.unwrap_or(dof == Dof::Six && mode == Mode::Intra)
    }
}

/// One hypothesis for the view-1 → view-2 rig motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseCandidate {
    pub pose: Pose,
    pub cayley: CayleyVector,
    /// Depths of the anchor correspondence along its unit viewing rays in each view,
    /// measured from the ray point closest to the rig origin.
    pub depths: (f64, f64),
    pub residual: f64,
    pub scale_degenerate: bool,
    /// Both anchor depths lie in front of their cameras.
    pub positive_depth: bool,
    /// Rig translation recovered with the second correspondence as anchor.
    pub anchor1_translation: Option<Vector3<f64>>,
}

/// Candidates of one minimal solve, ordered by residual, and the reason when empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Solutions {
    pub candidates: Vec<PoseCandidate>,
    pub failure: Option<Error>,
}

impl Solutions {
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Candidate closest to `reference` in rotation, then translation.
    pub fn closest_to(&self, reference: &Pose) -> Option<&PoseCandidate> {
        let err = |c: &PoseCandidate| {
            let dr = rotation_angle(&(reference.rotation * c.pose.rotation.inverse()));
            (dr, (reference.translation - c.pose.translation).norm())
        };
        self.candidates
            .iter()
            .min_by(|a, b| err(a).partial_cmp(&err(b)).unwrap_or(Ordering::Equal))
    }
}

/// Depths and translations read off the anchored constraint matrix at a rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthRecovery {
    pub lambda1: f64,
    pub lambda2: f64,
    pub t1: Vector3<f64>,
    pub t2: Vector3<f64>,
    pub scale_degenerate: bool,
    pub singular_ratio: f64,
}

/// Numeric constraint matrix anchored on `acs[anchor]` for a given rotation.
pub fn constraint_matrix_at(
    rig: &CameraRig,
    acs: &[AffineCorrespondence; 2],
    anchor: usize,
    dof: Dof,
    rotation: &Rotation3<f64>,
) -> Result<OMatrix<f64, nalgebra::Dyn, U3>> {
    if anchor > 1 {
        return Err(Error::InvalidConfig("anchor must be 0 or 1"));
    }
    let slots = [&acs[anchor], &acs[1 - anchor]];
    let rows = row_count(dof);
    let mut f = OMatrix::<f64, nalgebra::Dyn, U3>::zeros(rows);
    for (i, &(slot, row)) in CONSTRAINT_ROWS.iter().take(rows).enumerate() {
        let parts = essential_in_anchor_depths(rig, slots[0], slots[slot], rotation)?;
        let k = match row {
            ConstraintRow::Epipolar => 0,
            ConstraintRow::Affine(k) => 1 + k,
        };
        f[(i, 0)] = ac_residuals(&parts.lambda1, slots[slot])[k];
        f[(i, 1)] = ac_residuals(&parts.lambda2, slots[slot])[k];
        f[(i, 2)] = ac_residuals(&parts.constant, slots[slot])[k];
    }
    Ok(f)
}

/// Camera-frame depths of the anchor point for anchor depths `(λ1, λ2)`.
fn camera_depths(rig: &CameraRig, ac: &AffineCorrespondence, lambda1: f64, lambda2: f64) -> Result<(f64, f64)> {
    let (l1, l2) = ac.lines(rig)?;
    let s_a = rig.camera(ac.cam_view1)?.center;
    let s_b = rig.camera(ac.cam_view2)?.center;
    Ok((lambda1 - s_a.dot(&l1.direction), lambda2 - s_b.dot(&l2.direction)))
}

/// Recovers the anchor depths from the null vector of the anchored constraint matrix at
/// `q`, then the translations from the anchor frame into both views.
///
/// When the null space is two-dimensional only the translation direction is defined; the
/// member with unit rig translation and the larger minimum camera depth is returned.
pub fn recover_depths_translation(
    rig: &CameraRig,
    acs: &[AffineCorrespondence; 2],
    anchor: usize,
    q: CayleyVector,
    dof: Dof,
    tau_rank: f64,
) -> Result<DepthRecovery> {
    let rotation = cayley_to_rotation(q);
    let f = constraint_matrix_at(rig, acs, anchor, dof, &rotation)?;
    let svd = f.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::NormalizationFailure)?;
    let sv = &svd.singular_values;
    let ratio = if sv[0] > 0.0 { sv[1] / sv[0] } else { 0.0 };
    let scale_degenerate = ratio < tau_rank;
    let ac = &acs[anchor];
    let (l1, l2) = ac.lines(rig)?;

    let null: Vector3<f64> = if scale_degenerate {
        let n2 = v_t.row(1).transpose();
        let n3 = v_t.row(2).transpose();
        degenerate_member(rig, ac, &rotation, &n2, &n3)?
    } else {
        let n = v_t.row(2).transpose();
        if n[2].abs() < 1e-9 {
            return Err(Error::NormalizationFailure);
        }
        n / n[2]
    };
    let (lambda1, lambda2) = (null[0], null[1]);
    Ok(DepthRecovery {
        lambda1,
        lambda2,
        t1: translation_from_depth(&l1, lambda1),
        t2: translation_from_depth(&l2, lambda2),
        scale_degenerate,
        singular_ratio: ratio,
    })
}

/// Picks `(λ1, λ2, 1)` in the span of `n2, n3` with `‖t2 − R t1‖ = 1`.
fn degenerate_member(
    rig: &CameraRig,
    ac: &AffineCorrespondence,
    rotation: &Rotation3<f64>,
    n2: &Vector3<f64>,
    n3: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    if n2[2].abs().max(n3[2].abs()) < 1e-9 {
        return Err(Error::NormalizationFailure);
    }
    // Affine line of normalized members: base + μ·dir.
    let (base, dir) = if n3[2].abs() >= n2[2].abs() {
        (n3 / n3[2], n2 - n3 * (n2[2] / n3[2]))
    } else {
        (n2 / n2[2], n3 - n2 * (n3[2] / n2[2]))
    };
    let (l1, l2) = ac.lines(rig)?;
    let motion = |v: &Vector3<f64>| {
        let t1 = translation_from_depth(&l1, v[0]);
        let t2 = translation_from_depth(&l2, v[1]);
        t2 - rotation * t1
    };
    let t0 = motion(&base);
    // Translation is affine in μ: T(μ) = t0 + μ d.
    let d = motion(&(base + dir)) - t0;
    let (a, b, c) = (d.dot(&d), 2.0 * t0.dot(&d), t0.dot(&t0) - 1.0);
    if !(a > 0.0) {
        return Ok(base);
    }
    let disc = b * b - 4.0 * a * c;
    let mus = if disc >= 0.0 {
        let s = disc.sqrt();
        [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
    } else {
        let m = -b / (2.0 * a);
        [m, m]
    };
    let mut best = base + dir * mus[0];
    let mut best_depth = f64::NEG_INFINITY;
    for mu in mus {
        let v = base + dir * mu;
        let (d1, d2) = camera_depths(rig, ac, v[0], v[1])?;
        if d1.min(d2) > best_depth {
            best_depth = d1.min(d2);
            best = v;
        }
    }
    Ok(best)
}

fn check_mode(acs: &[AffineCorrespondence; 2], mode: Mode) -> Result<()> {
    if acs.iter().all(|ac| mode.matches(ac)) {
        Ok(())
    } else {
        Err(Error::ModeMismatch)
    }
}

/// Minimal solve for the rig motion from two affine correspondences.
///
/// `prior_angle` (radians) selects the 5DOF solver. Candidates come back sorted by the
/// system residual; a failed root search yields no candidates and the error in
/// [`Solutions::failure`].
pub fn solve_relpose(
    rig: &CameraRig,
    acs: &[AffineCorrespondence; 2],
    mode: Mode,
    prior_angle: Option<f64>,
    opts: &SolverOptions,
) -> Result<Solutions> {
    check_mode(acs, mode)?;
    let dof = if prior_angle.is_some() { Dof::Five } else { Dof::Six };
    let system = build_determinant_system(rig, acs, dof, opts.use_extra_for(mode, dof), prior_angle)?;
    let mut root_opts = opts.roots.clone();
    if let Some(theta) = prior_angle {
        root_opts.sphere_radius = Some((theta / 2.0).tan());
        if root_opts.accept_stationary.is_none() {
            root_opts.accept_stationary = opts.five_dof_stationary;
        }
    }
    let roots = match find_determinant_roots(&system, &root_opts) {
        Ok(r) => r,
        Err(e @ Error::NoRootsFound) => return Ok(Solutions { candidates: Vec::new(), failure: Some(e) }),
        Err(e) => return Err(e),
    };

    let mut candidates = Vec::with_capacity(roots.len());
    let mut last_err = None;
    for (q, residual) in roots {
        let q = match dof {
            Dof::Six => polish_root(&system.matrices[0], q),
            Dof::Five => q,
        };
        if candidates.iter().any(|c: &PoseCandidate| c.cayley.distance(q) < root_opts.tau_dup) {
            continue;
        }
        let rec = match recover_depths_translation(rig, acs, 0, q, dof, opts.tau_rank) {
            Ok(r) => r,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let rotation = cayley_to_rotation(q);
        let (d1, d2) = camera_depths(rig, &acs[0], rec.lambda1, rec.lambda2)?;
        let anchor1_translation = recover_depths_translation(rig, acs, 1, q, dof, opts.tau_rank)
            .ok()
            .map(|r| rig_relative_pose(&rotation, &r.t1, &r.t2).translation);
        candidates.push(PoseCandidate {
            pose: rig_relative_pose(&rotation, &rec.t1, &rec.t2),
            cayley: q,
            depths: (rec.lambda1, rec.lambda2),
            residual,
            scale_degenerate: rec.scale_degenerate,
            positive_depth: d1 > 0.0 && d2 > 0.0,
            anchor1_translation,
        });
    }
    candidates.sort_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap_or(Ordering::Equal));
    let failure = if candidates.is_empty() { last_err } else { None };
    Ok(Solutions { candidates, failure })
}

/// Newton polish of a 6DOF root in the joint unknowns `(q, λ1, λ2)` of the anchored
/// system `F(q)·(λ1, λ2, 1) = 0`.
///
/// Where the scale is unobservable the minors of `F` vanish quadratically at the root, so
/// the root search can only place `q` to about the square root of the rounding level. The
/// joint system still vanishes linearly in `q`; its one null direction (the scale family)
/// is dropped by the pseudo-inverse.
fn polish_root(f: &PolyMatrix, q: CayleyVector) -> CayleyVector {
    let (rows, cols) = (f.rows(), f.cols());
    let eval = |q: CayleyVector, v: &Vector3<f64>, jac: Option<&mut DMatrix<f64>>| {
        let mut r = DVector::zeros(rows);
        let mut jac = jac;
        for i in 0..rows {
            for j in 0..cols {
                let (value, grad) = f.get(i, j).eval_with_gradient(q);
                r[i] += value * v[j];
                if let Some(jm) = jac.as_deref_mut() {
                    for k in 0..3 {
                        jm[(i, k)] += grad[k] * v[j];
                    }
                    if j < 2 {
                        jm[(i, 3 + j)] = value;
                    }
                }
            }
        }
        r
    };
    let svd = f.eval(q).svd(false, true);
    let sv = &svd.singular_values;
    // Away from a second null direction the determinant roots are already exact.
    if !(sv[1] < 1e-3 * sv[0]) {
        return q;
    }
    let Some(v_t) = svd.v_t else { return q };
    let n = v_t.row(cols - 1).transpose();
    if n[2].abs() < 1e-9 {
        return q;
    }
    let mut v = Vector3::new(n[0] / n[2], n[1] / n[2], 1.0);
    let mut x = q;
    let mut norm = eval(x, &v, None).norm();
    for _ in 0..8 {
        if norm == 0.0 {
            break;
        }
        let mut jac = DMatrix::zeros(rows, 5);
        let r = eval(x, &v, Some(&mut jac));
        let svd = jac.svd(true, true);
        let eps = svd.singular_values.max() * 1e-12;
        let Ok(step) = svd.solve(&(-r), eps) else { break };
        let nq = CayleyVector::new(x.x + step[0], x.y + step[1], x.z + step[2]);
        let nv = Vector3::new(v[0] + step[3], v[1] + step[4], 1.0);
        let next = eval(nq, &nv, None).norm();
        if !(next < norm) {
            break;
        }
        (x, v, norm) = (nq, nv, next);
    }
    // A polish that wanders off is not the same root.
    if x.distance(q) < 1e-4 {
        x
    } else {
        q
    }
}

/// Which critical motions hold for a pose and a set of correspondences.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DegeneracyReport {
    /// No rotation, and every inter correspondence's camera baseline is parallel to the
    /// rig translation.
    pub inter_parallel_baseline: bool,
    /// No rotation, intra correspondences only.
    pub intra_pure_translation: bool,
    /// Every intra camera's rotation-induced displacement `R s − s` is parallel to the rig
    /// translation.
    pub intra_constant_rotation_rate: bool,
    /// Largest correspondence residual with the translation scaled by 0.5 and 2.
    pub scaled_residual: f64,
}

impl DegeneracyReport {
    pub fn any(&self) -> bool {
        self.inter_parallel_baseline || self.intra_pure_translation || self.intra_constant_rotation_rate
    }
}

const PARALLEL_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-9;

fn parallel(a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    let (na, nb) = (a.norm(), b.norm());
    if na < 1e-12 || nb < 1e-12 {
        return true;
    }
    a.cross(b).norm() / (na * nb) < PARALLEL_TOL
}

/// Detects the motions under which the metric scale of the translation is unobservable.
pub fn check_degenerate_motion(rig: &CameraRig, pose: &Pose, acs: &[AffineCorrespondence]) -> DegeneracyReport {
    let t = pose.translation;
    let no_rotation = rotation_angle(&pose.rotation) < IDENTITY_TOL;
    let (inter, intra): (Vec<_>, Vec<_>) = acs.iter().partition(|ac| ac.is_inter());
    let centers = |ac: &AffineCorrespondence| {
        Some((rig.camera(ac.cam_view1).ok()?.center, rig.camera(ac.cam_view2).ok()?.center))
    };

    let inter_parallel_baseline = no_rotation
        && !inter.is_empty()
        && inter.iter().all(|ac| centers(ac).is_some_and(|(sa, sb)| parallel(&(sb - sa), &t)));
    let intra_pure_translation = no_rotation && inter.is_empty() && !intra.is_empty();
    let intra_constant_rotation_rate = !no_rotation
        && inter.is_empty()
        && !intra.is_empty()
        && intra
            .iter()
            .all(|ac| centers(ac).is_some_and(|(s, _)| parallel(&(pose.rotation * s - s), &t)));

    let mut report =
        DegeneracyReport { inter_parallel_baseline, intra_pure_translation, intra_constant_rotation_rate, scaled_residual: 0.0 };
    if report.any() {
        report.scaled_residual = scaled_translation_residual(rig, pose, acs, &[0.5, 2.0]);
    }
    report
}

/// Largest `ac_residuals` entry over `acs` with the translation of `pose` scaled by each
/// factor in `kappas`.
pub fn scaled_translation_residual(rig: &CameraRig, pose: &Pose, acs: &[AffineCorrespondence], kappas: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &k in kappas {
        let scaled = Pose::new(pose.rotation, pose.translation * k);
        for ac in acs {
            let r = camera_pair_essential(rig, ac.cam_view1, ac.cam_view2, &scaled)
                .map(|e| ac_residuals(&e, ac).amax())
                .unwrap_or(f64::INFINITY);
            worst = worst.max(r);
        }
    }
    worst
}

/// Essential matrix between the cameras of `ac` under `pose`, for callers that score.
pub fn correspondence_essential(rig: &CameraRig, ac: &AffineCorrespondence, pose: &Pose) -> Result<Matrix3<f64>> {
    camera_pair_essential(rig, ac.cam_view1, ac.cam_view2, pose)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Intrinsics, NormalizedImagePoint, RigCamera};
    use alloc::vec;
    use nalgebra::Matrix2;

    fn rig() -> CameraRig {
        let k = Intrinsics::new(400.0, 400.0, 320.0, 240.0);
        CameraRig::new(vec![
            RigCamera::new(k, Rotation3::identity(), Vector3::new(-0.5, 0.0, 0.0)),
            RigCamera::new(k, Rotation3::identity(), Vector3::new(0.5, 0.0, 0.0)),
        ])
        .unwrap()
    }

    fn ac(c1: usize, c2: usize) -> AffineCorrespondence {
        AffineCorrespondence::new(
            NormalizedImagePoint::new(0.1, 0.0),
            NormalizedImagePoint::new(0.2, 0.1),
            Matrix2::identity(),
            c1,
            c2,
        )
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let acs = [ac(0, 1), ac(0, 0)];
        let r = solve_relpose(&rig(), &acs, Mode::Inter, None, &SolverOptions::default());
        assert_eq!(r, Err(Error::ModeMismatch));
        let r = solve_relpose(&rig(), &[ac(0, 1), ac(1, 0)], Mode::Intra, None, &SolverOptions::default());
        assert_eq!(r, Err(Error::ModeMismatch));
    }

    #[test]
    fn mode_defaults_for_extra_equations() {
        let o = SolverOptions::default();
        assert!(!o.use_extra_for(Mode::Inter, Dof::Six));
        assert!(o.use_extra_for(Mode::Intra, Dof::Six));
        assert!(!o.use_extra_for(Mode::Intra, Dof::Five));
    }

    #[test]
    fn generic_motion_is_not_degenerate() {
        let pose = Pose::new(Rotation3::from_euler_angles(0.1, 0.2, 0.0), Vector3::new(0.3, 0.1, 1.0));
        let report = check_degenerate_motion(&rig(), &pose, &[ac(0, 1), ac(1, 0)]);
        assert!(!report.any());
        assert_eq!(report.scaled_residual, 0.0);
    }

    #[test]
    fn pure_translation_flags_intra_only() {
        let pose = Pose::new(Rotation3::identity(), Vector3::new(0.0, 0.0, 1.0));
        let intra = check_degenerate_motion(&rig(), &pose, &[ac(0, 0), ac(1, 1)]);
        assert!(intra.intra_pure_translation && !intra.inter_parallel_baseline);
        let inter = check_degenerate_motion(&rig(), &pose, &[ac(0, 1)]);
        assert!(!inter.any());
        let along_baseline = Pose::new(Rotation3::identity(), Vector3::new(2.0, 0.0, 0.0));
        assert!(check_degenerate_motion(&rig(), &along_baseline, &[ac(0, 1)]).inter_parallel_baseline);
    }
}
