//! Rigid-body, rotation and line primitives shared by the rest of the crate.
//!
//! Conventions:
//! - A rig camera maps camera coordinates into the rig frame as `X_rig = Q X_cam + s`,
//!   so `s` is the camera centre in the rig frame.
//! - A [`Pose`] maps view-1 coordinates into view-2 coordinates: `X_2 = R X_1 + t`.
//! - Plücker lines store a unit direction `p` and moment `m = p × c` for any point `c`
//!   on the line, so `m × p` is the point on the line closest to the origin.

use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix3, Rotation3, Vector2, Vector3};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Three Cayley (Rodrigues) parameters `q`; the encoded rotation angle is `2 atan(|q|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CayleyVector {
    pub const ZERO: CayleyVector = CayleyVector { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotation angle in radians, in `[0, π)`.
    pub fn angle(self) -> f64 {
        2.0 * self.norm().atan()
    }

    pub fn distance(self, other: CayleyVector) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }
}

/// `(1 + |q|²) R(q)`: the Cayley rotation with its denominator cleared. Every entry is a
/// quadratic in `q`.
pub fn cayley_unnormalized(q: CayleyVector) -> Matrix3<f64> {
    let CayleyVector { x, y, z } = q;
    Matrix3::new(
        1.0 + x * x - y * y - z * z,
        2.0 * x * y - 2.0 * z,
        2.0 * y + 2.0 * x * z,
        2.0 * x * y + 2.0 * z,
        1.0 - x * x + y * y - z * z,
        2.0 * y * z - 2.0 * x,
        2.0 * x * z - 2.0 * y,
        2.0 * x + 2.0 * y * z,
        1.0 - x * x - y * y + z * z,
    )
}

pub fn cayley_to_rotation(q: CayleyVector) -> Rotation3<f64> {
    let scale = 1.0 / (1.0 + q.x * q.x + q.y * q.y + q.z * q.z);
    Rotation3::from_matrix_unchecked(cayley_unnormalized(q) * scale)
}

/// Inverse of [`cayley_to_rotation`]. Fails for rotations too close to 180 degrees,
/// where the Cayley parameters diverge.
pub fn rotation_to_cayley(r: &Rotation3<f64>) -> Result<CayleyVector> {
    let m = r.matrix();
    let denom = 1.0 + m.trace();
    if denom < 1e-9 {
        return Err(Error::NearPiRotation);
    }
    Ok(CayleyVector::new(
        (m[(2, 1)] - m[(1, 2)]) / denom,
        (m[(0, 2)] - m[(2, 0)]) / denom,
        (m[(1, 0)] - m[(0, 1)]) / denom,
    ))
}

/// Rotation angle of `r` in radians.
pub fn rotation_angle(r: &Rotation3<f64>) -> f64 {
    let m = r.matrix();
    let s = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
    (0.5 * s.norm()).atan2(0.5 * (m.trace() - 1.0))
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rigid transform from view-1 coordinates to view-2 coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Rotation3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Rotation3::identity(), Vector3::zeros())
    }

    pub fn transform_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * x + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.inverse();
        Self::new(rt, -(rt * self.translation))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Pose) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn essential(&self) -> Matrix3<f64> {
        skew(&self.translation) * self.rotation.matrix()
    }
}

/// Pinhole intrinsics in pixels, no skew or distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Self {
        Self { fx, fy, cx, cy }
    }

    pub fn normalize(&self, px: &Vector2<f64>) -> NormalizedImagePoint {
        NormalizedImagePoint::new((px.x - self.cx) / self.fx, (px.y - self.cy) / self.fy)
    }

    pub fn to_pixel(&self, x: &NormalizedImagePoint) -> Vector2<f64> {
        Vector2::new(x.u * self.fx + self.cx, x.v * self.fy + self.cy)
    }

    pub fn focal_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.fx, 0.0, 0.0, self.fy)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }
}

/// One camera of a rig: intrinsics plus extrinsics `{Q, s}` relative to the rig frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigCamera {
    pub intrinsics: Intrinsics,
    pub rotation: Rotation3<f64>,
    pub center: Vector3<f64>,
}

impl RigCamera {
    pub fn new(intrinsics: Intrinsics, rotation: Rotation3<f64>, center: Vector3<f64>) -> Self {
        Self { intrinsics, rotation, center }
    }

    /// Projects a rig-frame point into normalized coordinates, `None` behind the camera.
    pub fn project(&self, x_rig: &Vector3<f64>) -> Option<NormalizedImagePoint> {
        let xc = self.rotation.inverse() * (x_rig - self.center);
        if xc.z <= 0.0 {
            return None;
        }
        Some(NormalizedImagePoint::new(xc.x / xc.z, xc.y / xc.z))
    }
}

/// A calibrated generalized camera made of rigidly mounted pinhole cameras.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    cameras: Vec<RigCamera>,
}

impl CameraRig {
    pub fn new(cameras: Vec<RigCamera>) -> Result<Self> {
        if cameras.is_empty() {
            return Err(Error::InvalidRig("a rig needs at least one camera"));
        }
        for cam in &cameras {
            let k = &cam.intrinsics;
            if !(k.fx > 0.0 && k.fy > 0.0 && k.fx.is_finite() && k.fy.is_finite()) {
                return Err(Error::InvalidRig("focal lengths must be positive"));
            }
            if !(k.cx.is_finite() && k.cy.is_finite() && cam.center.iter().all(|v| v.is_finite())) {
                return Err(Error::InvalidRig("non-finite camera parameters"));
            }
            let q = cam.rotation.matrix();
            let ortho = (q.transpose() * q - Matrix3::identity()).norm();
            if !(ortho < 1e-9) || (q.determinant() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidRig("camera rotation is not orthonormal"));
            }
        }
        Ok(Self { cameras })
    }

    pub fn cameras(&self) -> &[RigCamera] {
        &self.cameras
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn camera(&self, index: usize) -> Result<&RigCamera> {
        self.cameras
            .get(index)
            .ok_or(Error::CameraIndex { index, cameras: self.cameras.len() })
    }
}

/// A 3D line through `m × p` with unit direction `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluckerLine {
    pub direction: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl PluckerLine {
    /// Line through `point` with the given (not necessarily unit) direction.
    pub fn through(point: &Vector3<f64>, direction: &Vector3<f64>) -> Self {
        let p = direction.normalize();
        Self { direction: p, moment: p.cross(point) }
    }

    /// Point on the line closest to the origin.
    pub fn closest_point(&self) -> Vector3<f64> {
        self.moment.cross(&self.direction)
    }

    pub fn point_at(&self, depth: f64) -> Vector3<f64> {
        translation_from_depth(self, depth)
    }

    pub fn distance_to(&self, x: &Vector3<f64>) -> f64 {
        let d = x - self.closest_point();
        (d - self.direction * d.dot(&self.direction)).norm()
    }
}

/// Homogeneous image point `(u, v, 1)` with intrinsics removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedImagePoint {
    pub u: f64,
    pub v: f64,
}

impl NormalizedImagePoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn from_vector(v: &Vector2<f64>) -> Self {
        Self::new(v.x, v.y)
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.u, self.v)
    }

    pub fn homogeneous(self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, 1.0)
    }
}

/// The viewing ray of `x` in camera `cam_index`, expressed in the rig frame.
pub fn plucker_line(
    rig: &CameraRig,
    cam_index: usize,
    x: &NormalizedImagePoint,
) -> Result<PluckerLine> {
    let cam = rig.camera(cam_index)?;
    Ok(PluckerLine::through(&cam.center, &(cam.rotation * x.homogeneous())))
}

/// `m × p + λ p`: the rig-frame position of the point at depth parameter `depth`.
pub fn translation_from_depth(line: &PluckerLine, depth: f64) -> Vector3<f64> {
    line.closest_point() + line.direction * depth
}

/// Pose of camera `cam_b` in view 2 relative to camera `cam_a` in view 1, given the rig
/// rotation and the two translations from the anchor frame into each view.
///
/// Returns the camera pose and its essential matrix `[t']× R'`.
pub fn relative_camera_pose(
    rig: &CameraRig,
    cam_a: usize,
    cam_b: usize,
    rotation: &Rotation3<f64>,
    t1: &Vector3<f64>,
    t2: &Vector3<f64>,
) -> Result<(Pose, Matrix3<f64>)> {
    let a = rig.camera(cam_a)?;
    let b = rig.camera(cam_b)?;
    let qbt = b.rotation.inverse();
    let r_cam = qbt * rotation * a.rotation;
    let t_cam = qbt * (rotation * a.center - rotation * t1 + t2 - b.center);
    let pose = Pose::new(r_cam, t_cam);
    let e = pose.essential();
    Ok((pose, e))
}

/// View-1 to view-2 rig motion from the anchor parameterization (`R_1 = I`, `R_2 = R`).
pub fn rig_relative_pose(rotation: &Rotation3<f64>, t1: &Vector3<f64>, t2: &Vector3<f64>) -> Pose {
    Pose::new(*rotation, t2 - rotation * t1)
}

/// Essential matrix between camera `cam_a` (view 1) and camera `cam_b` (view 2) under the
/// rig motion `motion`.
pub fn camera_pair_essential(
    rig: &CameraRig,
    cam_a: usize,
    cam_b: usize,
    motion: &Pose,
) -> Result<Matrix3<f64>> {
    relative_camera_pose(rig, cam_a, cam_b, &motion.rotation, &Vector3::zeros(), &motion.translation)
        .map(|(_, e)| e)
}
