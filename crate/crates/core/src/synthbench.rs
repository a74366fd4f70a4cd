//! Synthetic two-camera scenes with planar affine correspondences, the four-corner AC
//! noising protocol, point-correspondence conversion and pose error metrics.

use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix3, Rotation3, Unit, Vector2, Vector3};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::constraints::AffineCorrespondence;
use crate::error::{Error, Result};
use crate::geometry::{
    relative_camera_pose, rotation_angle, CameraRig, Intrinsics, NormalizedImagePoint, Pose, RigCamera,
};
use crate::robust::{ransac_estimate, RansacConfig};
use crate::solvers::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionType {
    Forward,
    Sideways,
    Random,
}

impl MotionType {
    pub fn name(self) -> &'static str {
        match self {
            MotionType::Forward => "forward",
            MotionType::Sideways => "sideways",
            MotionType::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub baseline_m: f64,
    pub motion_length_m: f64,
    pub width: u32,
    pub height: u32,
    pub focal_px: f64,
    pub principal_point: (f64, f64),
    pub cube_min: Vector3<f64>,
    pub cube_max: Vector3<f64>,
    pub n_ground_plane_acs: usize,
    pub n_random_plane_acs: usize,
    pub support_side_px: f64,
    pub noise_sigma_px: f64,
    pub motion_type: MotionType,
    /// Rotation angles are drawn uniformly in `[0, max_rotation_deg]`.
    pub max_rotation_deg: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            baseline_m: 1.0,
            motion_length_m: 3.0,
            width: 640,
            height: 480,
            focal_px: 400.0,
            principal_point: (320.0, 240.0),
            cube_min: Vector3::new(-5.0, -5.0, 10.0),
            cube_max: Vector3::new(5.0, 5.0, 20.0),
            n_ground_plane_acs: 50,
            n_random_plane_acs: 50,
            support_side_px: 40.0,
            noise_sigma_px: 0.0,
            motion_type: MotionType::Random,
            max_rotation_deg: 30.0,
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.baseline_m, self.motion_length_m, self.focal_px, self.support_side_px];
        if !positive.iter().all(|v| v.is_finite() && *v > 0.0) || self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig("scene dimensions must be positive"));
        }
        if !(self.noise_sigma_px >= 0.0) || !(0.0..180.0).contains(&self.max_rotation_deg) {
            return Err(Error::InvalidConfig("noise must be non-negative and rotation below 180 degrees"));
        }
        if (0..3).any(|i| !(self.cube_min[i] < self.cube_max[i])) {
            return Err(Error::InvalidConfig("cube minimum must be below maximum on every axis"));
        }
        if self.n_ground_plane_acs + self.n_random_plane_acs == 0 {
            return Err(Error::InvalidConfig("scene needs at least one correspondence"));
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> Intrinsics {
        Intrinsics::new(self.focal_px, self.focal_px, self.principal_point.0, self.principal_point.1)
    }

    /// Two cameras with identity orientation at `(∓baseline/2, 0, 0)`.
    pub fn rig(&self) -> CameraRig {
        let k = self.intrinsics();
        let h = self.baseline_m / 2.0;
        CameraRig::new(alloc::vec![
            RigCamera::new(k, Rotation3::identity(), Vector3::new(-h, 0.0, 0.0)),
            RigCamera::new(k, Rotation3::identity(), Vector3::new(h, 0.0, 0.0)),
        ])
        .expect("positive focal length")
    }

    fn in_image(&self, px: &Vector2<f64>) -> bool {
        px.x >= 0.0 && px.y >= 0.0 && px.x < self.width as f64 && px.y < self.height as f64
    }
}

/// `normal · X = offset` in view-1 rig coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

/// A noise-free correspondence with its ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneAc {
    pub ac: AffineCorrespondence,
    /// 3D point in the view-1 rig frame.
    pub point: Vector3<f64>,
    pub plane: usize,
    /// Plane-induced homography between the two cameras, normalized coordinates.
    pub homography: Matrix3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub config: SceneConfig,
    pub rig: CameraRig,
    pub gt_pose: Pose,
    pub planes: Vec<Plane>,
    /// Inter and intra routing of every point, interleaved.
    pub acs: Vec<SceneAc>,
}

impl SyntheticScene {
    pub fn indices(&self, mode: Mode) -> Vec<usize> {
        (0..self.acs.len()).filter(|&i| mode.matches(&self.acs[i].ac)).collect()
    }

    pub fn correspondences(&self, mode: Mode) -> Vec<AffineCorrespondence> {
        self.acs.iter().map(|s| s.ac).filter(|ac| mode.matches(ac)).collect()
    }
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n: f64 = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

/// Rotation about a uniformly random axis by an angle uniform in `[0, max_angle]` radians.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, max_angle: f64) -> Rotation3<f64> {
    let axis = random_unit_vector(rng);
    let angle = if max_angle > 0.0 { rng.random_range(0.0..=max_angle) } else { 0.0 };
    Rotation3::from_axis_angle(&Unit::new_unchecked(axis), angle)
}

/// Homography `R' + t' n_aᵀ / d_a` induced by `plane` between camera `cam_a` in view 1 and
/// camera `cam_b` in view 2, in normalized coordinates.
pub fn plane_homography(rig: &CameraRig, cam_a: usize, cam_b: usize, motion: &Pose, plane: &Plane) -> Result<Matrix3<f64>> {
    let (cam_pose, _) =
        relative_camera_pose(rig, cam_a, cam_b, &motion.rotation, &Vector3::zeros(), &motion.translation)?;
    let a = rig.camera(cam_a)?;
    let n_a = a.rotation.inverse() * plane.normal;
    let d_a = plane.offset - plane.normal.dot(&a.center);
    if d_a.abs() < 1e-9 {
        return Err(Error::DegenerateInput("plane passes through the camera center"));
    }
    Ok(cam_pose.rotation.matrix() + cam_pose.translation * n_a.transpose() / d_a)
}

fn apply_homography(h: &Matrix3<f64>, x: &Vector2<f64>) -> Result<Vector2<f64>> {
    let p = h * Vector3::new(x.x, x.y, 1.0);
    if p.z.abs() < 1e-12 {
        return Err(Error::PointAtInfinity);
    }
    Ok(Vector2::new(p.x / p.z, p.y / p.z))
}

/// Jacobian of the homography map `x ↦ π(H x)` at `x`. Coordinates may be normalized or
/// pixel, as long as `h` uses the same.
pub fn affine_from_homography(h: &Matrix3<f64>, x: NormalizedImagePoint) -> Result<Matrix2<f64>> {
    let p = h * x.homogeneous();
    let w = p.z;
    if w.abs() < 1e-12 {
        return Err(Error::PointAtInfinity);
    }
    let (u, v) = (p.x / w, p.y / w);
    Ok(Matrix2::new(
        h[(0, 0)] - h[(2, 0)] * u,
        h[(0, 1)] - h[(2, 1)] * u,
        h[(1, 0)] - h[(2, 0)] * v,
        h[(1, 1)] - h[(2, 1)] * v,
    ) / w)
}

/// Similarity moving the points' centroid to the origin with mean distance √2.
fn hartley_normalization(pts: &[Vector2<f64>; 4]) -> Matrix3<f64> {
    let c = pts.iter().fold(Vector2::zeros(), |a, p| a + p) / 4.0;
    let mean = pts.iter().map(|p| (p - c).norm()).sum::<f64>() / 4.0;
    let s = if mean > 0.0 { 2f64.sqrt() / mean } else { 1.0 };
    Matrix3::new(s, 0.0, -s * c.x, 0.0, s, -s * c.y, 0.0, 0.0, 1.0)
}

fn collinear(pts: &[Vector2<f64>; 4]) -> bool {
    let scale = pts.iter().map(|p| (p - pts[0]).norm_squared()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return true;
    }
    let area = |a: &Vector2<f64>, b: &Vector2<f64>, c: &Vector2<f64>| {
        let (u, v) = (b - a, c - a);
        (u.x * v.y - u.y * v.x).abs()
    };
    [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        .iter()
        .any(|&(i, j, k)| area(&pts[i], &pts[j], &pts[k]) < 1e-9 * scale)
}

/// Exact homography through four point pairs (normalized DLT).
pub fn homography_from_four_points(src: &[Vector2<f64>; 4], dst: &[Vector2<f64>; 4]) -> Result<Matrix3<f64>> {
    if collinear(src) || collinear(dst) {
        return Err(Error::DegenerateQuad);
    }
    let ts = hartley_normalization(src);
    let td = hartley_normalization(dst);
    let mut a = nalgebra::SMatrix::<f64, 9, 9>::zeros();
    for i in 0..4 {
        let p = ts * Vector3::new(src[i].x, src[i].y, 1.0);
        let q = td * Vector3::new(dst[i].x, dst[i].y, 1.0);
        let (x, y) = (p.x, p.y);
        let (u, v) = (q.x, q.y);
        let r0 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r1 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for c in 0..9 {
            a[(2 * i, c)] = r0[c];
            a[(2 * i + 1, c)] = r1[c];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::DegenerateQuad)?;
    let (min_idx, _) = svd.singular_values.argmin();
    let h = v_t.row(min_idx);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let td_inv = td.try_inverse().ok_or(Error::DegenerateQuad)?;
    let out = td_inv * hn * ts;
    let scale = out[(2, 2)];
    if scale.abs() > 1e-12 {
        Ok(out / scale)
    } else {
        Ok(out)
    }
}

/// Builds one noise-free correspondence for `point` on `plane` seen by `cam_a` in view 1
/// and `cam_b` in view 2, or `None` when it leaves either image.
fn scene_ac(
    cfg: &SceneConfig,
    rig: &CameraRig,
    motion: &Pose,
    point: &Vector3<f64>,
    plane: (usize, &Plane),
    cam_a: usize,
    cam_b: usize,
) -> Option<SceneAc> {
    let ca = rig.camera(cam_a).ok()?;
    let cb = rig.camera(cam_b).ok()?;
    let x = ca.project(point)?;
    let x_prime = cb.project(&motion.transform_point(point))?;
    if !cfg.in_image(&ca.intrinsics.to_pixel(&x)) || !cfg.in_image(&cb.intrinsics.to_pixel(&x_prime)) {
        return None;
    }
    let homography = plane_homography(rig, cam_a, cam_b, motion, plane.1).ok()?;
    let affine = affine_from_homography(&homography, x).ok()?;
    if !(affine.determinant().abs() > 1e-9) {
        return None;
    }
    Some(SceneAc {
        ac: AffineCorrespondence::new(x, x_prime, affine, cam_a, cam_b),
        point: *point,
        plane: plane.0,
        homography,
    })
}

const MAX_POINT_ATTEMPTS: usize = 10_000;
const MAX_MOTION_ATTEMPTS: usize = 100;

/// Scene with `n_ground + n_random` points; each point yields an inter and an intra
/// correspondence, alternating the view-1 camera by point index. Motions that leave
/// part of the scene unobservable are redrawn.
pub fn generate_scene(cfg: &SceneConfig) -> Result<SyntheticScene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rig = cfg.rig();
    for _ in 0..MAX_MOTION_ATTEMPTS {
        if let Some(scene) = try_scene(cfg, &rig, &mut rng) {
            return Ok(scene);
        }
    }
    Err(Error::InvalidConfig("cube is not visible from the rig"))
}

fn try_scene(cfg: &SceneConfig, rig: &CameraRig, rng: &mut ChaCha8Rng) -> Option<SyntheticScene> {
    let rotation = random_rotation(rng, cfg.max_rotation_deg.to_radians());
    let direction = match cfg.motion_type {
        MotionType::Forward => Vector3::z(),
        MotionType::Sideways => Vector3::x(),
        MotionType::Random => random_unit_vector(rng),
    };
    // The rig centre moves by `direction · length` expressed in the view-1 frame.
    let gt_pose = Pose::new(rotation, -(rotation * direction * cfg.motion_length_m));

    let (lo, hi) = (cfg.cube_min, cfg.cube_max);
    let ground_y = rng.random_range(lo.y.max(0.0).min(hi.y)..=hi.y);
    let mut planes = alloc::vec![Plane { normal: Vector3::y(), offset: ground_y }];
    let n = cfg.n_ground_plane_acs + cfg.n_random_plane_acs;
    let mut acs = Vec::with_capacity(2 * n);
    for i in 0..n {
        let cam_a = i % 2;
        let ground = i < cfg.n_ground_plane_acs;
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > MAX_POINT_ATTEMPTS {
                return None;
            }
            let mut point = Vector3::new(
                rng.random_range(lo.x..=hi.x),
                rng.random_range(lo.y..=hi.y),
                rng.random_range(lo.z..=hi.z),
            );
            let plane = if ground {
                point.y = ground_y;
                planes[0]
            } else {
                let normal = random_unit_vector(rng);
                Plane { normal, offset: normal.dot(&point) }
            };
            let plane_idx = if ground { 0 } else { planes.len() };
            let inter = scene_ac(cfg, rig, &gt_pose, &point, (plane_idx, &plane), cam_a, 1 - cam_a);
            let intra = scene_ac(cfg, rig, &gt_pose, &point, (plane_idx, &plane), cam_a, cam_a);
            if let (Some(inter), Some(intra)) = (inter, intra) {
                if !ground {
                    planes.push(plane);
                }
                acs.push(inter);
                acs.push(intra);
                break;
            }
        }
    }
    Some(SyntheticScene { config: cfg.clone(), rig: rig.clone(), gt_pose, planes, acs })
}

/// Affine correspondence in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelAc {
    pub x: Vector2<f64>,
    pub x_prime: Vector2<f64>,
    pub affine: Matrix2<f64>,
}

impl PixelAc {
    pub fn from_normalized(rig: &CameraRig, ac: &AffineCorrespondence) -> Result<Self> {
        let ka = rig.camera(ac.cam_view1)?.intrinsics;
        let kb = rig.camera(ac.cam_view2)?.intrinsics;
        let sa_inv = ka.focal_matrix().try_inverse().ok_or(Error::InvalidRig("singular focal matrix"))?;
        Ok(Self {
            x: ka.to_pixel(&ac.x),
            x_prime: kb.to_pixel(&ac.x_prime),
            affine: kb.focal_matrix() * ac.affine * sa_inv,
        })
    }

    pub fn to_normalized(&self, rig: &CameraRig, cam_view1: usize, cam_view2: usize) -> Result<AffineCorrespondence> {
        let ka = rig.camera(cam_view1)?.intrinsics;
        let kb = rig.camera(cam_view2)?.intrinsics;
        let sb_inv = kb.focal_matrix().try_inverse().ok_or(Error::InvalidRig("singular focal matrix"))?;
        Ok(AffineCorrespondence::new(
            ka.normalize(&self.x),
            kb.normalize(&self.x_prime),
            sb_inv * self.affine * ka.focal_matrix(),
            cam_view1,
            cam_view2,
        ))
    }
}

/// Re-estimates the affine frame of `scene.acs[index]` from a noisy square of side
/// `support_px` around its point, with Gaussian pixel noise of std `sigma_px` on the point
/// pair and on all four corner pairs.
pub fn noisy_ac<R: Rng + ?Sized>(
    scene: &SyntheticScene,
    index: usize,
    sigma_px: f64,
    support_px: f64,
    rng: &mut R,
) -> Result<AffineCorrespondence> {
    let truth = scene.acs.get(index).ok_or(Error::InvalidConfig("correspondence index out of range"))?;
    if !(support_px > 0.0) {
        return Err(Error::InvalidConfig("support side must be positive"));
    }
    let noise = Normal::new(0.0, sigma_px).map_err(|_| Error::InvalidConfig("noise sigma must be finite and non-negative"))?;
    let ac = &truth.ac;
    let ka = scene.rig.camera(ac.cam_view1)?.intrinsics;
    let kb = scene.rig.camera(ac.cam_view2)?.intrinsics;
    let ka_inv = ka.matrix().try_inverse().ok_or(Error::InvalidRig("singular intrinsics"))?;
    let h_px = kb.matrix() * truth.homography * ka_inv;

    let x_px = ka.to_pixel(&ac.x);
    let xp_px = kb.to_pixel(&ac.x_prime);
    let half = support_px / 2.0;
    let offsets = [(-half, -half), (half, -half), (half, half), (-half, half)];
    let mut src = [Vector2::zeros(); 4];
    let mut dst = [Vector2::zeros(); 4];
    for (k, (dx, dy)) in offsets.iter().enumerate() {
        src[k] = x_px + Vector2::new(*dx, *dy);
        dst[k] = apply_homography(&h_px, &src[k])?;
    }
    let mut jitter = |p: Vector2<f64>| p + Vector2::new(noise.sample(rng), noise.sample(rng));
    let x_noisy = jitter(x_px);
    let xp_noisy = jitter(xp_px);
    for k in 0..4 {
        src[k] = jitter(src[k]);
        dst[k] = jitter(dst[k]);
    }
    let h_fit = homography_from_four_points(&src, &dst)?;
    let a_px = affine_from_homography(&h_fit, NormalizedImagePoint::from_vector(&x_noisy))?;
    PixelAc { x: x_noisy, x_prime: xp_noisy, affine: a_px }.to_normalized(&scene.rig, ac.cam_view1, ac.cam_view2)
}

/// Three point correspondences hallucinated from an AC at spread `s` pixels:
/// `(x, x')`, `(x + [s,0], x' + A[s,0])`, `(x + [0,s], x' + A[0,s])`.
pub fn ac_to_three_pcs(ac: &PixelAc, s: f64) -> Result<[(Vector2<f64>, Vector2<f64>); 3]> {
    if !(s > 0.0) {
        return Err(Error::InvalidSpread);
    }
    let dx = Vector2::new(s, 0.0);
    let dy = Vector2::new(0.0, s);
    Ok([
        (ac.x, ac.x_prime),
        (ac.x + dx, ac.x_prime + ac.affine * dx),
        (ac.x + dy, ac.x_prime + ac.affine * dy),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseErrors {
    pub rotation_deg: f64,
    /// `2‖t_gt − t‖ / (‖t_gt‖ + ‖t‖)`.
    pub translation: f64,
    pub translation_dir_deg: f64,
}

pub fn pose_errors(gt: &Pose, est: &Pose) -> Result<PoseErrors> {
    let (ng, ne) = (gt.translation.norm(), est.translation.norm());
    if ng < 1e-12 || ne < 1e-12 {
        return Err(Error::ZeroTranslation);
    }
    let rotation_deg = rotation_angle(&(gt.rotation * est.rotation.inverse())).to_degrees();
    let translation = 2.0 * (gt.translation - est.translation).norm() / (ng + ne);
    let cos = (gt.translation.dot(&est.translation) / (ng * ne)).clamp(-1.0, 1.0);
    Ok(PoseErrors { rotation_deg, translation, translation_dir_deg: cos.acos().to_degrees() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalProblemConfig {
    pub cameras: usize,
    pub max_rotation_deg: f64,
    /// Largest rotation of a camera relative to the rig frame.
    pub max_mount_rotation_deg: f64,
    pub translation_range: (f64, f64),
    pub depth_range: (f64, f64),
}

impl Default for MinimalProblemConfig {
    fn default() -> Self {
        Self {
            cameras: 2,
            max_rotation_deg: 60.0,
            max_mount_rotation_deg: 30.0,
            translation_range: (0.5, 3.0),
            depth_range: (4.0, 20.0),
        }
    }
}

/// Two exact correspondences of one mode on a randomly mounted rig.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalProblem {
    pub rig: CameraRig,
    pub acs: [AffineCorrespondence; 2],
    pub points: [Vector3<f64>; 2],
    pub gt_pose: Pose,
    pub mode: Mode,
}

fn random_point_ac<R: Rng + ?Sized>(
    rng: &mut R,
    rig: &CameraRig,
    motion: &Pose,
    cam_a: usize,
    cam_b: usize,
    cfg: &MinimalProblemConfig,
) -> Option<(AffineCorrespondence, Vector3<f64>)> {
    let ca = rig.camera(cam_a).ok()?;
    let cb = rig.camera(cam_b).ok()?;
    let max_tan = 35f64.to_radians().tan();
    for _ in 0..200 {
        let ray = Vector3::new(rng.random_range(-max_tan..max_tan), rng.random_range(-max_tan..max_tan), 1.0);
        let depth = rng.random_range(cfg.depth_range.0..cfg.depth_range.1);
        let point = ca.rotation * (ray.normalize() * depth) + ca.center;
        let in_b = cb.rotation.inverse() * (motion.transform_point(&point) - cb.center);
        if in_b.z < 1.0 || in_b.x.abs() > 1.5 * in_b.z || in_b.y.abs() > 1.5 * in_b.z {
            continue;
        }
        let normal = random_unit_vector(rng);
        let view_dir = (point - ca.center).normalize();
        if normal.dot(&view_dir).abs() < 0.3 {
            continue;
        }
        let plane = Plane { normal, offset: normal.dot(&point) };
        let h = plane_homography(rig, cam_a, cam_b, motion, &plane).ok()?;
        let x = ca.project(&point)?;
        let x_prime = cb.project(&motion.transform_point(&point))?;
        let affine = affine_from_homography(&h, x).ok()?;
        if affine.determinant().abs() < 1e-3 {
            continue;
        }
        return Some((AffineCorrespondence::new(x, x_prime, affine, cam_a, cam_b), point));
    }
    None
}

/// Random rig, motion and two exact correspondences. Inter problems route the first
/// correspondence from camera 0 to 1 and the second from 1 to 0; intra problems keep
/// camera 0 and camera 1 respectively.
pub fn random_minimal_problem<R: Rng + ?Sized>(rng: &mut R, mode: Mode, cfg: &MinimalProblemConfig) -> MinimalProblem {
    let cameras = cfg.cameras.max(2);
    loop {
        let k = Intrinsics::new(400.0, 400.0, 320.0, 240.0);
        let rig_cams = (0..cameras)
            .map(|_| {
                let c = random_unit_vector(rng) * rng.random_range(0.2..1.0);
                RigCamera::new(k, random_rotation(rng, cfg.max_mount_rotation_deg.to_radians()), c)
            })
            .collect();
        let rig = CameraRig::new(rig_cams).expect("valid random rig");
        let rotation = random_rotation(rng, cfg.max_rotation_deg.to_radians());
        let t = random_unit_vector(rng) * rng.random_range(cfg.translation_range.0..cfg.translation_range.1);
        let gt_pose = Pose::new(rotation, t);
        let routes = match mode {
            Mode::Inter => [(0, 1), (1, 0)],
            Mode::Intra => [(0, 0), (1, 1)],
        };
        let first = random_point_ac(rng, &rig, &gt_pose, routes[0].0, routes[0].1, cfg);
        let second = random_point_ac(rng, &rig, &gt_pose, routes[1].0, routes[1].1, cfg);
        if let (Some((a0, p0)), Some((a1, p1))) = (first, second) {
            return MinimalProblem { rig, acs: [a0, a1], points: [p0, p1], gt_pose, mode };
        }
    }
}

/// Solver variants exercised by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchSolver {
    Inter,
    Intra,
    InterKnownAngle,
    IntraKnownAngle,
}

impl BenchSolver {
    pub const ALL: [BenchSolver; 4] =
        [BenchSolver::Inter, BenchSolver::Intra, BenchSolver::InterKnownAngle, BenchSolver::IntraKnownAngle];

    pub fn name(self) -> &'static str {
        match self {
            BenchSolver::Inter => "2AC-inter",
            BenchSolver::Intra => "2AC-intra",
            BenchSolver::InterKnownAngle => "2AC-ka-inter",
            BenchSolver::IntraKnownAngle => "2AC-ka-intra",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            BenchSolver::Inter | BenchSolver::InterKnownAngle => Mode::Inter,
            BenchSolver::Intra | BenchSolver::IntraKnownAngle => Mode::Intra,
        }
    }

    pub fn known_angle(self) -> bool {
        matches!(self, BenchSolver::InterKnownAngle | BenchSolver::IntraKnownAngle)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub scene: SceneConfig,
    pub solver: BenchSolver,
    /// Fraction of correspondences whose view-2 point is replaced by a random image point.
    pub outlier_ratio: f64,
    pub ransac: RansacConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let mut ransac = RansacConfig::default();
        ransac.inlier_threshold = 5e-3;
        ransac.max_iterations = 200;
        Self { scene: SceneConfig::default(), solver: BenchSolver::Inter, outlier_ratio: 0.0, ransac }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchTrial {
    pub trial: u64,
    pub errors: PoseErrors,
    pub iterations: usize,
    pub inlier_count: usize,
    pub gt_pose: Pose,
    pub estimate: Pose,
}

/// Noisy correspondences of one mode for a scene, with a random `outlier_ratio` share
/// scrambled.
pub fn noisy_correspondences<R: Rng + ?Sized>(
    scene: &SyntheticScene,
    mode: Mode,
    sigma_px: f64,
    support_px: f64,
    outlier_ratio: f64,
    rng: &mut R,
) -> Result<Vec<AffineCorrespondence>> {
    let indices = scene.indices(mode);
    let n_out = (outlier_ratio.clamp(0.0, 1.0) * indices.len() as f64).round() as usize;
    let cfg = &scene.config;
    let mut scrambled = alloc::vec![false; indices.len()];
    for k in rand::seq::index::sample(rng, indices.len(), n_out.min(indices.len())) {
        scrambled[k] = true;
    }
    let mut out = Vec::with_capacity(indices.len());
    for (k, &i) in indices.iter().enumerate() {
        let mut attempts = 0;
        let mut ac = loop {
            attempts += 1;
            match noisy_ac(scene, i, sigma_px, support_px, rng) {
                Ok(ac) => break ac,
                Err(Error::DegenerateQuad | Error::PointAtInfinity) if attempts < 100 => continue,
                Err(e) => return Err(e),
            }
        };
        if scrambled[k] {
            let kb = scene.rig.camera(ac.cam_view2)?.intrinsics;
            let px = Vector2::new(rng.random_range(0.0..cfg.width as f64), rng.random_range(0.0..cfg.height as f64));
            ac.x_prime = kb.normalize(&px);
        }
        out.push(ac);
    }
    Ok(out)
}

/// One benchmark trial: scene seed `cfg.scene.seed + trial`, noisy correspondences of the
/// solver's mode, RANSAC, and errors of the selected pose.
pub fn run_bench_trial(cfg: &BenchConfig, trial: u64) -> Result<BenchTrial> {
    let seed = cfg.scene.seed.wrapping_add(trial);
    let mut scene_cfg = cfg.scene.clone();
    scene_cfg.seed = seed;
    let scene = generate_scene(&scene_cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mode = cfg.solver.mode();
    let acs =
        noisy_correspondences(&scene, mode, scene_cfg.noise_sigma_px, scene_cfg.support_side_px, cfg.outlier_ratio, &mut rng)?;
    let prior = cfg.solver.known_angle().then(|| rotation_angle(&scene.gt_pose.rotation));
    let mut ransac = cfg.ransac.clone();
    ransac.seed = seed;
    let result = ransac_estimate(&scene.rig, &acs, mode, prior, &ransac)?;
    Ok(BenchTrial {
        trial,
        errors: pose_errors(&scene.gt_pose, &result.best.pose)?,
        iterations: result.iterations_run,
        inlier_count: result.inlier_count,
        gt_pose: scene.gt_pose,
        estimate: result.best.pose,
    })
}
