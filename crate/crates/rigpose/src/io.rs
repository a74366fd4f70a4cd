//! File formats: rig JSON, correspondence JSON-lines, pose JSON-lines, trajectory text,
//! scene configuration JSON.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{Matrix2, Quaternion, Rotation3, UnitQuaternion, Vector2, Vector3};
use rigpose_core::constraints::AffineCorrespondence;
use rigpose_core::geometry::{CameraRig, Intrinsics, NormalizedImagePoint, Pose, RigCamera};
use rigpose_core::synthbench::{MotionType, PixelAc, SceneConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Unit quaternion from `[w, x, y, z]`; rejects norms far from one.
pub fn rotation_from_wxyz(q: [f64; 4]) -> Option<Rotation3<f64>> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    let n = raw.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
        return None;
    }
    Some(UnitQuaternion::from_quaternion(raw).to_rotation_matrix())
}

/// `[w, x, y, z]` with `w ≥ 0`.
pub fn rotation_to_wxyz(r: &Rotation3<f64>) -> [f64; 4] {
    let q = UnitQuaternion::from_rotation_matrix(r);
    let s = if q.w < 0.0 { -1.0 } else { 1.0 };
    [s * q.w, s * q.i, s * q.j, s * q.k]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub q_wxyz: [f64; 4],
    pub s_xyz: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigFile {
    pub cameras: Vec<CameraRecord>,
}

impl RigFile {
    pub fn from_rig(rig: &CameraRig) -> Self {
        let cameras = rig
            .cameras()
            .iter()
            .map(|c| CameraRecord {
                fx: c.intrinsics.fx,
                fy: c.intrinsics.fy,
                cx: c.intrinsics.cx,
                cy: c.intrinsics.cy,
                q_wxyz: rotation_to_wxyz(&c.rotation),
                s_xyz: c.center.into(),
            })
            .collect();
        Self { cameras }
    }

    pub fn to_rig(&self) -> Result<CameraRig, CliError> {
        let mut cams = Vec::with_capacity(self.cameras.len());
        for (i, c) in self.cameras.iter().enumerate() {
            let rotation = rotation_from_wxyz(c.q_wxyz)
                .ok_or_else(|| CliError::Config(format!("camera {i}: q_wxyz is not a unit quaternion")))?;
            cams.push(RigCamera::new(Intrinsics::new(c.fx, c.fy, c.cx, c.cy), rotation, Vector3::from(c.s_xyz)));
        }
        CameraRig::new(cams).map_err(CliError::Core)
    }
}

pub fn load_rig(path: &Path) -> Result<CameraRig, CliError> {
    let text = read_text(path)?;
    let file: RigFile = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.line(), e))?;
    file.to_rig()
}

pub fn rig_json(rig: &CameraRig) -> String {
    let mut s = serde_json::to_string_pretty(&RigFile::from_rig(rig)).expect("rig serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Pixel,
    Normalized,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcRecord {
    pub frame_pair: u64,
    pub cam1: usize,
    pub cam2: usize,
    pub x: [f64; 2],
    pub xp: [f64; 2],
    #[serde(rename = "A")]
    pub a: [f64; 4],
    pub space: Space,
}

impl AcRecord {
    pub fn normalized(frame_pair: u64, ac: &AffineCorrespondence) -> Self {
        let m = ac.affine;
        Self {
            frame_pair,
            cam1: ac.cam_view1,
            cam2: ac.cam_view2,
            x: [ac.x.u, ac.x.v],
            xp: [ac.x_prime.u, ac.x_prime.v],
            a: [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]],
            space: Space::Normalized,
        }
    }

    pub fn pixel(frame_pair: u64, rig: &CameraRig, ac: &AffineCorrespondence) -> rigpose_core::Result<Self> {
        let px = PixelAc::from_normalized(rig, ac)?;
        let m = px.affine;
        Ok(Self {
            frame_pair,
            cam1: ac.cam_view1,
            cam2: ac.cam_view2,
            x: px.x.into(),
            xp: px.x_prime.into(),
            a: [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]],
            space: Space::Pixel,
        })
    }

    pub fn to_correspondence(&self, rig: &CameraRig) -> rigpose_core::Result<AffineCorrespondence> {
        let a = Matrix2::new(self.a[0], self.a[1], self.a[2], self.a[3]);
        let ac = match self.space {
            Space::Normalized => AffineCorrespondence::new(
                NormalizedImagePoint::new(self.x[0], self.x[1]),
                NormalizedImagePoint::new(self.xp[0], self.xp[1]),
                a,
                self.cam1,
                self.cam2,
            ),
            Space::Pixel => PixelAc { x: Vector2::from(self.x), x_prime: Vector2::from(self.xp), affine: a }
                .to_normalized(rig, self.cam1, self.cam2)?,
        };
        ac.validate(rig)?;
        Ok(ac)
    }
}

/// Correspondences grouped by frame pair, in file order within each pair.
pub fn load_acs(path: &Path, rig: &CameraRig) -> Result<BTreeMap<u64, Vec<AffineCorrespondence>>, CliError> {
    let text = read_text(path)?;
    let mut out: BTreeMap<u64, Vec<AffineCorrespondence>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: AcRecord = serde_json::from_str(line).map_err(|e| CliError::parse(path, i + 1, e))?;
        let ac = rec.to_correspondence(rig).map_err(|e| CliError::parse(path, i + 1, e))?;
        out.entry(rec.frame_pair).or_default().push(ac);
    }
    if out.is_empty() {
        return Err(CliError::parse(path, 0, "no correspondences"));
    }
    Ok(out)
}

pub fn json_lines<T: Serialize>(records: &[T]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("record serializes"));
        s.push('\n');
    }
    s
}

/// A view-1 → view-2 rig motion for one frame pair, as written by `ransac`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoseRecord {
    pub frame_pair: u64,
    pub q_wxyz: [f64; 4],
    pub t_xyz: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inliers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correspondences: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_r_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_tdir_deg: Option<f64>,
}

impl PoseRecord {
    pub fn new(frame_pair: u64, pose: &Pose) -> Self {
        Self {
            frame_pair,
            q_wxyz: rotation_to_wxyz(&pose.rotation),
            t_xyz: pose.translation.into(),
            inliers: None,
            correspondences: None,
            iterations: None,
            eps_r_deg: None,
            eps_t: None,
            eps_tdir_deg: None,
        }
    }

    pub fn pose(&self) -> Option<Pose> {
        Some(Pose::new(rotation_from_wxyz(self.q_wxyz)?, Vector3::from(self.t_xyz)))
    }
}

pub fn load_poses(path: &Path) -> Result<Vec<(u64, Pose)>, CliError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PoseRecord = serde_json::from_str(line).map_err(|e| CliError::parse(path, i + 1, e))?;
        let pose = rec.pose().ok_or_else(|| CliError::parse(path, i + 1, "q_wxyz is not a unit quaternion"))?;
        out.push((rec.frame_pair, pose));
    }
    Ok(out)
}

/// One trajectory line: the rig-to-world pose of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stamped {
    pub timestamp: f64,
    pub pose: Pose,
}

/// Parses `timestamp tx ty tz qw qx qy qz` lines; `#` starts a comment.
pub fn parse_trajectory(text: &str, path: &Path) -> Result<Vec<Stamped>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::parse(path, i + 1, e))?;
        if v.len() != 8 {
            return Err(CliError::parse(path, i + 1, format!("expected 8 fields, found {}", v.len())));
        }
        let rotation = rotation_from_wxyz([v[4], v[5], v[6], v[7]])
            .ok_or_else(|| CliError::parse(path, i + 1, "quaternion is not unit length"))?;
        out.push(Stamped { timestamp: v[0], pose: Pose::new(rotation, Vector3::new(v[1], v[2], v[3])) });
    }
    Ok(out)
}

pub fn load_trajectory(path: &Path) -> Result<Vec<Stamped>, CliError> {
    parse_trajectory(&read_text(path)?, path)
}

pub fn trajectory_text(frames: &[Stamped]) -> String {
    let mut s = String::new();
    for f in frames {
        let t = f.pose.translation;
        let q = rotation_to_wxyz(&f.pose.rotation);
        s.push_str(&format!(
            "{} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}\n",
            f.timestamp, t.x, t.y, t.z, q[0], q[1], q[2], q[3]
        ));
    }
    s
}

/// Motion mapping frame-`a` rig coordinates into frame `b` for rig-to-world poses.
pub fn relative_motion(a: &Pose, b: &Pose) -> Pose {
    b.inverse().compose(a)
}

/// Rig-to-world poses from frame-to-frame motions, starting at the identity.
pub fn chain_motions(motions: &[Pose]) -> Vec<Pose> {
    let mut out = vec![Pose::identity()];
    for m in motions {
        let last = *out.last().expect("non-empty");
        out.push(last.compose(&m.inverse()));
    }
    out
}

/// Scene configuration with every field optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfigFile {
    pub baseline_m: Option<f64>,
    pub motion_length_m: Option<f64>,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub focal_px: Option<f64>,
    pub principal_point: Option<[f64; 2]>,
    pub cube_min: Option<[f64; 3]>,
    pub cube_max: Option<[f64; 3]>,
    pub n_ground_plane_acs: Option<usize>,
    pub n_random_plane_acs: Option<usize>,
    pub support_side_px: Option<f64>,
    pub noise_sigma_px: Option<f64>,
    pub motion_type: Option<String>,
    pub max_rotation_deg: Option<f64>,
    pub seed: Option<u64>,
}

pub fn parse_motion_type(name: &str) -> Option<MotionType> {
    match name {
        "forward" => Some(MotionType::Forward),
        "sideways" => Some(MotionType::Sideways),
        "random" => Some(MotionType::Random),
        _ => None,
    }
}

impl SceneConfigFile {
    pub fn apply(&self, cfg: &mut SceneConfig) -> Result<(), CliError> {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(baseline_m, motion_length_m, width, height, focal_px, n_ground_plane_acs, n_random_plane_acs,
             support_side_px, noise_sigma_px, max_rotation_deg, seed);
        if let Some([x, y]) = self.principal_point {
            cfg.principal_point = (x, y);
        }
        if let Some(v) = self.cube_min {
            cfg.cube_min = Vector3::from(v);
        }
        if let Some(v) = self.cube_max {
            cfg.cube_max = Vector3::from(v);
        }
        if let Some(name) = &self.motion_type {
            cfg.motion_type =
                parse_motion_type(name).ok_or_else(|| CliError::Config(format!("unknown motion type {name:?}")))?;
        }
        Ok(())
    }
}

pub fn load_scene_config(path: &Path) -> Result<SceneConfig, CliError> {
    let text = read_text(path)?;
    let file: SceneConfigFile = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.line(), e))?;
    let mut cfg = SceneConfig::default();
    file.apply(&mut cfg)?;
    cfg.validate().map_err(CliError::Core)?;
    Ok(cfg)
}

/// One row of the benchmark CSV.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub trial: u64,
    pub motion_type: &'static str,
    pub sigma_px: f64,
    pub support_px: f64,
    pub solver: &'static str,
    #[serde(rename = "eps_R_deg")]
    pub eps_r_deg: f64,
    pub eps_t: f64,
    pub eps_tdir_deg: f64,
    pub iterations: usize,
    pub wall_ms: f64,
}

pub const BENCH_HEADER: &str = "trial,motion_type,sigma_px,support_px,solver,eps_R_deg,eps_t,eps_tdir_deg,iterations,wall_ms";

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    let body = w.into_inner().expect("in-memory writer");
    let mut out = Vec::with_capacity(body.len() + BENCH_HEADER.len() + 1);
    writeln!(out, "{BENCH_HEADER}").expect("in-memory write");
    out.extend_from_slice(&body);
    String::from_utf8(out).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_roundtrip() {
        let r = Rotation3::from_euler_angles(0.3, -1.2, 2.5);
        let q = rotation_to_wxyz(&r);
        assert!(q[0] >= 0.0);
        let back = rotation_from_wxyz(q).unwrap();
        assert!((back.matrix() - r.matrix()).amax() < 1e-14);
        assert!(rotation_from_wxyz([2.0, 0.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn trajectory_text_roundtrip() {
        let frames = chain_motions(&[
            Pose::new(Rotation3::from_euler_angles(0.1, 0.0, 0.2), Vector3::new(0.0, 0.1, 1.0)),
            Pose::new(Rotation3::from_euler_angles(0.0, -0.3, 0.0), Vector3::new(0.5, 0.0, 0.8)),
        ]);
        let stamped: Vec<Stamped> =
            frames.iter().enumerate().map(|(k, p)| Stamped { timestamp: k as f64, pose: *p }).collect();
        let text = trajectory_text(&stamped);
        let back = parse_trajectory(&text, Path::new("t")).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in stamped.iter().zip(&back) {
            assert_eq!(a.timestamp, b.timestamp);
            assert!((a.pose.translation - b.pose.translation).norm() < 1e-15);
            assert!((a.pose.rotation.matrix() - b.pose.rotation.matrix()).amax() < 1e-15);
        }
    }

    #[test]
    fn chained_motions_are_recovered_pairwise() {
        let motions = [
            Pose::new(Rotation3::from_euler_angles(0.2, 0.1, -0.1), Vector3::new(0.3, 0.0, 2.0)),
            Pose::new(Rotation3::from_euler_angles(-0.1, 0.4, 0.0), Vector3::new(-1.0, 0.2, 0.5)),
        ];
        let frames = chain_motions(&motions);
        for (k, m) in motions.iter().enumerate() {
            let back = relative_motion(&frames[k], &frames[k + 1]);
            assert!((back.translation - m.translation).norm() < 1e-14);
            assert!((back.rotation.matrix() - m.rotation.matrix()).amax() < 1e-14);
        }
    }

    #[test]
    fn trajectory_errors_name_the_line() {
        let err = parse_trajectory("# header\n0 0 0 0 1 0 0 0\n1 0 0\n", Path::new("t.txt")).unwrap_err();
        assert_eq!(err.to_string(), "t.txt:3: expected 8 fields, found 3");
        let err = parse_trajectory("0 0 0 0 2 0 0 0\n", Path::new("t.txt")).unwrap_err();
        assert_eq!(err.kind(), "parse");
    }

    #[test]
    fn scene_config_overrides() {
        let file: SceneConfigFile =
            serde_json::from_str(r#"{"focal_px": 500, "motion_type": "forward", "cube_min": [-1, -1, 5]}"#).unwrap();
        let mut cfg = SceneConfig::default();
        file.apply(&mut cfg).unwrap();
        assert_eq!(cfg.focal_px, 500.0);
        assert_eq!(cfg.motion_type, MotionType::Forward);
        assert_eq!(cfg.cube_min, Vector3::new(-1.0, -1.0, 5.0));
        assert_eq!(cfg.baseline_m, 1.0);
        assert!(serde_json::from_str::<SceneConfigFile>(r#"{"focal": 1}"#).is_err());
        let bad: SceneConfigFile = serde_json::from_str(r#"{"motion_type": "spiral"}"#).unwrap();
        assert!(bad.apply(&mut cfg).is_err());
    }

    #[test]
    fn bench_csv_header_is_fixed() {
        let row = BenchRow {
            trial: 3,
            motion_type: "random",
            sigma_px: 0.5,
            support_px: 40.0,
            solver: "2AC-inter",
            eps_r_deg: 0.25,
            eps_t: 0.01,
            eps_tdir_deg: 1.5,
            iterations: 7,
            wall_ms: 0.0,
        };
        let text = bench_csv(&[row]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(BENCH_HEADER));
        assert_eq!(lines.next(), Some("3,random,0.5,40.0,2AC-inter,0.25,0.01,1.5,7,0.0"));
        assert_eq!(bench_csv(&[]), format!("{BENCH_HEADER}\n"));
    }
}
