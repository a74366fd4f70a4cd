//! RANSAC over affine correspondences with two-correspondence minimal samples.

use alloc::vec::Vec;

use nalgebra::Matrix3;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::AffineCorrespondence;
use crate::error::{Error, Result};
use crate::geometry::{camera_pair_essential, CameraRig, NormalizedImagePoint, Pose};
use crate::solvers::{solve_relpose, Mode, PoseCandidate, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct RansacConfig {
    pub success_prob: f64,
    /// Inlier threshold on the square root of the Sampson distance, normalized coordinates.
    pub inlier_threshold: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub adaptive: bool,
    pub solver: SolverOptions,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            success_prob: 0.999,
            inlier_threshold: 1e-4,
            max_iterations: 1000,
            seed: 0,
            adaptive: true,
            solver: SolverOptions::default(),
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.success_prob > 0.0 && self.success_prob < 1.0) {
            return Err(Error::InvalidConfig("success probability must lie in (0, 1)"));
        }
        if !(self.inlier_threshold >= 0.0) || !self.inlier_threshold.is_finite() {
            return Err(Error::InvalidConfig("inlier threshold must be finite and non-negative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("iteration cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub best: PoseCandidate,
    pub inlier_mask: Vec<bool>,
    pub inlier_count: usize,
    pub cost: f64,
    /// Minimal samples drawn.
    pub iterations_run: usize,
    /// Candidates scored over all samples.
    pub hypotheses: usize,
}

/// `log(1−p) / log(1−(1−ε)^s)` before rounding up.
pub fn ransac_iterations_real(p: f64, eps: f64, s: u32) -> f64 {
    let w = (1.0 - eps).powi(s as i32);
    if w >= 1.0 {
        return 1.0;
    }
    if w <= 0.0 {
        return f64::INFINITY;
    }
    (-p).ln_1p() / (-w).ln_1p()
}

/// Samples needed to draw an all-inlier set of size `s` with probability `p` at outlier
/// ratio `eps`. Saturates at `u64::MAX`.
pub fn ransac_iterations(p: f64, eps: f64, s: u32) -> u64 {
    let n = ransac_iterations_real(p, eps, s).ceil();
    if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        (n as u64).max(1)
    }
}

/// Sampson approximation of the squared reprojection error of a point match under `e`.
pub fn sampson_distance(e: &Matrix3<f64>, x: &NormalizedImagePoint, x_prime: &NormalizedImagePoint) -> f64 {
    let x = x.homogeneous();
    let xp = x_prime.homogeneous();
    let ex = e * x;
    let etxp = e.transpose() * xp;
    let num = xp.dot(&ex);
    let den = ex[0] * ex[0] + ex[1] * ex[1] + etxp[0] * etxp[0] + etxp[1] * etxp[1];
    if num == 0.0 {
        return 0.0;
    }
    if den <= 0.0 {
        return f64::INFINITY;
    }
    num * num / den
}

/// Per-correspondence inlier flags and MSAC cost `Σ min(d, τ²)` for a rig motion.
pub fn score_model(rig: &CameraRig, pose: &Pose, acs: &[AffineCorrespondence], tau_in: f64) -> (Vec<bool>, f64) {
    let mut cache: Vec<((usize, usize), Option<Matrix3<f64>>)> = Vec::new();
    let tau2 = tau_in * tau_in;
    let mut mask = Vec::with_capacity(acs.len());
    let mut cost = 0.0;
    for ac in acs {
        let key = (ac.cam_view1, ac.cam_view2);
        let e = match cache.iter().find(|(k, _)| *k == key) {
            Some((_, e)) => *e,
            None => {
                let e = camera_pair_essential(rig, key.0, key.1, pose).ok();
                cache.push((key, e));
                e
            }
        };
        let d = e.map_or(f64::INFINITY, |e| sampson_distance(&e, &ac.x, &ac.x_prime));
        mask.push(d == 0.0 || d.sqrt() < tau_in);
        cost += d.min(tau2);
    }
    (mask, cost)
}

fn route(ac: &AffineCorrespondence) -> (usize, usize) {
    (ac.cam_view1, ac.cam_view2)
}

/// Two distinct pool entries. The second is drawn from a different camera route when one
/// exists: two correspondences through the same camera pair only constrain that pair's
/// motion up to scale.
fn draw_pair(rng: &mut ChaCha8Rng, acs: &[AffineCorrespondence], pool: &[usize]) -> (usize, usize) {
    let i = pool[rng.random_range(0..pool.len())];
    let others: Vec<usize> = pool.iter().copied().filter(|&k| route(&acs[k]) != route(&acs[i])).collect();
    if others.is_empty() {
        let mut j = rng.random_range(0..pool.len() - 1);
        if pool[j] == i {
            j = pool.len() - 1;
        }
        (i, pool[j])
    } else {
        (i, others[rng.random_range(0..others.len())])
    }
}

/// Robust rig-motion estimate from correspondences of the requested mode.
pub fn ransac_estimate(
    rig: &CameraRig,
    acs: &[AffineCorrespondence],
    mode: Mode,
    prior_angle: Option<f64>,
    cfg: &RansacConfig,
) -> Result<RansacResult> {
    ransac_estimate_observed(rig, acs, mode, prior_angle, cfg, |_, _| {})
}

/// [`ransac_estimate`], calling `observe(candidate, inlier_count)` for every scored
/// candidate.
pub fn ransac_estimate_observed(
    rig: &CameraRig,
    acs: &[AffineCorrespondence],
    mode: Mode,
    prior_angle: Option<f64>,
    cfg: &RansacConfig,
    mut observe: impl FnMut(&PoseCandidate, usize),
) -> Result<RansacResult> {
    cfg.validate()?;
    let pool: Vec<usize> = (0..acs.len()).filter(|&i| mode.matches(&acs[i])).collect();
    if pool.len() < 2 {
        return Err(Error::InsufficientCorrespondences(pool.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bound = cfg.max_iterations;
    let mut best: Option<RansacResult> = None;
    let mut iterations = 0;
    let mut hypotheses = 0;

    while iterations < bound.min(cfg.max_iterations) {
        iterations += 1;
        let (i, j) = draw_pair(&mut rng, acs, &pool);
        let sample = [acs[i], acs[j]];
        let solutions = match solve_relpose(rig, &sample, mode, prior_angle, &cfg.solver) {
            Ok(s) => s,
            Err(_) => continue,
        };
        // A vanishing translation is a collapsed root, not a hypothesis worth scoring.
        let usable = |c: &&PoseCandidate| {
            c.positive_depth && c.pose.translation.iter().all(|v| v.is_finite()) && c.pose.translation.norm() > 1e-12
        };
        for cand in solutions.candidates.iter().filter(usable) {
            hypotheses += 1;
            let (mask, cost) = score_model(rig, &cand.pose, acs, cfg.inlier_threshold);
            let count = mask.iter().filter(|&&m| m).count();
            observe(cand, count);
            let better = best
                .as_ref()
                .is_none_or(|b| count > b.inlier_count || (count == b.inlier_count && cost < b.cost));
            if better {
                let in_pool = pool.iter().filter(|&&k| mask[k]).count();
                best = Some(RansacResult {
                    best: *cand,
                    inlier_mask: mask,
                    inlier_count: count,
                    cost,
                    iterations_run: 0,
                    hypotheses: 0,
                });
                if cfg.adaptive {
                    let eps = 1.0 - in_pool as f64 / pool.len() as f64;
                    let n = ransac_iterations(cfg.success_prob, eps, 2);
                    bound = usize::try_from(n).unwrap_or(usize::MAX);
                }
            }
        }
    }

    let mut result = best.ok_or(Error::AllSamplesFailed)?;
    result.iterations_run = iterations;
    result.hypotheses = hypotheses;
    Ok(result)
}
