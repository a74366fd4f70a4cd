//! Symbolic determinants of polynomial matrices and numerical extraction of the real roots
//! of overdetermined trivariate systems.
//!
//! Roots are found by multi-start damped Gauss–Newton on the stacked residual vector
//! `r_i(q) = p_i(q) / (1 + ‖coeffs(p_i)‖)`. Seeds sit on a fixed radial grid in Cayley
//! space (or on the angle sphere when the rotation angle is known), so the result is a
//! deterministic function of the system and the options.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::constraints::poly::exponents;
use crate::constraints::{PolyMatrix, TrivariatePoly};
use crate::error::{Error, Result};
use crate::geometry::CayleyVector;

/// Exact determinant of a 2×2 or 3×3 polynomial matrix by cofactor expansion.
pub fn det_poly(m: &PolyMatrix) -> Result<TrivariatePoly> {
    let e = |r: usize, c: usize| m.get(r, c);
    match (m.rows(), m.cols()) {
        (2, 2) => Ok(&(e(0, 0) * e(1, 1)) - &(e(0, 1) * e(1, 0))),
        (3, 3) => {
            let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
                &(e(r0, c0) * e(r1, c1)) - &(e(r0, c1) * e(r1, c0))
            };
            let t0 = e(0, 0) * &minor(1, 2, 1, 2);
            let t1 = e(0, 1) * &minor(1, 2, 0, 2);
            let t2 = e(0, 2) * &minor(1, 2, 0, 1);
            Ok(&(&t0 - &t1) + &t2)
        }
        (rows, cols) => Err(Error::UnsupportedSize { rows, cols }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootOptions {
    /// Radii of the seed shells in Cayley space.
    pub seed_radii: Vec<f64>,
    pub include_origin: bool,
    /// When set, seeds are placed on the sphere `|q| = radius` instead of the shells.
    pub sphere_radius: Option<f64>,
    pub sphere_seeds: usize,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Acceptance threshold on [`root_residual`].
    pub tau_res: f64,
    /// Roots closer than this in Cayley space are merged.
    pub tau_dup: f64,
    pub max_roots: usize,
    /// Also accept Gauss–Newton stationary points whose residual is below this value.
    /// Needed when the system is overdetermined and inconsistent under noise.
    pub accept_stationary: Option<f64>,
    /// A seed whose iterate comes this close to an already accepted root is dropped.
    pub merge_radius: f64,
    /// Iterations after which a seed that stopped making progress is abandoned.
    pub stall_window: usize,
    /// Also refine every seed with Levenberg–Marquardt steps, for shell and sphere seeds
    /// respectively. Its basins differ from those of the halving line search around
    /// ill-conditioned roots; on the shells a denser grid buys more for the same time.
    pub levenberg_on_shells: bool,
    pub levenberg_on_sphere: bool,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            seed_radii: [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 17.0, 20.0, 23.0, 26.0, 30.0, 36.0, 45.0]
                .iter()
                .map(|d: &f64| d.to_radians().tan())
                .collect(),
            include_origin: true,
            sphere_radius: None,
            sphere_seeds: 64,
            max_iterations: 50,
            max_halvings: 20,
            tau_res: 1e-10,
            tau_dup: 1e-6,
            max_roots: 64,
            accept_stationary: None,
            merge_radius: 1e-5,
            stall_window: 4,
            levenberg_on_shells: false,
            levenberg_on_sphere: true,
        }
    }
}

impl RootOptions {
    pub fn on_sphere(mut self, radius: f64) -> Self {
        self.sphere_radius = Some(radius);
        self
    }

    pub fn seeds(&self) -> Vec<CayleyVector> {
        match self.sphere_radius {
            Some(r) if r > 0.0 => fibonacci_sphere(self.sphere_seeds.max(1))
                .into_iter()
                .map(|d| CayleyVector::from_vector(&(d * r)))
                .collect(),
            Some(_) => vec![CayleyVector::ZERO],
            None => {
                let mut seeds = Vec::new();
                if self.include_origin {
                    seeds.push(CayleyVector::ZERO);
                }
                let dirs = cube_directions();
                for &r in &self.seed_radii {
                    seeds.extend(dirs.iter().map(|d| CayleyVector::from_vector(&(d * r))));
                }
                seeds
            }
        }
    }
}

/// The 26 unit directions towards the neighbours of a cube cell.
fn cube_directions() -> Vec<Vector3<f64>> {
    let mut out = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if (i, j, k) != (0, 0, 0) {
                    out.push(Vector3::new(i as f64, j as f64, k as f64).normalize());
                }
            }
        }
    }
    out
}

fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = core::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Scaled residual `max_i |p_i(q)| / (1 + ‖coeffs(p_i)‖)`.
pub fn root_residual(system: &[TrivariatePoly], q: CayleyVector) -> f64 {
    system
        .iter()
        .map(|p| p.eval(q).abs() / (1.0 + p.coeff_norm()))
        .fold(0.0, f64::max)
}

/// Rows and columns of a square minor of one matrix of a [`DeterminantSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minor {
    pub matrix: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Equations given as minors of polynomial matrices plus free-standing polynomials.
///
/// Expanding the minors gives an ordinary system; keeping them factored lets the root
/// finder evaluate each equation from the matrix entries, which is cheaper and loses less
/// precision than the expanded sextics.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantSystem {
    pub matrices: Vec<PolyMatrix>,
    pub minors: Vec<Minor>,
    pub extra: Vec<TrivariatePoly>,
}

impl DeterminantSystem {
    fn minor_poly(&self, m: &Minor) -> Result<TrivariatePoly> {
        let mat = self.matrices.get(m.matrix).ok_or(Error::InvalidConfig("minor refers to a missing matrix"))?;
        if m.rows.len() != m.cols.len() {
            return Err(Error::UnsupportedSize { rows: m.rows.len(), cols: m.cols.len() });
        }
        if m.rows.iter().any(|&r| r >= mat.rows()) || m.cols.iter().any(|&c| c >= mat.cols()) {
            return Err(Error::InvalidConfig("minor index out of range"));
        }
        det_poly(&mat.submatrix(&m.rows, &m.cols))
    }

    /// Expanded minors followed by the extra polynomials, each scaled to unit max-abs
    /// coefficient.
    pub fn expand(&self) -> Result<Vec<TrivariatePoly>> {
        let mut out = Vec::with_capacity(self.len());
        for m in &self.minors {
            out.push(self.minor_poly(m)?.normalized());
        }
        out.extend(self.extra.iter().map(TrivariatePoly::normalized));
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.minors.len() + self.extra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A residual vector in `q` the Gauss–Newton engine can evaluate.
trait Model {
    fn rows(&self) -> usize;
    /// Residuals into `r` and, when requested, their gradients into `jac`.
    fn eval(&self, q: CayleyVector, r: &mut [f64], jac: Option<&mut [Vector3<f64>]>);
}

/// Monomials up to a total degree, evaluated with their gradients.
struct MonomialBasis {
    exps: Vec<(usize, usize, usize)>,
    degree: usize,
}

impl MonomialBasis {
    fn new(degree: usize) -> Self {
        Self { exps: exponents(degree).collect(), degree }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }

    fn eval(&self, q: CayleyVector, value: &mut [f64], grad: Option<&mut [Vector3<f64>]>) {
        let powers = |v: f64| {
            let mut out = vec![1.0; self.degree + 1];
            for k in 1..=self.degree {
                out[k] = out[k - 1] * v;
            }
            out
        };
        let (px, py, pz) = (powers(q.x), powers(q.y), powers(q.z));
        for (j, &(a, b, c)) in self.exps.iter().enumerate() {
            value[j] = px[a] * py[b] * pz[c];
        }
        if let Some(grad) = grad {
            for (j, &(a, b, c)) in self.exps.iter().enumerate() {
                grad[j] = Vector3::new(
                    if a > 0 { a as f64 * px[a - 1] * py[b] * pz[c] } else { 0.0 },
                    if b > 0 { b as f64 * px[a] * py[b - 1] * pz[c] } else { 0.0 },
                    if c > 0 { c as f64 * px[a] * py[b] * pz[c - 1] } else { 0.0 },
                );
            }
        }
    }
}

/// Dense coefficient rows over one monomial basis, each row pre-multiplied by a weight.
struct PolyBlock {
    basis: MonomialBasis,
    coeffs: Vec<f64>,
    rows: usize,
}

impl PolyBlock {
    fn new<'a>(polys: impl IntoIterator<Item = (&'a TrivariatePoly, f64)> + Clone) -> Self {
        let degree = polys.clone().into_iter().map(|(p, _)| p.max_degree()).max().unwrap_or(0);
        let basis = MonomialBasis::new(degree);
        let width = basis.len();
        let mut coeffs = Vec::new();
        let mut rows = 0;
        for (p, w) in polys {
            let start = coeffs.len();
            coeffs.resize(start + width, 0.0);
            for (j, c) in p.coeffs().iter().enumerate() {
                coeffs[start + j] = c * w;
            }
            rows += 1;
        }
        Self { basis, coeffs, rows }
    }

    fn row(&self, i: usize) -> &[f64] {
        let w = self.basis.len();
        &self.coeffs[i * w..(i + 1) * w]
    }

    fn eval(&self, q: CayleyVector, r: &mut [f64], jac: Option<&mut [Vector3<f64>]>) {
        let n = self.basis.len();
        let mut value = vec![0.0; n];
        match jac {
            Some(jac) => {
                let mut grad = vec![Vector3::zeros(); n];
                self.basis.eval(q, &mut value, Some(&mut grad));
                for i in 0..self.rows {
                    let row = self.row(i);
                    r[i] = dot(row, &value);
                    jac[i] = row.iter().zip(&grad).fold(Vector3::zeros(), |acc, (c, g)| acc + g * *c);
                }
            }
            None => {
                self.basis.eval(q, &mut value, None);
                for (i, ri) in r.iter_mut().enumerate().take(self.rows) {
                    *ri = dot(self.row(i), &value);
                }
            }
        }
    }
}

/// Expanded polynomials with residual weights `1 / (1 + ‖coeffs‖)`.
struct ScaledSystem(PolyBlock);

impl ScaledSystem {
    fn new(polys: &[TrivariatePoly]) -> Self {
        Self(PolyBlock::new(polys.iter().map(|p| (p, 1.0 / (1.0 + p.coeff_norm())))))
    }
}

impl Model for ScaledSystem {
    fn rows(&self) -> usize {
        self.0.rows
    }

    fn eval(&self, q: CayleyVector, r: &mut [f64], jac: Option<&mut [Vector3<f64>]>) {
        self.0.eval(q, r, jac)
    }
}

struct CompiledMinor {
    matrix: usize,
    rows: [usize; 3],
    cols: [usize; 3],
    size: usize,
    weight: f64,
}

/// [`DeterminantSystem`] evaluated from its matrix entries. Each minor carries the weight
/// that makes its residual equal the scaled residual of its normalized expansion.
struct MinorModel {
    /// Entries of each matrix, row-major, as polynomials over one basis.
    entries: Vec<(PolyBlock, usize)>,
    minors: Vec<CompiledMinor>,
    extra: ScaledSystem,
}

impl MinorModel {
    fn new(system: &DeterminantSystem) -> Result<Self> {
        let entries = system
            .matrices
            .iter()
            .map(|m| {
                let polys: Vec<&TrivariatePoly> =
                    (0..m.rows()).flat_map(|r| (0..m.cols()).map(move |c| m.get(r, c))).collect();
                (PolyBlock::new(polys.into_iter().map(|p| (p, 1.0))), m.cols())
            })
            .collect();
        let mut minors = Vec::with_capacity(system.minors.len());
        for m in &system.minors {
            let size = m.rows.len();
            if !(2..=3).contains(&size) {
                return Err(Error::UnsupportedSize { rows: size, cols: m.cols.len() });
            }
            let p = system.minor_poly(m)?;
            let scale = p.max_abs_coeff();
            let weight = if scale > 0.0 { 1.0 / (scale * (1.0 + p.normalized().coeff_norm())) } else { 0.0 };
            let mut rows = [0; 3];
            let mut cols = [0; 3];
            rows[..size].copy_from_slice(&m.rows);
            cols[..size].copy_from_slice(&m.cols);
            minors.push(CompiledMinor { matrix: m.matrix, rows, cols, size, weight });
        }
        let extra: Vec<TrivariatePoly> = system.extra.iter().map(TrivariatePoly::normalized).collect();
        Ok(Self { entries, minors, extra: ScaledSystem::new(&extra) })
    }
}

impl Model for MinorModel {
    fn rows(&self) -> usize {
        self.minors.len() + self.extra.rows()
    }

    fn eval(&self, q: CayleyVector, r: &mut [f64], mut jac: Option<&mut [Vector3<f64>]>) {
        let with_grad = jac.is_some();
        let mut values = Vec::with_capacity(self.entries.len());
        let mut grads = Vec::with_capacity(self.entries.len());
        for (block, _) in &self.entries {
            let mut v = vec![0.0; block.rows];
            let mut g = vec![Vector3::zeros(); if with_grad { block.rows } else { 0 }];
            block.eval(q, &mut v, with_grad.then_some(&mut g[..]));
            values.push(v);
            grads.push(g);
        }
        for (i, m) in self.minors.iter().enumerate() {
            let cols = self.entries[m.matrix].1;
            let v = |a: usize, b: usize| values[m.matrix][m.rows[a] * cols + m.cols[b]];
            let g = |a: usize, b: usize| grads[m.matrix][m.rows[a] * cols + m.cols[b]];
            let (det, grad) = if m.size == 2 {
                let det = v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0);
                let grad = with_grad.then(|| {
                    g(0, 0) * v(1, 1) + g(1, 1) * v(0, 0) - g(0, 1) * v(1, 0) - g(1, 0) * v(0, 1)
                });
                (det, grad)
            } else {
                // Cofactors double as the derivative of the determinant w.r.t. each entry.
                let cof = |a: usize, b: usize| {
                    let (r0, r1) = [(1, 2), (0, 2), (0, 1)][a];
                    let (c0, c1) = [(1, 2), (0, 2), (0, 1)][b];
                    let s = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                    s * (v(r0, c0) * v(r1, c1) - v(r0, c1) * v(r1, c0))
                };
                let c = [[cof(0, 0), cof(0, 1), cof(0, 2)], [cof(1, 0), cof(1, 1), cof(1, 2)], [cof(2, 0), cof(2, 1), cof(2, 2)]];
                let det = v(0, 0) * c[0][0] + v(0, 1) * c[0][1] + v(0, 2) * c[0][2];
                let grad = with_grad.then(|| {
                    let mut acc = Vector3::zeros();
                    for (a, row) in c.iter().enumerate() {
                        for (b, cab) in row.iter().enumerate() {
                            acc += g(a, b) * *cab;
                        }
                    }
                    acc
                });
                (det, grad)
            };
            r[i] = det * m.weight;
            if let (Some(jac), Some(grad)) = (jac.as_deref_mut(), grad) {
                jac[i] = grad * m.weight;
            }
        }
        let k = self.minors.len();
        self.extra.eval(q, &mut r[k..], jac.map(|j| &mut j[k..]));
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scratch buffers plus the derived quantities the engine needs.
struct Evaluator<'a, M: Model> {
    model: &'a M,
    r: Vec<f64>,
    jac: Vec<Vector3<f64>>,
}

impl<'a, M: Model> Evaluator<'a, M> {
    fn new(model: &'a M) -> Self {
        let n = model.rows();
        Self { model, r: vec![0.0; n], jac: vec![Vector3::zeros(); n] }
    }

    fn cost(&mut self, q: CayleyVector) -> f64 {
        self.model.eval(q, &mut self.r, None);
        self.r.iter().map(|v| v * v).sum()
    }

    fn max_residual(&mut self, q: CayleyVector) -> f64 {
        self.model.eval(q, &mut self.r, None);
        self.r.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Normal equations `(JᵀJ, Jᵀr)` and the cost `rᵀr`.
    fn linearize(&mut self, q: CayleyVector) -> (Matrix3<f64>, Vector3<f64>, f64) {
        self.model.eval(q, &mut self.r, Some(&mut self.jac));
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        let mut cost = 0.0;
        for (r, j) in self.r.iter().zip(&self.jac) {
            jtj += j * j.transpose();
            jtr += j * *r;
            cost += r * r;
        }
        (jtj, jtr, cost)
    }
}

/// Pseudo-inverse solve of the symmetric positive semi-definite `jtj δ = -jtr`.
fn gauss_newton_step(jtj: &Matrix3<f64>, jtr: &Vector3<f64>) -> Option<Vector3<f64>> {
    let eig = jtj.symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(max > 0.0) || !max.is_finite() {
        return None;
    }
    let rhs = eig.eigenvectors.transpose() * jtr;
    let mut scaled = Vector3::zeros();
    for i in 0..3 {
        let l = eig.eigenvalues[i];
        if l > max * 1e-24 {
            scaled[i] = -rhs[i] / l;
        }
    }
    Some(eig.eigenvectors * scaled)
}

enum Outcome {
    Converged(CayleyVector, f64),
    Stationary(CayleyVector, f64),
    Merged,
    Failed,
}

/// Keeps sphere-seeded iterates on the sphere.
fn retract(q: CayleyVector, radius: Option<f64>) -> CayleyVector {
    match radius {
        Some(r) if r > 0.0 && q.norm() > 0.0 => CayleyVector::from_vector(&(q.to_vector() * (r / q.norm()))),
        _ => q,
    }
}

#[derive(Clone, Copy)]
enum StepRule {
    /// Full Gauss–Newton step, halved until the cost decreases.
    Halving,
    /// Levenberg–Marquardt with an adaptive damping factor.
    Levenberg,
}

/// Early-exit bookkeeping shared by both step rules.
struct Progress<'a> {
    known: &'a [(CayleyVector, f64)],
    history: Vec<f64>,
    /// Costs below this may still be accepted, so such seeds are never abandoned.
    keep: f64,
}

impl Progress<'_> {
    fn check(&mut self, q: CayleyVector, cost: f64, opts: &RootOptions) -> Option<Outcome> {
        if q.norm() > 1e6 {
            return Some(Outcome::Failed);
        }
        if self.known.iter().any(|(r, _)| r.distance(q) < opts.merge_radius) {
            return Some(Outcome::Merged);
        }
        self.history.push(cost);
        let w = opts.stall_window;
        let n = self.history.len();
        if w > 0 && n > w && cost > self.keep && cost > 0.5 * self.history[n - 1 - w] {
            return Some(Outcome::Failed);
        }
        None
    }
}

fn refine<M: Model>(
    ev: &mut Evaluator<'_, M>,
    seed: CayleyVector,
    rule: StepRule,
    known: &[(CayleyVector, f64)],
    opts: &RootOptions,
) -> Outcome {
    let floor = opts.accept_stationary.unwrap_or(opts.tau_res).max(opts.tau_res);
    let mut q = seed;
    let (mut jtj, mut jtr, mut cost) = ev.linearize(q);
    let mut progress = Progress { known, history: vec![cost], keep: 100.0 * floor * floor };
    let tiny = |step: &Vector3<f64>, q: CayleyVector| step.norm() <= 1e-15 * (1.0 + q.norm());
    let mut mu = 1e-3 * jtj.diagonal().max();
    for _ in 0..opts.max_iterations {
        if cost == 0.0 {
            break;
        }
        let mut accepted = None;
        match rule {
            StepRule::Halving => {
                let Some(step) = gauss_newton_step(&jtj, &jtr) else { break };
                // Iterate until the step itself is negligible: near ill-conditioned roots
                // the residual drops below any fixed floor well before q settles.
                if tiny(&step, q) {
                    break;
                }
                let mut alpha = 1.0;
                for _ in 0..=opts.max_halvings {
                    let cand = retract(CayleyVector::from_vector(&(q.to_vector() + step * alpha)), opts.sphere_radius);
                    if cand.is_finite() {
                        let c = ev.cost(cand);
                        if c < cost {
                            accepted = Some(cand);
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
            }
            StepRule::Levenberg => {
                let mut settled = false;
                for _ in 0..=opts.max_halvings {
                    let damped = jtj + Matrix3::identity() * mu;
                    let Some(chol) = damped.cholesky() else {
                        mu = (mu * 4.0).max(f64::MIN_POSITIVE);
                        continue;
                    };
                    let step = chol.solve(&(-jtr));
                    if tiny(&step, q) {
                        settled = true;
                        break;
                    }
                    let cand = retract(CayleyVector::from_vector(&(q.to_vector() + step)), opts.sphere_radius);
                    if cand.is_finite() && ev.cost(cand) < cost {
                        accepted = Some(cand);
                        mu /= 3.0;
                        break;
                    }
                    mu = (mu * 4.0).max(f64::MIN_POSITIVE);
                }
                if settled {
                    break;
                }
            }
        }
        let Some(next) = accepted else { break };
        let moved = (next.to_vector() - q.to_vector()).norm();
        q = next;
        (jtj, jtr, cost) = ev.linearize(q);
        if let Some(out) = progress.check(q, cost, opts) {
            return out;
        }
        if moved <= 1e-15 * (1.0 + q.norm()) {
            break;
        }
    }
    let res = ev.max_residual(q);
    if res < opts.tau_res {
        Outcome::Converged(q, res)
    } else {
        Outcome::Stationary(q, res)
    }
}

fn sort_key(a: &CayleyVector, b: &CayleyVector) -> Ordering {
    (a.norm(), a.x, a.y, a.z)
        .partial_cmp(&(b.norm(), b.x, b.y, b.z))
        .unwrap_or(Ordering::Equal)
}

/// Distinct real roots of `system`, ordered by `(|q|, q_x, q_y, q_z)`.
pub fn find_real_roots(system: &[TrivariatePoly], opts: &RootOptions) -> Result<Vec<CayleyVector>> {
    Ok(find_real_roots_with_residuals(system, opts)?.into_iter().map(|(q, _)| q).collect())
}

/// As [`find_real_roots`], also returning each root's [`root_residual`].
pub fn find_real_roots_with_residuals(
    system: &[TrivariatePoly],
    opts: &RootOptions,
) -> Result<Vec<(CayleyVector, f64)>> {
    find_real_roots_from(system, &opts.seeds(), opts)
}

/// As [`find_real_roots_with_residuals`] with caller-supplied seeds.
pub fn find_real_roots_from(
    system: &[TrivariatePoly],
    seeds: &[CayleyVector],
    opts: &RootOptions,
) -> Result<Vec<(CayleyVector, f64)>> {
    if system.len() < 3 {
        return Err(Error::InvalidConfig("a trivariate system needs at least three polynomials"));
    }
    solve_model(&ScaledSystem::new(system), seeds, opts)
}

/// Roots of a [`DeterminantSystem`]; identical in contract to [`find_real_roots_with_residuals`]
/// on its expansion, with residuals evaluated from the factored minors.
pub fn find_determinant_roots(system: &DeterminantSystem, opts: &RootOptions) -> Result<Vec<(CayleyVector, f64)>> {
    if system.len() < 3 {
        return Err(Error::InvalidConfig("a trivariate system needs at least three polynomials"));
    }
    solve_model(&MinorModel::new(system)?, &opts.seeds(), opts)
}

fn solve_model<M: Model>(model: &M, seeds: &[CayleyVector], opts: &RootOptions) -> Result<Vec<(CayleyVector, f64)>> {
    let mut ev = Evaluator::new(model);
    let levenberg = if opts.sphere_radius.is_some() { opts.levenberg_on_sphere } else { opts.levenberg_on_shells };
    let rules: &[StepRule] = if levenberg { &[StepRule::Halving, StepRule::Levenberg] } else { &[StepRule::Halving] };
    let mut roots: Vec<(CayleyVector, f64)> = Vec::new();
    for &seed in seeds {
        for &rule in rules {
            let (q, res) = match refine(&mut ev, seed, rule, &roots, opts) {
                Outcome::Converged(q, r) => (q, r),
                Outcome::Stationary(q, r) if opts.accept_stationary.is_some_and(|t| r < t) => (q, r),
                _ => continue,
            };
            match roots.iter_mut().find(|(r, _)| r.distance(q) < opts.tau_dup) {
                Some(existing) if res < existing.1 => *existing = (q, res),
                Some(_) => {}
                None => roots.push((q, res)),
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::NoRootsFound);
    }
    if roots.len() > opts.max_roots {
        roots.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal));
        roots.truncate(opts.max_roots);
    }
    roots.sort_by(|a, b| sort_key(&a.0, &b.0));
    Ok(roots)
}
