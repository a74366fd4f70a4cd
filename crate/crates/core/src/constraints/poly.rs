//! Dense polynomials in the three Cayley parameters and matrices of them.
//!
//! Monomials `x^a y^b z^c` are stored in graded order: all monomials of total degree
//! `n` come after every monomial of lower degree, and within degree `n` they are ordered
//! by `(b + c, c)`. The index of a monomial therefore does not depend on the stored
//! degree bound, which lets polynomials of different bounds share one layout.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::CayleyVector;

/// Number of monomials of total degree at most `degree` in three variables.
pub const fn monomial_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) * (degree + 3) / 6
}

/// Position of `x^a y^b z^c` in the graded layout.
pub const fn monomial_index(a: usize, b: usize, c: usize) -> usize {
    let n = a + b + c;
    let k = b + c;
    n * (n + 1) * (n + 2) / 6 + k * (k + 1) / 2 + c
}

/// Exponents of every monomial up to `degree`, in storage order.
pub fn exponents(degree: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..=degree).flat_map(|n| (0..=n).flat_map(move |k| (0..=k).map(move |c| (n - k, k - c, c))))
}

fn powers(v: f64, degree: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut acc = 1.0;
    for _ in 0..=degree {
        out.push(acc);
        acc *= v;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrivariatePoly {
    max_degree: usize,
    coeffs: Vec<f64>,
}

impl TrivariatePoly {
    pub fn zero(max_degree: usize) -> Self {
        Self { max_degree, coeffs: vec![0.0; monomial_count(max_degree)] }
    }

    pub fn constant(value: f64) -> Self {
        Self { max_degree: 0, coeffs: vec![value] }
    }

    /// `coeff · x^a y^b z^c`.
    pub fn monomial(coeff: f64, a: usize, b: usize, c: usize) -> Self {
        let mut p = Self::zero(a + b + c);
        p.coeffs[monomial_index(a, b, c)] = coeff;
        p
    }

    /// The variable `q_x`, `q_y` or `q_z` for `axis` 0, 1 or 2.
    pub fn variable(axis: usize) -> Self {
        match axis {
            0 => Self::monomial(1.0, 1, 0, 0),
            1 => Self::monomial(1.0, 0, 1, 0),
            2 => Self::monomial(1.0, 0, 0, 1),
            _ => panic!("axis must be 0, 1 or 2"),
        }
    }

    /// Builds a polynomial from its coefficient table in storage order.
    pub fn from_coeffs(max_degree: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), monomial_count(max_degree), "coefficient table size");
        Self { max_degree, coeffs }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, a: usize, b: usize, c: usize) -> f64 {
        if a + b + c > self.max_degree {
            0.0
        } else {
            self.coeffs[monomial_index(a, b, c)]
        }
    }

    pub fn add_term(&mut self, coeff: f64, a: usize, b: usize, c: usize) {
        if a + b + c > self.max_degree {
            *self = self.with_max_degree(a + b + c);
        }
        self.coeffs[monomial_index(a, b, c)] += coeff;
    }

    /// Non-zero terms as `(a, b, c, coeff)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        exponents(self.max_degree)
            .zip(self.coeffs.iter().copied())
            .filter(|(_, v)| *v != 0.0)
            .map(|((a, b, c), v)| (a, b, c, v))
    }

    /// Highest total degree carrying a non-zero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms().map(|(a, b, c, _)| a + b + c).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Copy with a larger (or equal) stored degree bound.
    pub fn with_max_degree(&self, max_degree: usize) -> Self {
        assert!(max_degree >= self.max_degree);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(monomial_count(max_degree), 0.0);
        Self { max_degree, coeffs }
    }

    /// Copy whose stored bound equals the actual degree.
    pub fn trimmed(&self) -> Self {
        let d = self.degree();
        Self { max_degree: d, coeffs: self.coeffs[..monomial_count(d)].to_vec() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { max_degree: self.max_degree, coeffs: self.coeffs.iter().map(|v| v * factor).collect() }
    }

    /// Divides by the largest coefficient magnitude; the zero polynomial is returned as is.
    pub fn normalized(&self) -> Self {
        let m = self.max_abs_coeff();
        if m > 0.0 {
            self.scaled(1.0 / m)
        } else {
            self.clone()
        }
    }

    pub fn eval(&self, q: CayleyVector) -> f64 {
        let d = self.max_degree;
        let (px, py, pz) = (powers(q.x, d), powers(q.y, d), powers(q.z, d));
        exponents(d)
            .zip(&self.coeffs)
            .filter(|(_, v)| **v != 0.0)
            .map(|((a, b, c), v)| v * px[a] * py[b] * pz[c])
            .sum()
    }

    /// Value and gradient with respect to `(q_x, q_y, q_z)`.
    pub fn eval_with_gradient(&self, q: CayleyVector) -> (f64, [f64; 3]) {
        let d = self.max_degree;
        let (px, py, pz) = (powers(q.x, d), powers(q.y, d), powers(q.z, d));
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        for ((a, b, c), &v) in exponents(d).zip(&self.coeffs) {
            if v == 0.0 {
                continue;
            }
            let (xa, yb, zc) = (px[a], py[b], pz[c]);
            value += v * xa * yb * zc;
            if a > 0 {
                grad[0] += v * a as f64 * px[a - 1] * yb * zc;
            }
            if b > 0 {
                grad[1] += v * b as f64 * xa * py[b - 1] * zc;
            }
            if c > 0 {
                grad[2] += v * c as f64 * xa * yb * pz[c - 1];
            }
        }
        (value, grad)
    }
}

impl Add for &TrivariatePoly {
    type Output = TrivariatePoly;

    fn add(self, rhs: &TrivariatePoly) -> TrivariatePoly {
        let d = self.max_degree.max(rhs.max_degree);
        let mut out = self.with_max_degree(d);
        for (o, v) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o += v;
        }
        out
    }
}

impl Sub for &TrivariatePoly {
    type Output = TrivariatePoly;

    fn sub(self, rhs: &TrivariatePoly) -> TrivariatePoly {
        self + &(-rhs)
    }
}

impl Neg for &TrivariatePoly {
    type Output = TrivariatePoly;

    fn neg(self) -> TrivariatePoly {
        self.scaled(-1.0)
    }
}

impl Mul for &TrivariatePoly {
    type Output = TrivariatePoly;

    fn mul(self, rhs: &TrivariatePoly) -> TrivariatePoly {
        let mut out = TrivariatePoly::zero(self.max_degree + rhs.max_degree);
        let rhs_terms: Vec<_> = rhs.terms().collect();
        for (a1, b1, c1, v1) in self.terms() {
            for &(a2, b2, c2, v2) in &rhs_terms {
                out.coeffs[monomial_index(a1 + a2, b1 + b2, c1 + c2)] += v1 * v2;
            }
        }
        out
    }
}

/// Rectangular grid of polynomials, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<TrivariatePoly>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<TrivariatePoly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidConfig("entry count does not match matrix shape"));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> TrivariatePoly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &TrivariatePoly {
        &self.entries[row * self.cols + col]
    }

    /// Largest stored degree bound over all entries.
    pub fn degree_bound(&self) -> usize {
        self.entries.iter().map(|p| p.max_degree()).max().unwrap_or(0)
    }

    /// Largest stored degree bound in `row`.
    pub fn row_degree_bound(&self, row: usize) -> usize {
        (0..self.cols).map(|c| self.get(row, c).max_degree()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, p| m.max(p.max_abs_coeff()))
    }

    pub fn eval(&self, q: CayleyVector) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).eval(q))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        PolyMatrix::from_fn(rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_dense_and_graded() {
        for d in 0..8 {
            let idx: Vec<_> = exponents(d).map(|(a, b, c)| monomial_index(a, b, c)).collect();
            assert_eq!(idx, (0..monomial_count(d)).collect::<Vec<_>>());
        }
        assert_eq!(monomial_count(2), 10);
        assert_eq!(monomial_count(6), 84);
    }

    #[test]
    fn arithmetic_matches_pointwise_evaluation() {
        let x = TrivariatePoly::variable(0);
        let y = TrivariatePoly::variable(1);
        let z = TrivariatePoly::variable(2);
        let p = &(&(&x * &y) + &z) - &TrivariatePoly::constant(2.0);
        let qz = &(&z * &z) + &x;
        let prod = &p * &qz;
        let q = CayleyVector::new(0.3, -1.2, 0.7);
        let expected = (0.3 * -1.2 + 0.7 - 2.0) * (0.49 + 0.3);
        assert!((prod.eval(q) - expected).abs() < 1e-14);
        assert_eq!(prod.degree(), 4);
        assert_eq!(prod.trimmed().max_degree(), 4);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = TrivariatePoly::variable(0);
        let y = TrivariatePoly::variable(1);
        let z = TrivariatePoly::variable(2);
        let p = &(&(&(&x * &x) * &y) - &(&(&z * &z) * &z)) + &(&x * &z);
        let q = CayleyVector::new(0.4, -0.3, 1.1);
        let (v, g) = p.eval_with_gradient(q);
        assert!((v - p.eval(q)).abs() < 1e-15);
        let h = 1e-6;
        for (axis, gi) in g.iter().enumerate() {
            let mut plus = q.to_vector();
            let mut minus = q.to_vector();
            plus[axis] += h;
            minus[axis] -= h;
            let fd = (p.eval(CayleyVector::from_vector(&plus)) - p.eval(CayleyVector::from_vector(&minus))) / (2.0 * h);
            assert!((fd - gi).abs() < 1e-8);
        }
    }

    #[test]
    fn normalization_and_norms() {
        let mut p = TrivariatePoly::zero(2);
        p.add_term(-4.0, 1, 1, 0);
        p.add_term(2.0, 0, 0, 0);
        let n = p.normalized();
        assert_eq!(n.max_abs_coeff(), 1.0);
        assert_eq!(n.coeff(1, 1, 0), -1.0);
        assert_eq!(TrivariatePoly::zero(3).normalized(), TrivariatePoly::zero(3));
        assert!((p.coeff_norm() - 20f64.sqrt()).abs() < 1e-15);
    }
}
