//! Points of `C^n` and the real-coordinate view used by the differencing code.
//!
//! Real coordinates are interleaved: index `2k` is `Re z_k`, index `2k + 1`
//! is `Im z_k`. Every Jacobian and gradient in the crate uses this order.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of `C^n`.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexVec(pub Vec<Complex64>);

impl ComplexVec {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Build from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    /// Build a point with zero imaginary parts.
    pub fn from_reals(xs: &[f64]) -> Self {
        Self(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Inverse of [`ComplexVec::to_real`].
    pub fn from_real(xs: &[f64]) -> Self {
        assert!(xs.len().is_multiple_of(2), "real view must have even length");
        Self(xs.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    /// Complex dimension `n`.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Real dimension `2n`.
    pub fn real_dim(&self) -> usize {
        2 * self.0.len()
    }

    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn real(&self, i: usize) -> f64 {
        let z = self.0[i / 2];
        if i.is_multiple_of(2) {
            z.re
        } else {
            z.im
        }
    }

    pub fn set_real(&mut self, i: usize, value: f64) {
        let z = &mut self.0[i / 2];
        if i.is_multiple_of(2) {
            z.re = value;
        } else {
            z.im = value;
        }
    }

    /// Copy of `self` with real coordinate `i` shifted by `delta`.
    pub fn shifted(&self, i: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.set_real(i, self.real(i) + delta);
        out
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Max over the absolute values of all real coordinates.
    pub fn max_norm(&self) -> f64 {
        self.0
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0, f64::max)
    }

    /// Real inner product `Re <self, other>` on `R^{2n}`.
    pub fn real_dot(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b * s).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn from_dvector(v: &DVector<Complex64>) -> Self {
        Self(v.iter().copied().collect())
    }
}

impl fmt::Debug for ComplexVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.iter().map(|z| (z.re, z.im)))
            .finish()
    }
}

impl Index<usize> for ComplexVec {
    type Output = Complex64;
    fn index(&self, k: usize) -> &Complex64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for ComplexVec {
    fn index_mut(&mut self, k: usize) -> &mut Complex64 {
        &mut self.0[k]
    }
}

impl From<Vec<Complex64>> for ComplexVec {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

impl Add for &ComplexVec {
    type Output = ComplexVec;
    fn add(self, rhs: &ComplexVec) -> ComplexVec {
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexVec {
    type Output = ComplexVec;
    fn sub(self, rhs: &ComplexVec) -> ComplexVec {
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &ComplexVec {
    type Output = ComplexVec;
    fn mul(self, s: f64) -> ComplexVec {
        self.scale(s)
    }
}

/// The standard complex structure `J` on `R^{2n}` in interleaved order.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// Real `2n x 2n` form of a complex `n x n` matrix acting on interleaved coordinates.
pub fn realify(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    let mut out = DMatrix::zeros(2 * rows, 2 * cols);
    for i in 0..rows {
        for j in 0..cols {
            let z = a[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_view_round_trips() {
        let p = ComplexVec::from_pairs(&[(1.0, 2.0), (-3.0, 0.5)]);
        assert_eq!(p.to_real(), vec![1.0, 2.0, -3.0, 0.5]);
        assert_eq!(ComplexVec::from_real(&p.to_real()), p);
        assert_eq!(p.real(3), 0.5);
    }

    #[test]
    fn realify_commutes_with_j() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 2.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(3.0, 0.5),
                Complex64::new(-2.0, 1.0),
            ],
        );
        let r = realify(&a);
        let j = complex_structure(2);
        assert!((&j * &r - &r * &j).norm() < 1e-14);
    }
}
