//! Real quadratic forms `σ(z) = z̄ᵀHz + Re(zᵀSz)` on `C^n`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::ComplexVec;

/// Entrywise tolerance for the hermitian/symmetric checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("H is {h_rows}x{h_cols} and S is {s_rows}x{s_cols}; both must be n x n")]
    Shape {
        h_rows: usize,
        h_cols: usize,
        s_rows: usize,
        s_cols: usize,
    },
    #[error("H is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("S is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    h: DMatrix<Complex64>,
    s: DMatrix<Complex64>,
}

impl QuadraticForm {
    /// Validating constructor: rejects `H ≠ H*` or `S ≠ Sᵀ` beyond [`SYMMETRY_TOL`].
    pub fn new(h: DMatrix<Complex64>, s: DMatrix<Complex64>) -> Result<Self, FormError> {
        check_shape(&h, &s)?;
        let dh = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dh > SYMMETRY_TOL {
            return Err(FormError::NotHermitian(dh));
        }
        let ds = (&s - s.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if ds > SYMMETRY_TOL {
            return Err(FormError::NotSymmetric(ds));
        }
        Ok(Self::symmetrized_unchecked(h, s))
    }

    /// Replace `H` by its hermitian part and `S` by its symmetric part.
    pub fn symmetrized(h: DMatrix<Complex64>, s: DMatrix<Complex64>) -> Result<Self, FormError> {
        check_shape(&h, &s)?;
        Ok(Self::symmetrized_unchecked(h, s))
    }

    fn symmetrized_unchecked(h: DMatrix<Complex64>, s: DMatrix<Complex64>) -> Self {
        let h = (&h + h.adjoint()).scale(0.5);
        let s = (&s + s.transpose()).scale(0.5);
        Self { h, s }
    }

    /// `σ(z) = Σ a_j |z_j|²`.
    pub fn diagonal(a: &[f64]) -> Self {
        let n = a.len();
        let h = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(a[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self {
            h,
            s: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hermitian_part(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn harmonic_part(&self) -> &DMatrix<Complex64> {
        &self.s
    }

    pub fn eval(&self, z: &ComplexVec) -> f64 {
        let v = z.to_dvector();
        let herm = (v.adjoint() * &self.h * &v)[(0, 0)].re;
        let harm = (v.transpose() * &self.s * &v)[(0, 0)].re;
        herm + harm
    }

    /// `∇σ(z) = 2Hz + 2 conj(Sz)` packed as a complex vector.
    pub fn gradient(&self, z: &ComplexVec) -> ComplexVec {
        let v = z.to_dvector();
        let hz = &self.h * &v;
        let sz = &self.s * &v;
        ComplexVec(
            hz.iter()
                .zip(sz.iter())
                .map(|(a, b)| 2.0 * a + 2.0 * b.conj())
                .collect(),
        )
    }

    /// Real `2n x 2n` Hessian (the matrix of the real-linear map `∇σ`).
    pub fn real_hessian(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for col in 0..2 * n {
            let mut e = ComplexVec::zeros(n);
            e.set_real(col, 1.0);
            let g = self.gradient(&e).to_real();
            for (row, value) in g.into_iter().enumerate() {
                out[(row, col)] = value;
            }
        }
        out
    }

    /// `true` when `H` is diagonal and `S = 0`, so the flow is coordinatewise exponential.
    pub fn is_diagonal_hermitian(&self) -> bool {
        let n = self.dim();
        self.s.iter().all(|z| z.norm() == 0.0)
            && (0..n).all(|i| (0..n).all(|j| i == j || self.h[(i, j)].norm() == 0.0))
    }

    /// Change of variables `z = U w`: returns the form `w ↦ σ(Uw)`.
    pub fn pullback(&self, u: &DMatrix<Complex64>) -> Self {
        let h = u.adjoint() * &self.h * u;
        let s = u.transpose() * &self.s * u;
        Self::symmetrized_unchecked(h, s)
    }
}

fn check_shape(h: &DMatrix<Complex64>, s: &DMatrix<Complex64>) -> Result<(), FormError> {
    let (hr, hc) = h.shape();
    let (sr, sc) = s.shape();
    if hr == hc && sr == sc && hr == sr {
        Ok(())
    } else {
        Err(FormError::Shape {
            h_rows: hr,
            h_cols: hc,
            s_rows: sr,
            s_cols: sc,
        })
    }
}

/// Row-major complex matrix as nested `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_json(rows: &MatrixJson) -> Result<DMatrix<Complex64>, String> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err("matrix rows have unequal lengths".into());
    }
    Ok(DMatrix::from_fn(n, m, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn matrix_to_json(a: &DMatrix<Complex64>) -> MatrixJson {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormJson {
    pub h: MatrixJson,
    pub s: MatrixJson,
}

impl TryFrom<&QuadraticFormJson> for QuadraticForm {
    type Error = String;
    fn try_from(j: &QuadraticFormJson) -> Result<Self, String> {
        let h = matrix_from_json(&j.h)?;
        let s = matrix_from_json(&j.s)?;
        QuadraticForm::new(h, s).map_err(|e| e.to_string())
    }
}

impl From<&QuadraticForm> for QuadraticFormJson {
    fn from(q: &QuadraticForm) -> Self {
        Self {
            h: matrix_to_json(&q.h),
            s: matrix_to_json(&q.s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_form(rng: &mut ChaCha8Rng, n: usize) -> QuadraticForm {
        let mut r = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let h = DMatrix::from_fn(n, n, |_, _| r());
        let s = DMatrix::from_fn(n, n, |_, _| r());
        QuadraticForm::symmetrized(h, s).unwrap()
    }

    #[test]
    fn evaluates_real_and_matches_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..4 {
            let q = random_form(&mut rng, n);
            let z = ComplexVec((0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
            let v = z.to_dvector();
            let full = (v.adjoint() * q.hermitian_part() * &v)[(0, 0)]
                + ((v.transpose() * q.harmonic_part() * &v)[(0, 0)] + (v.transpose() * q.harmonic_part() * &v)[(0, 0)].conj()) * 0.5;
            assert!(full.im.abs() < 1e-12);
            // Euler: ∇σ(z)·z = 2σ(z)
            assert!((q.gradient(&z).real_dot(&z) - 2.0 * q.eval(&z)).abs() < 1e-12);
            // σ(x) = ½ xᵀ Hess x
            let x = nalgebra::DVector::from_vec(z.to_real());
            let quad = 0.5 * (x.transpose() * q.real_hessian() * &x)[(0, 0)];
            assert!((quad - q.eval(&z)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(1, 1, &[c(1.0, 0.5)]);
        let s = DMatrix::from_row_slice(1, 1, &[c(0.0, 0.0)]);
        assert!(matches!(QuadraticForm::new(h, s), Err(FormError::NotHermitian(_))));
        let h = DMatrix::zeros(2, 2);
        let s = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(QuadraticForm::new(h, s), Err(FormError::NotSymmetric(_))));
    }

    #[test]
    fn json_round_trip() {
        let q = QuadraticForm::diagonal(&[1.0, -1.0]);
        let j = QuadraticFormJson::from(&q);
        let back = QuadraticForm::try_from(&j).unwrap();
        assert_eq!(back, q);
    }
}
