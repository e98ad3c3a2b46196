//! Finite-difference Wirtinger and real calculus on scalar fields over `C^n`.
//!
//! Everything here is oracle-only: a [`ScalarField`] is a black-box callable
//! and all derivatives come from central differences. Two stencils are
//! offered; the default step depends on the derivative order and stencil so
//! that truncation and round-off errors are roughly balanced.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::ComplexVec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalcError {
    #[error("non-finite sample of the scalar field near {point:?}")]
    NonFiniteSample { point: ComplexVec },
    #[error("gradient norm {grad_norm:e} is below the critical-point floor {floor:e}")]
    CriticalPointOfAlpha { grad_norm: f64, floor: f64 },
    #[error("difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

type Eval = dyn Fn(&ComplexVec) -> f64 + Send + Sync;
type Hint = dyn Fn(&ComplexVec) -> bool + Send + Sync;

/// A real-valued function of `C^n` (viewed as `R^{2n}`).
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<Eval>,
    domain_hint: Option<Arc<Hint>>,
    label: Option<String>,
}

impl ScalarField {
    pub fn new(f: impl Fn(&ComplexVec) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            domain_hint: None,
            label: None,
        }
    }

    /// Attach a predicate describing where `eval` is meaningful.
    pub fn with_domain(mut self, hint: impl Fn(&ComplexVec) -> bool + Send + Sync + 'static) -> Self {
        self.domain_hint = Some(Arc::new(hint));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    #[inline]
    pub fn eval(&self, p: &ComplexVec) -> f64 {
        (self.eval)(p)
    }

    /// `true` when no hint was attached.
    pub fn in_domain(&self, p: &ComplexVec) -> bool {
        self.domain_hint.as_ref().is_none_or(|h| h(p))
    }

    /// `s * self`.
    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.clone();
        let mut out = ScalarField::new(move |p| s * inner.eval(p));
        out.domain_hint = self.domain_hint.clone();
        out
    }

    /// `self ∘ lin`, for a real-affine reparametrisation supplied as a point map.
    pub fn compose(&self, map: impl Fn(&ComplexVec) -> ComplexVec + Send + Sync + 'static) -> Self {
        let inner = self.clone();
        ScalarField::new(move |p| inner.eval(&map(p)))
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("has_domain_hint", &self.domain_hint.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Central2,
    #[default]
    Central4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DiffConfig {
    /// Fixed step; `None` selects the order-dependent default scaled by
    /// `max(1, |x_i|)` for real coordinate `i`.
    pub step: Option<f64>,
    pub scheme: Scheme,
}

impl DiffConfig {
    pub fn with_step(step: f64, scheme: Scheme) -> Self {
        Self {
            step: Some(step),
            scheme,
        }
    }

    /// Step used along real coordinate `i` for a derivative of the given order at `p`.
    pub fn step_for(&self, order: u8, p: &ComplexVec, i: usize) -> Result<f64, CalcError> {
        check_index(p, i)?;
        let h = match self.step {
            Some(h) => h,
            None => {
                let base = match (order, self.scheme) {
                    (1, Scheme::Central2) => 1e-5,
                    (1, Scheme::Central4) => 1e-3,
                    (_, Scheme::Central2) => 1e-4,
                    (_, Scheme::Central4) => 2e-3,
                };
                base * p.real(i).abs().max(1.0)
            }
        };
        if h > 0.0 && h.is_finite() {
            Ok(h)
        } else {
            Err(CalcError::InvalidStep(h))
        }
    }
}

/// Values the stencils can combine: real or complex samples.
pub trait Sample: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn finite(&self) -> bool;
}

impl Sample for f64 {
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl Sample for Complex64 {
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

fn checked<T: Sample>(f: &impl Fn(&ComplexVec) -> T, p: &ComplexVec) -> Result<T, CalcError> {
    let v = f(p);
    if v.finite() {
        Ok(v)
    } else {
        Err(CalcError::NonFiniteSample { point: p.clone() })
    }
}

fn check_index(p: &ComplexVec, i: usize) -> Result<(), CalcError> {
    if i < p.real_dim() {
        Ok(())
    } else {
        Err(CalcError::IndexOutOfRange {
            index: i,
            dim: p.real_dim(),
        })
    }
}

/// First partial derivative along real coordinate `i` with an explicit step.
pub fn partial_with<T: Sample>(
    f: &impl Fn(&ComplexVec) -> T,
    p: &ComplexVec,
    i: usize,
    h: f64,
    scheme: Scheme,
) -> Result<T, CalcError> {
    check_index(p, i)?;
    let at = |d: f64| checked(f, &p.shifted(i, d));
    Ok(match scheme {
        Scheme::Central2 => (at(h)? - at(-h)?) * (0.5 / h),
        Scheme::Central4 => {
            ((at(h)? - at(-h)?) * 8.0 - (at(2.0 * h)? - at(-2.0 * h)?)) * (1.0 / (12.0 * h))
        }
    })
}

/// Second partial derivative along real coordinates `i`, `j` with an explicit step.
pub fn second_partial_with<T: Sample>(
    f: &impl Fn(&ComplexVec) -> T,
    p: &ComplexVec,
    i: usize,
    j: usize,
    h: f64,
    scheme: Scheme,
) -> Result<T, CalcError> {
    second_partial_steps(f, p, (i, h), (j, h), scheme)
}

/// Like [`second_partial_with`] with separate steps along `i` and `j`
/// (the step of `i` is used when `i == j`).
pub fn second_partial_steps<T: Sample>(
    f: &impl Fn(&ComplexVec) -> T,
    p: &ComplexVec,
    (i, h): (usize, f64),
    (j, k): (usize, f64),
    scheme: Scheme,
) -> Result<T, CalcError> {
    check_index(p, i)?;
    check_index(p, j)?;
    if i == j {
        let at = |d: f64| checked(f, &p.shifted(i, d));
        let centre = checked(f, p)?;
        return Ok(match scheme {
            Scheme::Central2 => (at(h)? + at(-h)? - centre * 2.0) * (1.0 / (h * h)),
            Scheme::Central4 => {
                ((at(h)? + at(-h)?) * 16.0 - (at(2.0 * h)? + at(-2.0 * h)?) - centre * 30.0)
                    * (1.0 / (12.0 * h * h))
            }
        });
    }
    let at = |di: f64, dj: f64| checked(f, &p.shifted(i, di).shifted(j, dj));
    Ok(match scheme {
        Scheme::Central2 => {
            (at(h, k)? - at(h, -k)? - at(-h, k)? + at(-h, -k)?) * (1.0 / (4.0 * h * k))
        }
        Scheme::Central4 => {
            const OFFSETS: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
            let mut acc: Option<T> = None;
            for &(oi, wi) in &OFFSETS {
                for &(oj, wj) in &OFFSETS {
                    let term = at(oi * h, oj * k)? * (wi * wj);
                    acc = Some(match acc {
                        Some(a) => a + term,
                        None => term,
                    });
                }
            }
            acc.expect("stencil is non-empty") * (1.0 / (144.0 * h * k))
        }
    })
}

pub fn partial(f: &ScalarField, p: &ComplexVec, i: usize, cfg: &DiffConfig) -> Result<f64, CalcError> {
    let h = cfg.step_for(1, p, i)?;
    partial_with(&|q: &ComplexVec| f.eval(q), p, i, h, cfg.scheme)
}

/// Real gradient in interleaved order, length `2n`.
pub fn gradient(f: &ScalarField, p: &ComplexVec, cfg: &DiffConfig) -> Result<Vec<f64>, CalcError> {
    (0..p.real_dim()).map(|i| partial(f, p, i, cfg)).collect()
}

/// Gradient packed as a complex vector: component `k` is `f_{x_k} + i f_{y_k}`.
pub fn gradient_complex(f: &ScalarField, p: &ComplexVec, cfg: &DiffConfig) -> Result<ComplexVec, CalcError> {
    Ok(ComplexVec::from_real(&gradient(f, p, cfg)?))
}

/// Real Hessian, `2n x 2n`, interleaved order.
pub fn hessian(f: &ScalarField, p: &ComplexVec, cfg: &DiffConfig) -> Result<DMatrix<f64>, CalcError> {
    let g = |q: &ComplexVec| f.eval(q);
    let m = p.real_dim();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = second_partial_steps(&g, p, (i, cfg.step_for(2, p, i)?), (j, cfg.step_for(2, p, j)?), cfg.scheme)?;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// `∂f/∂z_k = (f_x - i f_y) / 2`.
pub fn wirtinger_dz(f: &ScalarField, p: &ComplexVec, k: usize, cfg: &DiffConfig) -> Result<Complex64, CalcError> {
    let fx = partial(f, p, 2 * k, cfg)?;
    let fy = partial(f, p, 2 * k + 1, cfg)?;
    Ok(Complex64::new(0.5 * fx, -0.5 * fy))
}

/// `∂f/∂z̄_k = (f_x + i f_y) / 2`.
pub fn wirtinger_dzbar(f: &ScalarField, p: &ComplexVec, k: usize, cfg: &DiffConfig) -> Result<Complex64, CalcError> {
    Ok(wirtinger_dz(f, p, k, cfg)?.conj())
}

/// `∂g/∂z_k` for a complex-valued `g`, explicit step.
pub fn wirtinger_dz_complex(
    g: &impl Fn(&ComplexVec) -> Complex64,
    p: &ComplexVec,
    k: usize,
    h: f64,
    scheme: Scheme,
) -> Result<Complex64, CalcError> {
    let gx = partial_with(g, p, 2 * k, h, scheme)?;
    let gy = partial_with(g, p, 2 * k + 1, h, scheme)?;
    Ok((gx - Complex64::i() * gy) * 0.5)
}

/// `∂g/∂z̄_k` for a complex-valued `g`, explicit step.
pub fn wirtinger_dzbar_complex(
    g: &impl Fn(&ComplexVec) -> Complex64,
    p: &ComplexVec,
    k: usize,
    h: f64,
    scheme: Scheme,
) -> Result<Complex64, CalcError> {
    let gx = partial_with(g, p, 2 * k, h, scheme)?;
    let gy = partial_with(g, p, 2 * k + 1, h, scheme)?;
    Ok((gx + Complex64::i() * gy) * 0.5)
}

/// `∂²f/∂z_k∂z̄_k` obtained by nesting two first-order Wirtinger stencils.
///
/// This never touches the second-difference stencils used by [`laplacian`],
/// so `4 * dz_dzbar` is an independent route to the Laplacian in `n = 1`.
pub fn dz_dzbar_nested(f: &ScalarField, p: &ComplexVec, k: usize, cfg: &DiffConfig) -> Result<Complex64, CalcError> {
    let hx = cfg.step_for(1, p, 2 * k)?;
    let hy = cfg.step_for(1, p, 2 * k + 1)?;
    let inner = |q: &ComplexVec| -> Complex64 {
        let fx = partial_with(&|r: &ComplexVec| f.eval(r), q, 2 * k, hx, cfg.scheme);
        let fy = partial_with(&|r: &ComplexVec| f.eval(r), q, 2 * k + 1, hy, cfg.scheme);
        match (fx, fy) {
            (Ok(fx), Ok(fy)) => Complex64::new(0.5 * fx, -0.5 * fy),
            _ => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    let gx = partial_with(&inner, p, 2 * k, hx, cfg.scheme)?;
    let gy = partial_with(&inner, p, 2 * k + 1, hy, cfg.scheme)?;
    Ok((gx + Complex64::i() * gy) * 0.5)
}

/// Sum of the unmixed second differences over all `2n` real coordinates.
pub fn laplacian(f: &ScalarField, p: &ComplexVec, cfg: &DiffConfig) -> Result<f64, CalcError> {
    let g = |q: &ComplexVec| f.eval(q);
    (0..p.real_dim())
        .map(|i| second_partial_with(&g, p, i, i, cfg.step_for(2, p, i)?, cfg.scheme))
        .sum()
}

/// Gradient floor below which [`obstruction_ratio`] declares a critical point.
pub const DEFAULT_GRADIENT_FLOOR: f64 = 1e-10;

/// `Δα / |∇α|²` at `p`.
pub fn obstruction_ratio(alpha: &ScalarField, p: &ComplexVec, cfg: &DiffConfig) -> Result<f64, CalcError> {
    obstruction_ratio_with_floor(alpha, p, cfg, DEFAULT_GRADIENT_FLOOR)
}

pub fn obstruction_ratio_with_floor(
    alpha: &ScalarField,
    p: &ComplexVec,
    cfg: &DiffConfig,
    floor: f64,
) -> Result<f64, CalcError> {
    let grad_sq: f64 = gradient(alpha, p, cfg)?.iter().map(|g| g * g).sum();
    let grad_norm = grad_sq.sqrt();
    if grad_norm < floor {
        return Err(CalcError::CriticalPointOfAlpha { grad_norm, floor });
    }
    Ok(laplacian(alpha, p, cfg)? / grad_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn z1(x: f64, y: f64) -> ComplexVec {
        ComplexVec::from_pairs(&[(x, y)])
    }

    fn y_over_x() -> ScalarField {
        ScalarField::new(|p| p[0].im / p[0].re)
    }

    #[test]
    fn dz_of_linear_function() {
        let f = ScalarField::new(|p| p[0].re);
        let d = wirtinger_dz(&f, &z1(0.0, 0.0), 0, &DiffConfig::default()).unwrap();
        assert_abs_diff_eq!(d.re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dz_of_modulus_squared_is_conjugate() {
        let f = ScalarField::new(|p| p.norm_sqr());
        let p = z1(0.7, -1.3);
        let cfg = DiffConfig::with_step(1e-4, Scheme::Central2);
        let d = wirtinger_dz(&f, &p, 0, &cfg).unwrap();
        assert!((d - p[0].conj()).norm() < 1e-8);
    }

    #[test]
    fn dz_of_y_over_x() {
        // α_x = -1, α_y = 1 at (1,1): (α_x - iα_y)/2 = -(1+i)/2
        let d = wirtinger_dz(&y_over_x(), &z1(1.0, 1.0), 0, &DiffConfig::default()).unwrap();
        assert!((d - Complex64::new(-0.5, -0.5)).norm() < 1e-9);
    }

    #[test]
    fn laplacian_examples() {
        let cfg = DiffConfig::default();
        let bowl = ScalarField::new(|p| p.norm_sqr());
        let harmonic = ScalarField::new(|p| (p[0] * p[0]).re);
        for &(x, y) in &[(0.0, 0.0), (1.5, -2.0), (-0.3, 0.9)] {
            assert_abs_diff_eq!(laplacian(&bowl, &z1(x, y), &cfg).unwrap(), 4.0, epsilon = 1e-6);
            assert_abs_diff_eq!(laplacian(&harmonic, &z1(x, y), &cfg).unwrap(), 0.0, epsilon = 1e-6);
        }
        // Δ(y/x) = 2y/x³
        assert_abs_diff_eq!(laplacian(&y_over_x(), &z1(1.0, 2.0), &cfg).unwrap(), 4.0, epsilon = 1e-6);
    }

    #[test]
    fn obstruction_ratio_examples() {
        let cfg = DiffConfig::default();
        let harmonic = ScalarField::new(|p| (p[0] * p[0]).re);
        assert_abs_diff_eq!(obstruction_ratio(&harmonic, &z1(1.0, 1.0), &cfg).unwrap(), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(obstruction_ratio(&y_over_x(), &z1(1.0, 1.0), &cfg).unwrap(), 1.0, epsilon = 1e-6);
        let (a, b) = (1.0, 2.0);
        let alpha = ScalarField::new(move |p| -b * p[0].re.ln() + a * p[0].im.ln());
        assert_abs_diff_eq!(obstruction_ratio(&alpha, &z1(1.0, 1.0), &cfg).unwrap(), 0.2, epsilon = 1e-6);
    }

    #[test]
    fn obstruction_ratio_scales_inversely() {
        let cfg = DiffConfig::default();
        let alpha = y_over_x();
        let p = z1(1.3, 0.4);
        let r1 = obstruction_ratio(&alpha, &p, &cfg).unwrap();
        let r2 = obstruction_ratio(&alpha.scaled(2.0), &p, &cfg).unwrap();
        assert_abs_diff_eq!(r2, r1 / 2.0, epsilon = 1e-8);
    }

    #[test]
    fn critical_point_is_reported() {
        let f = ScalarField::new(|p| p.norm_sqr());
        let err = obstruction_ratio(&f, &z1(0.0, 0.0), &DiffConfig::default()).unwrap_err();
        assert!(matches!(err, CalcError::CriticalPointOfAlpha { .. }));
    }

    #[test]
    fn non_finite_samples_are_errors() {
        let f = ScalarField::new(|p| 1.0 / p[0].re);
        let err = laplacian(&f, &z1(0.0, 0.0), &DiffConfig::with_step(1e-3, Scheme::Central2)).unwrap_err();
        assert!(matches!(err, CalcError::NonFiniteSample { .. }));
        let err = wirtinger_dz(&ScalarField::new(|_| f64::NAN), &z1(0.0, 0.0), 0, &DiffConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn invalid_step_rejected() {
        let f = ScalarField::new(|p| p[0].re);
        let cfg = DiffConfig::with_step(0.0, Scheme::Central2);
        assert_eq!(partial(&f, &z1(0.0, 0.0), 0, &cfg), Err(CalcError::InvalidStep(0.0)));
    }

    #[test]
    fn mixed_partials_match_exact_hessian() {
        // f = x1 y2 + 3 x1^2 - y1 x2
        let f = ScalarField::new(|p| p[0].re * p[1].im + 3.0 * p[0].re * p[0].re - p[0].im * p[1].re);
        let h = hessian(&f, &ComplexVec::from_pairs(&[(0.2, 0.1), (-0.4, 0.3)]), &DiffConfig::default()).unwrap();
        let mut exact = DMatrix::zeros(4, 4);
        exact[(0, 0)] = 6.0;
        exact[(0, 3)] = 1.0;
        exact[(3, 0)] = 1.0;
        exact[(1, 2)] = -1.0;
        exact[(2, 1)] = -1.0;
        assert!((h - exact).norm() < 1e-8);
    }
}
