//! Named built-in functions, so that JSON inputs can refer to callables.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::ScalarField;
use crate::fields::{ComplexFn, VectorFieldSpec};
use crate::types::ComplexVec;

/// A registry entry plus its numeric parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnRef {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl FnRef {
    pub fn new(name: impl Into<String>, params: &[f64]) -> Self {
        Self {
            name: name.into(),
            params: params.to_vec(),
        }
    }
}

fn param(params: &[f64], i: usize, name: &str) -> Result<f64, String> {
    params
        .get(i)
        .copied()
        .ok_or_else(|| format!("`{name}` needs parameter #{i}"))
}

fn saddle(p: &ComplexVec) -> f64 {
    p[0].norm_sqr() - p[1].norm_sqr()
}

pub const SCALAR_NAMES: &[&str] = &[
    "x",
    "y",
    "x2",
    "y_over_x",
    "re_z_squared",
    "abs_sq",
    "saddle",
    "saddle_cubic",
    "saddle_minus_cube",
    "real_linear_invariant",
];

/// Scalar fields by name.
///
/// `saddle_cubic[c]` is `|z₁|² − |z₂|² + c (|z₁|² + |z₂|²)^{3/2}`,
/// `saddle_minus_cube[c]` is `|z₁|² − |z₂|² − c (Re z₁)³` and
/// `real_linear_invariant[a, b]` is `−b log x + a log y` on the first quadrant.
pub fn scalar_field(r: &FnRef) -> Result<ScalarField, String> {
    let f = match r.name.as_str() {
        "x" => ScalarField::new(|p| p[0].re),
        "y" => ScalarField::new(|p| p[0].im),
        "x2" => ScalarField::new(|p| p[1].re),
        "y_over_x" => ScalarField::new(|p| p[0].im / p[0].re).with_domain(|p| p[0].re > 0.0),
        "re_z_squared" => ScalarField::new(|p| (p[0] * p[0]).re),
        "abs_sq" => ScalarField::new(|p| p.norm_sqr()),
        "saddle" => ScalarField::new(saddle),
        "saddle_cubic" => {
            let c = param(&r.params, 0, &r.name)?;
            ScalarField::new(move |p| saddle(p) + c * p.norm_sqr().powf(1.5))
        }
        "saddle_minus_cube" => {
            let c = param(&r.params, 0, &r.name)?;
            ScalarField::new(move |p| saddle(p) - c * p[0].re.powi(3))
        }
        "real_linear_invariant" => {
            let a = param(&r.params, 0, &r.name)?;
            let b = param(&r.params, 1, &r.name)?;
            ScalarField::new(move |p| -b * p[0].re.ln() + a * p[0].im.ln())
                .with_domain(|p| p[0].re > 0.0 && p[0].im > 0.0)
        }
        other => return Err(format!("unknown scalar field `{other}`; known: {}", SCALAR_NAMES.join(", "))),
    };
    Ok(f.with_label(r.name.clone()))
}

/// Holomorphic vector fields by name.
///
/// `f0_holomorphic` is `(1, 3z₁² − 1)` on `C²`; `constant[re, im, ...]` is a
/// constant field; `neg_dx` is `−∂/∂x` on `C`.
pub fn holomorphic_field(name: &str, params: &[f64]) -> Result<VectorFieldSpec, String> {
    Ok(match name {
        "f0_holomorphic" => VectorFieldSpec::holomorphic(2, name, |z| {
            ComplexVec(vec![Complex64::new(1.0, 0.0), 3.0 * z[0] * z[0] - 1.0])
        }),
        "neg_dx" => VectorFieldSpec::holomorphic(1, name, |_| ComplexVec::from_reals(&[-1.0])),
        "constant" => {
            if params.is_empty() || !params.len().is_multiple_of(2) {
                return Err("`constant` needs (re, im) pairs".into());
            }
            let v = ComplexVec::from_real(params);
            VectorFieldSpec::holomorphic(v.dim(), name, move |_| v.clone())
        }
        other => return Err(format!("unknown holomorphic field `{other}`")),
    })
}

/// Holomorphic functions of one variable by name, used as `g` in `ḡ ∂/∂z`.
///
/// `poly[c0, c1, ...]` has real coefficients in increasing degree.
pub fn holomorphic_scalar(name: &str, params: &[f64]) -> Result<ComplexFn, String> {
    Ok(match name {
        "one" => Arc::new(|_| Complex64::new(1.0, 0.0)),
        "z" => Arc::new(|z| z),
        "neg_i_over_z" => Arc::new(|z: Complex64| -Complex64::i() / z),
        "poly" => {
            if params.is_empty() {
                return Err("`poly` needs at least one coefficient".into());
            }
            let c = params.to_vec();
            Arc::new(move |z| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a))
        }
        other => return Err(format!("unknown holomorphic function `{other}`")),
    })
}
