//! Quasiholomorphicity tests: the conserved-ratio obstruction, antiholomorphic
//! factorisation, rectification of a leaf function to a harmonic one, and the
//! classifier for gradients of real quadratic forms.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{self, CalcError, DiffConfig, ScalarField, DEFAULT_GRADIENT_FLOOR};
use crate::domains::Window;
use crate::fields::{detect_period, sample_orbit, ComplexFn, FlowConfig, FlowError, PeriodConfig, VectorFieldSpec};
use crate::form::QuadraticForm;
use crate::types::ComplexVec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuasiholError {
    #[error("alpha is not conserved along the orbit of {seed:?}: relative defect {defect:e} at t = {t}")]
    NotConserved { seed: ComplexVec, t: f64, defect: f64 },
    #[error("|g| = {modulus:e} below the floor at {point}")]
    VanishingG { point: Complex64, modulus: f64 },
    #[error("alpha is not a submersion at {point:?} (|grad| = {grad_norm:e})")]
    NotSubmersion { point: ComplexVec, grad_norm: f64 },
    #[error("obstruction ratio varies by {max_deviation:e} on the level set alpha = {level}")]
    ObstructionNotLevelConstant { level: f64, max_deviation: f64 },
    #[error("quadratic form is degenerate: smallest |Hessian eigenvalue| = {min_abs_eigenvalue:e}")]
    DegenerateForm { min_abs_eigenvalue: f64 },
    #[error("coefficients must be nonzero, got a = {a}, b = {b}")]
    ZeroCoefficient { a: f64, b: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstancyConfig {
    /// An orbit is constant when the ratio varies by less than this.
    pub tol: f64,
    /// Bound on `|∇α·F| / (|∇α||F|)`.
    pub conservation_tol: f64,
    pub n_samples: usize,
    pub diff: DiffConfig,
    pub flow: FlowConfig,
}

impl Default for ConstancyConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            conservation_tol: 1e-6,
            n_samples: 101,
            diff: DiffConfig::default(),
            flow: FlowConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub seed: ComplexVec,
    pub times: Vec<f64>,
    pub points: Vec<ComplexVec>,
    pub ratios: Vec<f64>,
    pub variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub constant: bool,
    pub max_variation: f64,
    pub tol: f64,
    pub traces: Vec<OrbitTrace>,
}

/// Evaluates `Δα/|∇α|²` along orbits of `field`, after checking that `α` is conserved.
///
/// Samples outside `α`'s domain hint are dropped.
pub fn obstruction_constancy_test(
    field: &VectorFieldSpec,
    alpha: &ScalarField,
    seeds: &[ComplexVec],
    t_range: (f64, f64),
    cfg: &ConstancyConfig,
) -> Result<ConstancyReport, QuasiholError> {
    if seeds.is_empty() {
        return Err(QuasiholError::Invalid("no seeds".into()));
    }
    let mut traces = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let traj = sample_orbit(field, seed, t_range.0, t_range.1, cfg.n_samples, &cfg.flow)?;
        let mut trace = OrbitTrace {
            seed: seed.clone(),
            times: Vec::new(),
            points: Vec::new(),
            ratios: Vec::new(),
            variation: 0.0,
        };
        for (&t, p) in traj.times.iter().zip(&traj.points) {
            if !alpha.in_domain(p) {
                continue;
            }
            let grad = calculus::gradient_complex(alpha, p, &cfg.diff)?;
            let v = field.eval(p)?;
            let scale = grad.norm() * v.norm();
            if scale > 0.0 {
                let defect = grad.real_dot(&v).abs() / scale;
                if defect > cfg.conservation_tol {
                    return Err(QuasiholError::NotConserved {
                        seed: seed.clone(),
                        t,
                        defect,
                    });
                }
            }
            trace.ratios.push(calculus::obstruction_ratio(alpha, p, &cfg.diff)?);
            trace.times.push(t);
            trace.points.push(p.clone());
        }
        let (lo, hi) = trace
            .ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        trace.variation = if trace.ratios.is_empty() { 0.0 } else { hi - lo };
        traces.push(trace);
    }
    let max_variation = traces.iter().map(|t| t.variation).fold(0.0, f64::max);
    Ok(ConstancyReport {
        constant: max_variation < cfg.tol,
        max_variation,
        tol: cfg.tol,
        traces,
    })
}

/// `ḡ ∂/∂z = |g|² · (1/g) ∂/∂z`.
pub struct Factorization {
    pub positive_factor: ScalarField,
    pub holomorphic_field: VectorFieldSpec,
    pub max_identity_residual: f64,
}

pub const G_FLOOR: f64 = 1e-10;

pub fn antiholomorphic_factorization(g: ComplexFn, samples: &[Complex64]) -> Result<Factorization, QuasiholError> {
    let mut residual: f64 = 0.0;
    for &z in samples {
        let gz = g(z);
        if !(gz.norm() > G_FLOOR) {
            return Err(QuasiholError::VanishingG {
                point: z,
                modulus: gz.norm(),
            });
        }
        residual = residual.max((gz.conj() - gz.norm_sqr() * gz.inv()).norm());
    }
    let g_mod = g.clone();
    let positive_factor = ScalarField::new(move |p| g_mod(p[0]).norm_sqr()).with_label("|g|^2");
    let g_inv = g.clone();
    let holomorphic_field = VectorFieldSpec::holomorphic(1, "1/g", move |p| ComplexVec(vec![g_inv(p[0]).inv()]));
    Ok(Factorization {
        positive_factor,
        holomorphic_field,
        max_identity_residual: residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessReport {
    /// Seeds with a detected period.
    pub periodic: Vec<(ComplexVec, f64)>,
    pub t_max: f64,
    /// A compact orbit rules out quasiholomorphicity of the induced foliation.
    pub non_quasiholomorphic: bool,
}

/// Searches for compact orbits of `ḡ ∂/∂z` through the given seeds.
pub fn antiholomorphic_compactness(
    g: ComplexFn,
    seeds: &[Complex64],
    t_max: f64,
    cfg: &PeriodConfig,
) -> Result<CompactnessReport, QuasiholError> {
    let field = VectorFieldSpec::Antiholomorphic { g, label: "g".into() };
    let mut periodic = Vec::new();
    for &z in seeds {
        let p = ComplexVec(vec![z]);
        if let Some(t) = detect_period(&field, &p, t_max, cfg)? {
            periodic.push((p, t));
        }
    }
    Ok(CompactnessReport {
        non_quasiholomorphic: !periodic.is_empty(),
        periodic,
        t_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectifyConfig {
    /// Grid points per axis for the submersion check and residual.
    pub grid: usize,
    /// Starting points per axis for the level-set projections.
    pub probe_grid: usize,
    pub n_levels: usize,
    /// Allowed spread of the ratio on a level set, relative to `max(1, |u|)`.
    pub constancy_tol: f64,
    pub gradient_floor: f64,
    pub diff: DiffConfig,
}

impl Default for RectifyConfig {
    fn default() -> Self {
        Self {
            grid: 101,
            probe_grid: 11,
            n_levels: 2001,
            constancy_tol: 1e-3,
            gradient_floor: DEFAULT_GRADIENT_FLOOR,
            diff: DiffConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Profiles {
    levels: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

impl Profiles {
    /// Quintic Hermite interpolation of `w` using `w' = e^{-v}`, `w'' = −u e^{-v}`.
    fn w_at(&self, level: f64) -> f64 {
        let n = self.levels.len();
        let (lo, hi) = (self.levels[0], self.levels[n - 1]);
        let h = (hi - lo) / (n - 1) as f64;
        let k = (((level - lo) / h).floor().max(0.0) as usize).min(n - 2);
        let s = (level - self.levels[k]) / h;
        let d = |i: usize| {
            let e = (-self.v[i]).exp();
            (self.w[i], e * h, -self.u[i] * e * h * h)
        };
        let (p0, m0, a0) = d(k);
        let (p1, m1, a1) = d(k + 1);
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
        let h3 = 0.5 * s3 - s4 + 0.5 * s5;
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        h0 * p0 + h1 * m0 + h2 * a0 + h3 * a1 + h4 * m1 + h5 * p1
    }
}

pub struct RectificationResult {
    pub levels: Vec<f64>,
    pub u: Vec<f64>,
    /// Spread of the ratio over the projected points of each level.
    pub u_std: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// `w ∘ α`.
    pub harmonic_integral: ScalarField,
    /// Max of `|Δ(w ∘ α)|` over the grid.
    pub residual: f64,
    pub injectivity_ok: bool,
    pub window: Window,
    pub level_range: (f64, f64),
}

impl RectificationResult {
    /// Quadrature tables as CSV with a one-line header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,u,u_std,v,w\n");
        for i in 0..self.levels.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.levels[i], self.u[i], self.u_std[i], self.v[i], self.w[i]
            );
        }
        out
    }
}

fn grid_points(window: &Window, n: usize) -> Vec<ComplexVec> {
    let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(ComplexVec::from_pairs(&[(at(window.x.0, window.x.1, i), at(window.y.0, window.y.1, j))]));
        }
    }
    out
}

fn in_window(p: &ComplexVec, w: &Window) -> bool {
    let (x, y) = (p[0].re, p[0].im);
    w.x.0 <= x && x <= w.x.1 && w.y.0 <= y && y <= w.y.1
}

/// Newton projection onto `{α = level}` along `∇α`.
fn project(alpha: &ScalarField, start: &ComplexVec, level: f64, diff: &DiffConfig) -> Option<ComplexVec> {
    let mut p = start.clone();
    for _ in 0..30 {
        let r = level - alpha.eval(&p);
        if r.abs() <= 1e-13 * (1.0 + level.abs()) {
            return Some(p);
        }
        let g = calculus::gradient_complex(alpha, &p, diff).ok()?;
        let gn = g.norm_sqr();
        if !(gn > 0.0) {
            return None;
        }
        p = p.axpy(r / gn, &g);
        if !p.is_finite() || !alpha.in_domain(&p) {
            return None;
        }
    }
    None
}

/// Cumulative integral on a uniform grid: trapezoid with the endpoint
/// derivative correction `−h²/12 (f'(x) − f'(a))`, anchored to zero at `anchor`.
fn cumulative(f: &[f64], df: &[f64], h: f64, anchor: usize) -> Vec<f64> {
    let n = f.len();
    let mut raw = vec![0.0; n];
    for i in 1..n {
        raw[i] = raw[i - 1] + 0.5 * h * (f[i - 1] + f[i]) - h * h / 12.0 * (df[i] - df[i - 1]);
    }
    let shift = raw[anchor];
    raw.iter().map(|r| r - shift).collect()
}

fn diff_table(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| match i {
            0 => (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h),
            _ if i == n - 1 => (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h),
            _ => (f[i + 1] - f[i - 1]) / (2.0 * h),
        })
        .collect()
}

/// Builds `w` with `w'' = −u w'` from the level-constant ratio `u ∘ α = Δα/|∇α|²`,
/// so that `w ∘ α` is harmonic with the same level sets as `α`.
pub fn rectify(
    alpha: &ScalarField,
    window: &Window,
    level_range: Option<(f64, f64)>,
    cfg: &RectifyConfig,
) -> Result<RectificationResult, QuasiholError> {
    if cfg.grid < 3 || cfg.n_levels < 3 || cfg.probe_grid < 2 {
        return Err(QuasiholError::Invalid("grid sizes too small".into()));
    }
    let grid = grid_points(window, cfg.grid);
    let mut alphas = Vec::with_capacity(grid.len());
    let mut ratios = Vec::with_capacity(grid.len());
    for p in &grid {
        let g = calculus::gradient_complex(alpha, p, &cfg.diff)?.norm();
        if !(g > cfg.gradient_floor) {
            return Err(QuasiholError::NotSubmersion {
                point: p.clone(),
                grad_norm: g,
            });
        }
        alphas.push(alpha.eval(p));
        ratios.push(calculus::obstruction_ratio(alpha, p, &cfg.diff)?);
    }
    let (lo, hi) = level_range.unwrap_or_else(|| {
        alphas
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    });
    if !(lo < hi) {
        return Err(QuasiholError::Invalid(format!("empty level range [{lo}, {hi}]")));
    }
    let n = cfg.n_levels;
    let h = (hi - lo) / (n - 1) as f64;
    let levels: Vec<f64> = (0..n).map(|k| lo + h * k as f64).collect();

    // u per level from points projected onto the level set
    let probes = grid_points(window, cfg.probe_grid);
    let mut u = vec![f64::NAN; n];
    let mut u_std = vec![f64::NAN; n];
    for (k, &level) in levels.iter().enumerate() {
        let mut vals = Vec::new();
        for start in &probes {
            if let Some(q) = project(alpha, start, level, &cfg.diff) {
                if in_window(&q, window) {
                    vals.push(calculus::obstruction_ratio(alpha, &q, &cfg.diff)?);
                }
            }
        }
        if vals.is_empty() {
            continue;
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let max_dev = vals.iter().map(|b| (b - mean).abs()).fold(0.0, f64::max);
        if max_dev > cfg.constancy_tol * mean.abs().max(1.0) {
            return Err(QuasiholError::ObstructionNotLevelConstant { level, max_deviation: max_dev });
        }
        u[k] = mean;
        u_std[k] = (vals.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
    }
    fill_gaps(&mut u)?;
    for s in u_std.iter_mut().filter(|s| s.is_nan()) {
        *s = 0.0;
    }

    let anchor = ((0.0f64.clamp(lo, hi) - lo) / h).round() as usize;
    let v = cumulative(&u, &diff_table(&u, h), h, anchor);
    let wp: Vec<f64> = v.iter().map(|v| (-v).exp()).collect();
    let wpp: Vec<f64> = u.iter().zip(&wp).map(|(u, e)| -u * e).collect();
    let w = cumulative(&wp, &wpp, h, anchor);
    let injectivity_ok = w.windows(2).all(|p| p[1] > p[0]);

    // grid check: the ratio is a function of α
    let profiles = Arc::new(Profiles { levels: levels.clone(), u: u.clone(), v: v.clone(), w: w.clone() });
    let lookup = |a: f64| {
        let x = ((a - lo) / h).clamp(0.0, (n - 1) as f64);
        let k = (x.floor() as usize).min(n - 2);
        u[k] + (u[k + 1] - u[k]) * (x - k as f64)
    };
    for (&a, &b) in alphas.iter().zip(&ratios) {
        if a < lo || a > hi {
            continue;
        }
        let dev = (b - lookup(a)).abs();
        if dev > cfg.constancy_tol * b.abs().max(1.0) {
            return Err(QuasiholError::ObstructionNotLevelConstant { level: a, max_deviation: dev });
        }
    }

    let alpha_c = alpha.clone();
    let prof = profiles.clone();
    let harmonic_integral = ScalarField::new(move |p| prof.w_at(alpha_c.eval(p))).with_label("w(alpha)");
    let mut residual: f64 = 0.0;
    for p in &grid {
        let a = alpha.eval(p);
        if a < lo || a > hi {
            continue;
        }
        residual = residual.max(calculus::laplacian(&harmonic_integral, p, &cfg.diff)?.abs());
    }

    Ok(RectificationResult {
        levels,
        u,
        u_std,
        v,
        w,
        harmonic_integral,
        residual,
        injectivity_ok,
        window: *window,
        level_range: (lo, hi),
    })
}

/// Linear interpolation over levels that no projection reached.
fn fill_gaps(u: &mut [f64]) -> Result<(), QuasiholError> {
    let known: Vec<usize> = (0..u.len()).filter(|&i| u[i].is_finite()).collect();
    if known.is_empty() {
        return Err(QuasiholError::Invalid("no level set met the window".into()));
    }
    for i in 0..u.len() {
        if u[i].is_finite() {
            continue;
        }
        let right = known.partition_point(|&k| k < i);
        u[i] = match (right.checked_sub(1).map(|l| known[l]), known.get(right)) {
            (Some(a), Some(&b)) => u[a] + (u[b] - u[a]) * (i - a) as f64 / (b - a) as f64,
            (Some(a), None) => u[a],
            (None, Some(&b)) => u[b],
            (None, None) => unreachable!(),
        };
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassVerdict {
    /// `S = 0`: `∇σ` is complex-linear.
    HermitianCase,
    /// `n = 1`, `H = 0`: `σ = Re(a z²)`.
    HarmonicN1Case,
    Incompatible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEvidence {
    pub n: usize,
    pub rank_s: usize,
    pub hermitian_nullity: usize,
    pub norm_s: f64,
    pub norm_h: f64,
    pub min_abs_hessian_eigenvalue: f64,
    pub max_abs_hessian_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierVerdict {
    pub verdict: ClassVerdict,
    pub evidence: ClassEvidence,
}

pub const NONDEGENERACY_FLOOR: f64 = 1e-9;
pub const ZERO_PART_TOL: f64 = 1e-12;

fn rank(a: &DMatrix<Complex64>, tol: f64) -> usize {
    a.clone().svd(false, false).singular_values.iter().filter(|&&s| s > tol).count()
}

/// Which case of the dichotomy for `u∇σ` holomorphic a nondegenerate form falls in.
pub fn classify_quadratic_gradient(q: &QuadraticForm) -> Result<ClassifierVerdict, QuasiholError> {
    let eig = SymmetricEigen::new(q.real_hessian()).eigenvalues;
    let min_abs = eig.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    let max_abs = eig.iter().map(|e| e.abs()).fold(0.0, f64::max);
    if !(min_abs > NONDEGENERACY_FLOOR) {
        return Err(QuasiholError::DegenerateForm { min_abs_eigenvalue: min_abs });
    }
    let h = q.hermitian_part();
    let s = q.harmonic_part();
    let norm_s = s.norm();
    let norm_h = h.norm();
    let h_eig = SymmetricEigen::new(h.clone()).eigenvalues;
    let evidence = ClassEvidence {
        n: q.dim(),
        rank_s: rank(s, ZERO_PART_TOL),
        hermitian_nullity: h_eig.iter().filter(|e| e.abs() < ZERO_PART_TOL).count(),
        norm_s,
        norm_h,
        min_abs_hessian_eigenvalue: min_abs,
        max_abs_hessian_eigenvalue: max_abs,
    };
    let verdict = if norm_s < ZERO_PART_TOL {
        ClassVerdict::HermitianCase
    } else if q.dim() == 1 && norm_h < ZERO_PART_TOL {
        ClassVerdict::HarmonicN1Case
    } else {
        ClassVerdict::Incompatible
    };
    Ok(ClassifierVerdict { verdict, evidence })
}

/// `a x ∂/∂x + b y ∂/∂y` induces a quasiholomorphic foliation iff `a = ±b`.
pub fn reallinear_quasihol_test(a: f64, b: f64) -> Result<bool, QuasiholError> {
    if a == 0.0 || b == 0.0 {
        return Err(QuasiholError::ZeroCoefficient { a, b });
    }
    Ok((a - b).abs() <= 1e-12 || (a + b).abs() <= 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{scalar_field, FnRef};
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radial_field_with_slope_is_constant() {
        let field = VectorFieldSpec::real_linear_diag(1.0, 1.0).unwrap();
        let alpha = scalar_field(&FnRef::new("y_over_x", &[])).unwrap();
        let seeds: Vec<_> = [-0.8, 0.0, 0.5, 1.5].iter().map(|&y| ComplexVec::from_pairs(&[(1.0, y)])).collect();
        let r = obstruction_constancy_test(&field, &alpha, &seeds, (-1.0, 1.0), &ConstancyConfig::default()).unwrap();
        assert!(r.constant, "{}", r.max_variation);
        // β = 2k/(1+k²) on the ray y = kx
        let k: f64 = 0.5;
        assert!((r.traces[2].ratios[0] - 2.0 * k / (1.0 + k * k)).abs() < 1e-8);
    }

    #[test]
    fn unequal_rates_vary() {
        let field = VectorFieldSpec::real_linear_diag(1.0, 2.0).unwrap();
        let alpha = scalar_field(&FnRef::new("real_linear_invariant", &[1.0, 2.0])).unwrap();
        let seeds = vec![ComplexVec::from_pairs(&[(1.0, 1.0)])];
        let cfg = ConstancyConfig {
            n_samples: 2,
            ..ConstancyConfig::default()
        };
        let r = obstruction_constancy_test(&field, &alpha, &seeds, (0.0, std::f64::consts::LN_2), &cfg).unwrap();
        assert!(!r.constant);
        assert!((r.traces[0].ratios[0] - 0.2).abs() < 1e-6);
        assert!((r.traces[0].ratios[1] - 7.0 / 17.0).abs() < 1e-6);
    }

    #[test]
    fn non_conserved_alpha_is_rejected() {
        let field = VectorFieldSpec::real_linear_diag(1.0, 2.0).unwrap();
        let alpha = scalar_field(&FnRef::new("y_over_x", &[])).unwrap();
        let seeds = vec![ComplexVec::from_pairs(&[(1.0, 1.0)])];
        let e = obstruction_constancy_test(&field, &alpha, &seeds, (-0.5, 0.5), &ConstancyConfig::default()).unwrap_err();
        assert!(matches!(e, QuasiholError::NotConserved { .. }));
    }

    #[test]
    fn harmonic_level_function_gives_zero() {
        // leaves of ∂/∂x are the level sets of y
        let field = VectorFieldSpec::holomorphic(1, "dx", |_| ComplexVec::from_reals(&[1.0]));
        let alpha = scalar_field(&FnRef::new("y", &[])).unwrap();
        let r = obstruction_constancy_test(&field, &alpha, &[ComplexVec::from_pairs(&[(0.0, 0.3)])], (-1.0, 1.0), &ConstancyConfig::default())
            .unwrap();
        assert!(r.constant);
        assert!(r.traces[0].ratios.iter().all(|b| b.abs() < 1e-9));
    }

    #[test]
    fn factorisations() {
        let annulus: Vec<Complex64> = (0..40)
            .map(|k| Complex64::from_polar(0.5 + 1.5 * (k % 5) as f64 / 4.0, TAU * k as f64 / 40.0))
            .collect();
        let f = antiholomorphic_factorization(Arc::new(|_| c(1.0, 0.0)), &annulus).unwrap();
        assert_eq!(f.max_identity_residual, 0.0);
        assert_eq!(f.positive_factor.eval(&ComplexVec::from_reals(&[3.0])), 1.0);
        let f = antiholomorphic_factorization(Arc::new(|z| z), &annulus).unwrap();
        assert!(f.max_identity_residual < 1e-12);
        let v = f.holomorphic_field.eval(&ComplexVec::from_pairs(&[(0.0, 2.0)])).unwrap();
        assert!((v[0] - c(0.0, -0.5)).norm() < 1e-15);
        assert!(matches!(
            antiholomorphic_factorization(Arc::new(|z| z), &[c(0.0, 0.0)]),
            Err(QuasiholError::VanishingG { .. })
        ));
    }

    #[test]
    fn grad_arg_has_compact_orbits() {
        let g: ComplexFn = Arc::new(|z: Complex64| -Complex64::i() / z);
        let r = antiholomorphic_compactness(g, &[c(1.0, 0.0), c(0.0, 0.5)], 10.0, &PeriodConfig::default()).unwrap();
        assert!(r.non_quasiholomorphic);
        assert_eq!(r.periodic.len(), 2);
        assert!((r.periodic[0].1 - TAU).abs() < 1e-6);
        let r = antiholomorphic_compactness(Arc::new(|z| z), &[c(1.0, 0.3)], 10.0, &PeriodConfig::default()).unwrap();
        assert!(!r.non_quasiholomorphic);
    }

    fn small_cfg() -> RectifyConfig {
        RectifyConfig {
            grid: 21,
            n_levels: 401,
            ..RectifyConfig::default()
        }
    }

    #[test]
    fn rectify_horizontal_and_vertical_leaves() {
        let window = Window { x: (-1.0, 1.0), y: (-1.0, 1.0) };
        for name in ["y", "x"] {
            let alpha = scalar_field(&FnRef::new(name, &[])).unwrap();
            let r = rectify(&alpha, &window, None, &small_cfg()).unwrap();
            assert!(r.residual < 1e-8);
            assert!(r.u.iter().all(|u| u.abs() < 1e-9));
            let p = ComplexVec::from_pairs(&[(0.3, -0.7)]);
            assert!((r.harmonic_integral.eval(&p) - alpha.eval(&p)).abs() < 1e-9);
        }
    }

    #[test]
    fn rectify_slope_gives_arctan() {
        let window = Window { x: (0.5, 2.0), y: (-1.0, 1.0) };
        let alpha = scalar_field(&FnRef::new("y_over_x", &[])).unwrap();
        let r = rectify(&alpha, &window, None, &small_cfg()).unwrap();
        assert!(r.injectivity_ok);
        assert!(r.residual < 1e-4, "{}", r.residual);
        for (&k, (&u, &v)) in r.levels.iter().zip(r.u.iter().zip(&r.v)).step_by(37) {
            assert!((u - 2.0 * k / (1.0 + k * k)).abs() < 1e-6);
            assert!((v - (1.0 + k * k).ln()).abs() < 1e-6);
        }
        let p = ComplexVec::from_pairs(&[(1.2, 0.7)]);
        assert!((r.harmonic_integral.eval(&p) - (0.7f64 / 1.2).atan()).abs() < 1e-6);
        assert!(r.to_csv().starts_with("level,u,u_std,v,w\n"));
    }

    #[test]
    fn rectify_rejects_non_level_constant_ratio() {
        // α = x² + y³ has level sets on which the ratio is not constant
        let alpha = ScalarField::new(|p| p[0].re * p[0].re + p[0].im.powi(3) + 3.0 * p[0].im);
        let window = Window { x: (0.5, 1.5), y: (-1.0, 1.0) };
        let e = rectify(&alpha, &window, None, &small_cfg()).err().unwrap();
        assert!(matches!(e, QuasiholError::ObstructionNotLevelConstant { .. }), "{e}");
    }

    #[test]
    fn rectify_rejects_critical_points() {
        let alpha = scalar_field(&FnRef::new("abs_sq", &[])).unwrap();
        let window = Window { x: (-1.0, 1.0), y: (-1.0, 1.0) };
        assert!(matches!(rectify(&alpha, &window, None, &small_cfg()), Err(QuasiholError::NotSubmersion { .. })));
    }

    #[test]
    fn classifier_examples() {
        let q = QuadraticForm::diagonal(&[1.0, -1.0]);
        assert_eq!(classify_quadratic_gradient(&q).unwrap().verdict, ClassVerdict::HermitianCase);
        let one = DMatrix::from_element(1, 1, c(1.0, 0.0));
        let zero = DMatrix::zeros(1, 1);
        let q = QuadraticForm::new(zero.clone(), one.clone()).unwrap();
        let v = classify_quadratic_gradient(&q).unwrap();
        assert_eq!(v.verdict, ClassVerdict::HarmonicN1Case);
        assert_eq!(v.evidence.rank_s, 1);
        assert_eq!(v.evidence.hermitian_nullity, 1);
        let q = QuadraticForm::new(DMatrix::from_element(1, 1, c(2.0, 0.0)), one.clone()).unwrap();
        assert_eq!(classify_quadratic_gradient(&q).unwrap().verdict, ClassVerdict::Incompatible);
        // |b| = a makes σ degenerate
        let q = QuadraticForm::new(one.clone(), one).unwrap();
        assert!(matches!(classify_quadratic_gradient(&q), Err(QuasiholError::DegenerateForm { .. })));
    }

    #[test]
    fn reallinear_truth_table() {
        assert!(reallinear_quasihol_test(1.0, 1.0).unwrap());
        assert!(reallinear_quasihol_test(1.0, -1.0).unwrap());
        assert!(!reallinear_quasihol_test(1.0, 2.0).unwrap());
        assert!(reallinear_quasihol_test(0.0, 2.0).is_err());
    }
}
