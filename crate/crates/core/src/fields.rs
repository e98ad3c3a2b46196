//! Vector fields on `C^n`, their flows, leaf transport and periodic-orbit detection.
//!
//! A field is represented by its velocity packed as a complex vector: the real
//! field `Σ P_k ∂/∂x_k + Q_k ∂/∂y_k` is stored as `(P_k + i Q_k)_k`, so a
//! holomorphic field `F(z) ∂/∂z` integrates as the complex ODE `ż = F(z)`.
//!
//! Flows are exact wherever a closed form exists and fall back to classical
//! fourth-order Runge–Kutta with step-doubling error control otherwise.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{self, DiffConfig, ScalarField, Scheme};
use crate::form::QuadraticForm;
use crate::types::{complex_structure, ComplexVec};

/// Fields weaker than this are treated as equilibria.
pub const EQUILIBRIUM_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("trajectory left the ball of radius {r_max:e} at t = {t_reached}")]
    BlowUp { t_reached: f64, r_max: f64 },
    #[error("field could not be evaluated at {point:?}")]
    UndefinedAtPoint { point: ComplexVec },
    #[error("step size collapsed at t = {t_reached}")]
    StepCollapse { t_reached: f64 },
    #[error("exceeded {0} integration steps")]
    TooManySteps(usize),
    #[error("point has dimension {got}, field expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("segment {segment} carried sample {sample:?} out of its validity region at local time {time}")]
    SegmentEscape {
        segment: usize,
        sample: ComplexVec,
        time: f64,
    },
    #[error("seed is an equilibrium (speed {speed:e})")]
    EquilibriumSeed { speed: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type VectorFn = Arc<dyn Fn(&ComplexVec) -> ComplexVec + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// `coef * x1^i * x2^j` in the real parts of a point of `C^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub i: u32,
    pub j: u32,
}

impl Monomial {
    pub fn new(coef: f64, i: u32, j: u32) -> Self {
        Self { coef, i, j }
    }

    fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.coef * x1.powi(self.i as i32) * x2.powi(self.j as i32)
    }
}

/// A polynomial field `P ∂/∂x_1 + Q ∂/∂x_2` on the real plane, extended to
/// `C^2` independently of the imaginary coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanePolynomial {
    pub p: Vec<Monomial>,
    pub q: Vec<Monomial>,
}

impl PlanePolynomial {
    /// `∂/∂x_1 + (3x_1² − 1) ∂/∂x_2`, whose orbit through `(0, c)` is `(t, t³ − t + c)`.
    pub fn cubic_counterexample() -> Self {
        Self {
            p: vec![Monomial::new(1.0, 0, 0)],
            q: vec![Monomial::new(3.0, 2, 0), Monomial::new(-1.0, 0, 0)],
        }
    }

    pub fn velocity(&self, x1: f64, x2: f64) -> (f64, f64) {
        let p = self.p.iter().map(|m| m.eval(x1, x2)).sum();
        let q = self.q.iter().map(|m| m.eval(x1, x2)).sum();
        (p, q)
    }

    /// Closed form exists when `P ≡ 1` and `Q` depends on `x_1` alone.
    fn has_closed_form(&self) -> bool {
        let p_is_one = {
            let constant: f64 = self.p.iter().filter(|m| m.i == 0 && m.j == 0).map(|m| m.coef).sum();
            constant == 1.0 && self.p.iter().all(|m| (m.i == 0 && m.j == 0) || m.coef == 0.0)
        };
        p_is_one && self.q.iter().all(|m| m.j == 0 || m.coef == 0.0)
    }

    /// Antiderivative of `Q(s, ·)` in `s` (valid when `Q` does not involve `x_2`).
    fn q_antiderivative(&self, s: f64) -> f64 {
        self.q
            .iter()
            .map(|m| m.coef * s.powi(m.i as i32 + 1) / (m.i as f64 + 1.0))
            .sum()
    }
}

#[derive(Clone)]
pub struct HolomorphicField {
    pub dim: usize,
    pub f: VectorFn,
    pub label: String,
}

/// The vector-field classes handled by the laboratory.
#[derive(Clone)]
pub enum VectorFieldSpec {
    /// `ż = F(z)` for a holomorphic callable `F`.
    HolomorphicCallable(HolomorphicField),
    /// `ż = A z`.
    LinearComplex(DMatrix<Complex64>),
    /// `a x ∂/∂x + b y ∂/∂y` on `C`.
    RealLinearDiag { a: f64, b: f64 },
    /// `ḡ ∂/∂z` on `C`, i.e. `ż = conj(g(z))`.
    Antiholomorphic { g: ComplexFn, label: String },
    /// `∇σ` for a real quadratic form.
    GradQuadratic(QuadraticForm),
    /// `∇ρ` by finite differences.
    GradSmooth { rho: ScalarField, dim: usize, diff: DiffConfig },
    PolynomialPlane(PlanePolynomial),
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HolomorphicCallable(h) => write!(f, "HolomorphicCallable({}, n={})", h.label, h.dim),
            Self::LinearComplex(a) => write!(f, "LinearComplex({a:?})"),
            Self::RealLinearDiag { a, b } => write!(f, "RealLinearDiag({a}, {b})"),
            Self::Antiholomorphic { label, .. } => write!(f, "Antiholomorphic({label})"),
            Self::GradQuadratic(q) => write!(f, "GradQuadratic({q:?})"),
            Self::GradSmooth { rho, dim, .. } => write!(f, "GradSmooth({:?}, n={dim})", rho.label()),
            Self::PolynomialPlane(p) => write!(f, "PolynomialPlane({p:?})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Local error bound per accepted Runge–Kutta step.
    pub tol: f64,
    /// Trajectories leaving this ball are reported as blow-up.
    pub r_max: f64,
    pub max_steps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            r_max: 1e6,
            max_steps: 2_000_000,
        }
    }
}

impl FlowConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

impl VectorFieldSpec {
    pub fn holomorphic(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&ComplexVec) -> ComplexVec + Send + Sync + 'static,
    ) -> Self {
        Self::HolomorphicCallable(HolomorphicField {
            dim,
            f: Arc::new(f),
            label: label.into(),
        })
    }

    pub fn real_linear_diag(a: f64, b: f64) -> Result<Self, FlowError> {
        if a == 0.0 || b == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(FlowError::InvalidField(format!(
                "real-linear diagonal field needs nonzero finite coefficients, got ({a}, {b})"
            )));
        }
        Ok(Self::RealLinearDiag { a, b })
    }

    pub fn antiholomorphic(label: impl Into<String>, g: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self::Antiholomorphic {
            g: Arc::new(g),
            label: label.into(),
        }
    }

    pub fn linear(a: DMatrix<Complex64>) -> Result<Self, FlowError> {
        if !a.is_square() {
            return Err(FlowError::InvalidField("linear field matrix must be square".into()));
        }
        Ok(Self::LinearComplex(a))
    }

    pub fn diagonal_linear(diag: &[Complex64]) -> Self {
        Self::LinearComplex(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn grad_smooth(rho: ScalarField, dim: usize) -> Self {
        Self::GradSmooth {
            rho,
            dim,
            diff: DiffConfig::default(),
        }
    }

    /// Complex dimension of the ambient space.
    pub fn dim(&self) -> usize {
        match self {
            Self::HolomorphicCallable(h) => h.dim,
            Self::LinearComplex(a) => a.nrows(),
            Self::RealLinearDiag { .. } | Self::Antiholomorphic { .. } => 1,
            Self::GradQuadratic(q) => q.dim(),
            Self::GradSmooth { dim, .. } => *dim,
            Self::PolynomialPlane(_) => 2,
        }
    }

    /// `true` when the flow maps are holomorphic.
    pub fn is_holomorphic(&self) -> bool {
        match self {
            Self::HolomorphicCallable(_) | Self::LinearComplex(_) => true,
            Self::RealLinearDiag { a, b } => a == b,
            Self::GradQuadratic(q) => q.harmonic_part().iter().all(|z| z.norm() == 0.0),
            _ => false,
        }
    }

    fn check_dim(&self, p: &ComplexVec) -> Result<(), FlowError> {
        if p.dim() == self.dim() {
            Ok(())
        } else {
            Err(FlowError::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            })
        }
    }

    /// Velocity at `p`, packed as a complex vector.
    pub fn eval(&self, p: &ComplexVec) -> Result<ComplexVec, FlowError> {
        self.check_dim(p)?;
        let v = match self {
            Self::HolomorphicCallable(h) => (h.f)(p),
            Self::LinearComplex(a) => ComplexVec::from_dvector(&(a * p.to_dvector())),
            Self::RealLinearDiag { a, b } => {
                ComplexVec(vec![Complex64::new(a * p[0].re, b * p[0].im)])
            }
            Self::Antiholomorphic { g, .. } => ComplexVec(vec![g(p[0]).conj()]),
            Self::GradQuadratic(q) => q.gradient(p),
            Self::GradSmooth { rho, diff, .. } => calculus::gradient_complex(rho, p, diff)
                .map_err(|_| FlowError::UndefinedAtPoint { point: p.clone() })?,
            Self::PolynomialPlane(poly) => {
                let (vp, vq) = poly.velocity(p[0].re, p[1].re);
                ComplexVec::from_reals(&[vp, vq])
            }
        };
        if v.dim() != p.dim() || !v.is_finite() {
            return Err(FlowError::UndefinedAtPoint { point: p.clone() });
        }
        Ok(v)
    }

    pub fn speed(&self, p: &ComplexVec) -> Result<f64, FlowError> {
        Ok(self.eval(p)?.norm())
    }

    /// `true` if [`flow`](Self::flow) uses a closed form for this field.
    pub fn has_closed_form(&self) -> bool {
        match self {
            Self::LinearComplex(_) | Self::RealLinearDiag { .. } | Self::GradQuadratic(_) => true,
            Self::PolynomialPlane(poly) => poly.has_closed_form(),
            _ => false,
        }
    }

    fn exact_flow(&self, p: &ComplexVec, t: f64) -> Option<ComplexVec> {
        match self {
            Self::LinearComplex(a) => {
                let m = (a * Complex64::new(t, 0.0)).exp();
                Some(ComplexVec::from_dvector(&(m * p.to_dvector())))
            }
            Self::RealLinearDiag { a, b } => Some(ComplexVec(vec![Complex64::new(
                p[0].re * (a * t).exp(),
                p[0].im * (b * t).exp(),
            )])),
            Self::GradQuadratic(q) if q.is_diagonal_hermitian() => {
                let h = q.hermitian_part();
                Some(ComplexVec(
                    (0..q.dim()).map(|j| p[j] * (2.0 * h[(j, j)].re * t).exp()).collect(),
                ))
            }
            Self::GradQuadratic(q) => {
                let m = (q.real_hessian() * t).exp();
                let x = DVector::from_vec(p.to_real());
                Some(ComplexVec::from_real((m * x).as_slice()))
            }
            Self::PolynomialPlane(poly) if poly.has_closed_form() => {
                let x1 = p[0].re;
                let s = x1 + t;
                let x2 = p[1].re + poly.q_antiderivative(s) - poly.q_antiderivative(x1);
                Some(ComplexVec::from_pairs(&[(s, p[0].im), (x2, p[1].im)]))
            }
            _ => None,
        }
    }

    /// Time-`t` flow map applied to `p`.
    pub fn flow(&self, p: &ComplexVec, t: f64, cfg: &FlowConfig) -> Result<ComplexVec, FlowError> {
        self.check_dim(p)?;
        match self.exact_flow(p, t) {
            Some(q) => {
                if !q.is_finite() || q.norm() > cfg.r_max {
                    Err(FlowError::BlowUp {
                        t_reached: t,
                        r_max: cfg.r_max,
                    })
                } else {
                    Ok(q)
                }
            }
            None => self.flow_numeric(p, t, cfg),
        }
    }

    /// Runge–Kutta integration regardless of closed forms.
    pub fn flow_numeric(&self, p: &ComplexVec, t: f64, cfg: &FlowConfig) -> Result<ComplexVec, FlowError> {
        self.check_dim(p)?;
        integrate_rk4(&|x: &ComplexVec| self.eval(x), p, t, cfg)
    }
}

fn rk4_step(
    f: &impl Fn(&ComplexVec) -> Result<ComplexVec, FlowError>,
    x: &ComplexVec,
    h: f64,
) -> Result<ComplexVec, FlowError> {
    let k1 = f(x)?;
    let k2 = f(&x.axpy(0.5 * h, &k1))?;
    let k3 = f(&x.axpy(0.5 * h, &k2))?;
    let k4 = f(&x.axpy(h, &k3))?;
    let mut out = x.clone();
    for i in 0..x.dim() {
        out[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
    }
    Ok(out)
}

/// Adaptive classical RK4 with step doubling and local extrapolation.
pub fn integrate_rk4(
    f: &impl Fn(&ComplexVec) -> Result<ComplexVec, FlowError>,
    p: &ComplexVec,
    t: f64,
    cfg: &FlowConfig,
) -> Result<ComplexVec, FlowError> {
    if t == 0.0 {
        return Ok(p.clone());
    }
    let dir = t.signum();
    let total = t.abs();
    let mut x = p.clone();
    let mut done = 0.0;
    let mut h = total.min(0.1);
    let h_min = 1e-14 * (1.0 + total);
    let mut steps = 0usize;
    while done < total {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(FlowError::TooManySteps(cfg.max_steps));
        }
        let last = h >= total - done;
        if last {
            h = total - done;
        }
        let attempt = rk4_step(f, &x, dir * h).and_then(|coarse| {
            let mid = rk4_step(f, &x, 0.5 * dir * h)?;
            let fine = rk4_step(f, &mid, 0.5 * dir * h)?;
            Ok((coarse, fine))
        });
        let (coarse, fine) = match attempt {
            Ok(pair) => pair,
            Err(_) if h > h_min => {
                h *= 0.25;
                continue;
            }
            Err(e) => return Err(e),
        };
        let err = fine.distance(&coarse) / 15.0;
        let allowed = cfg.tol * fine.norm().max(1.0);
        if err <= allowed || h <= h_min {
            if h <= h_min && err > allowed {
                return Err(FlowError::StepCollapse {
                    t_reached: dir * done,
                });
            }
            x = fine.axpy(1.0 / 15.0, &(&fine - &coarse));
            done = if last { total } else { done + h };
            if !x.is_finite() || x.norm() > cfg.r_max {
                return Err(FlowError::BlowUp {
                    t_reached: dir * done,
                    r_max: cfg.r_max,
                });
            }
            let grow = if err == 0.0 { 4.0 } else { (0.9 * (allowed / err).powf(0.2)).min(4.0) };
            h *= grow.max(1.0);
        } else {
            h *= (0.9 * (allowed / err).powf(0.2)).max(0.1);
        }
    }
    Ok(x)
}

/// Free-function form of [`VectorFieldSpec::flow`] with default blow-up radius.
pub fn flow(field: &VectorFieldSpec, p: &ComplexVec, t: f64, tol: f64) -> Result<ComplexVec, FlowError> {
    field.flow(p, t, &FlowConfig::with_tol(tol))
}

/// Points of an orbit at evenly spaced times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<ComplexVec>,
    pub seed: ComplexVec,
    pub field: VectorFieldSpec,
    /// Samples below this time were dropped after a flow failure.
    pub truncated_below: bool,
    pub truncated_above: bool,
    /// The seed's speed is below [`EQUILIBRIUM_FLOOR`].
    pub at_equilibrium: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn truncated(&self) -> bool {
        self.truncated_below || self.truncated_above
    }
}

/// Evenly spaced samples on `[t_min, t_max]`; stops at the first flow failure
/// in each time direction and flags the truncation.
pub fn sample_orbit(
    field: &VectorFieldSpec,
    seed: &ComplexVec,
    t_min: f64,
    t_max: f64,
    n_samples: usize,
    cfg: &FlowConfig,
) -> Result<Trajectory, FlowError> {
    if !(t_min < t_max) || n_samples < 2 {
        return Err(FlowError::InvalidArgument(format!(
            "need t_min < t_max and at least two samples, got [{t_min}, {t_max}] with {n_samples}"
        )));
    }
    let times: Vec<f64> = (0..n_samples)
        .map(|i| t_min + (t_max - t_min) * i as f64 / (n_samples - 1) as f64)
        .collect();
    sample_at_times(field, seed, &times, cfg)
}

/// Like [`sample_orbit`] for an arbitrary strictly increasing time list.
pub fn sample_at_times(
    field: &VectorFieldSpec,
    seed: &ComplexVec,
    times: &[f64],
    cfg: &FlowConfig,
) -> Result<Trajectory, FlowError> {
    let speed = field.speed(seed)?;
    let exact = field.has_closed_form();
    let split = times.partition_point(|&t| t < 0.0);

    let mut forward = Vec::new();
    let mut truncated_above = false;
    let (mut x, mut t_prev) = (seed.clone(), 0.0);
    for &t in &times[split..] {
        let step = if exact { field.flow(seed, t, cfg) } else { field.flow(&x, t - t_prev, cfg) };
        match step {
            Ok(q) => {
                x = q.clone();
                t_prev = t;
                forward.push((t, q));
            }
            Err(_) => {
                truncated_above = true;
                break;
            }
        }
    }

    let mut backward = Vec::new();
    let mut truncated_below = false;
    let (mut x, mut t_prev) = (seed.clone(), 0.0);
    for &t in times[..split].iter().rev() {
        let step = if exact { field.flow(seed, t, cfg) } else { field.flow(&x, t - t_prev, cfg) };
        match step {
            Ok(q) => {
                x = q.clone();
                t_prev = t;
                backward.push((t, q));
            }
            Err(_) => {
                truncated_below = true;
                break;
            }
        }
    }
    backward.reverse();
    let (times, points): (Vec<f64>, Vec<ComplexVec>) = backward.into_iter().chain(forward).unzip();
    Ok(Trajectory {
        times,
        points,
        seed: seed.clone(),
        field: field.clone(),
        truncated_below,
        truncated_above,
        at_equilibrium: speed < EQUILIBRIUM_FLOOR,
    })
}

pub type Region = Arc<dyn Fn(&ComplexVec) -> bool + Send + Sync>;

/// A field together with the open set where it may be used.
#[derive(Clone)]
pub struct ChartField {
    pub field: VectorFieldSpec,
    pub region: Option<Region>,
}

impl ChartField {
    pub fn global(field: VectorFieldSpec) -> Self {
        Self { field, region: None }
    }

    pub fn within(field: VectorFieldSpec, region: impl Fn(&ComplexVec) -> bool + Send + Sync + 'static) -> Self {
        Self {
            field,
            region: Some(Arc::new(region)),
        }
    }

    fn contains(&self, p: &ComplexVec) -> bool {
        self.region.as_ref().is_none_or(|r| r(p))
    }
}

/// Composition of segment flows, valid on a ball around `base`.
#[derive(Clone)]
pub struct TransportMap {
    pub base: ComplexVec,
    pub target: ComplexVec,
    pub total_time: f64,
    pub radius: f64,
    pub segments: Vec<(VectorFieldSpec, f64)>,
    /// Real `2n x 2n` Jacobian of [`apply`](Self::apply) at `base`.
    pub jacobian: DMatrix<f64>,
    cfg: FlowConfig,
}

impl fmt::Debug for TransportMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransportMap")
            .field("base", &self.base)
            .field("target", &self.target)
            .field("total_time", &self.total_time)
            .field("radius", &self.radius)
            .field("segments", &self.segments.len())
            .finish()
    }
}

impl TransportMap {
    pub fn apply(&self, x: &ComplexVec) -> Result<ComplexVec, FlowError> {
        self.segments
            .iter()
            .try_fold(x.clone(), |acc, (field, dt)| field.flow(&acc, *dt, &self.cfg))
    }

    /// Frobenius norm of `[J, Jac]`; zero iff the map is complex-linear to first order.
    pub fn commutator_norm(&self) -> f64 {
        let j = complex_structure(self.base.dim());
        (&j * &self.jacobian - &self.jacobian * &j).norm()
    }
}

/// Real Jacobian of a point map by fourth-order central differences.
pub fn jacobian_of(
    map: &impl Fn(&ComplexVec) -> Result<ComplexVec, FlowError>,
    p: &ComplexVec,
    h: f64,
) -> Result<DMatrix<f64>, FlowError> {
    let m = p.real_dim();
    let mut jac = DMatrix::zeros(m, m);
    for col in 0..m {
        let eval = |d: f64| map(&p.shifted(col, d)).map(|q| q.to_real());
        let (f1, b1, f2, b2) = (eval(h)?, eval(-h)?, eval(2.0 * h)?, eval(-2.0 * h)?);
        for row in 0..m {
            jac[(row, col)] = (8.0 * (f1[row] - b1[row]) - (f2[row] - b2[row])) / (12.0 * h);
        }
    }
    Ok(jac)
}

fn ball_samples(p: &ComplexVec, radius: f64, random: usize, seed: u64) -> Vec<ComplexVec> {
    let mut out = vec![p.clone()];
    for i in 0..p.real_dim() {
        out.push(p.shifted(i, 0.999 * radius));
        out.push(p.shifted(i, -0.999 * radius));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let dir: Vec<f64> = (0..p.real_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-12);
        let r = radius * rng.gen_range(0.0..0.999f64);
        let offset = ComplexVec::from_real(&dir.iter().map(|d| d / norm * r).collect::<Vec<_>>());
        out.push(p + &offset);
    }
    out
}

/// Compose the flows named by `schedule` (field index, duration) into a
/// leaf-preserving map defined on the ball of radius `ball_radius` about `p`.
pub fn leaf_transport(
    fields: &[ChartField],
    p: &ComplexVec,
    schedule: &[(usize, f64)],
    ball_radius: f64,
    cfg: &FlowConfig,
) -> Result<TransportMap, FlowError> {
    if schedule.is_empty() {
        return Err(FlowError::InvalidArgument("empty transport schedule".into()));
    }
    for &(idx, dt) in schedule {
        if idx >= fields.len() {
            return Err(FlowError::InvalidArgument(format!("schedule names field {idx}, only {} given", fields.len())));
        }
        if !(dt > 0.0) {
            return Err(FlowError::InvalidArgument(format!("segment durations must be positive, got {dt}")));
        }
    }
    if !(ball_radius > 0.0) {
        return Err(FlowError::InvalidArgument("ball radius must be positive".into()));
    }

    const SUBSTEPS: usize = 8;
    for sample in ball_samples(p, ball_radius, 16, 0x5eed) {
        let mut x = sample.clone();
        for (segment, &(idx, dt)) in schedule.iter().enumerate() {
            let chart = &fields[idx];
            if !chart.contains(&x) {
                return Err(FlowError::SegmentEscape { segment, sample, time: 0.0 });
            }
            for k in 1..=SUBSTEPS {
                x = chart.field.flow(&x, dt / SUBSTEPS as f64, cfg)?;
                if !chart.contains(&x) {
                    return Err(FlowError::SegmentEscape {
                        segment,
                        sample,
                        time: dt * k as f64 / SUBSTEPS as f64,
                    });
                }
            }
        }
    }

    let segments: Vec<(VectorFieldSpec, f64)> = schedule
        .iter()
        .map(|&(idx, dt)| (fields[idx].field.clone(), dt))
        .collect();
    let total_time = schedule.iter().map(|&(_, dt)| dt).sum();
    let mut map = TransportMap {
        base: p.clone(),
        target: p.clone(),
        total_time,
        radius: ball_radius,
        segments,
        jacobian: DMatrix::zeros(0, 0),
        cfg: *cfg,
    };
    map.target = map.apply(p)?;
    let h = (1e-3 * p.norm().max(1.0)).min(0.25 * ball_radius);
    map.jacobian = jacobian_of(&|x: &ComplexVec| map.apply(x), p, h)?;
    Ok(map)
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo <= width {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    if fa <= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// Flow time `t ∈ [lo, hi]` minimising `|flow(x, t) − target|`, with the attained distance.
pub fn orbit_time(
    field: &VectorFieldSpec,
    x: &ComplexVec,
    target: &ComplexVec,
    lo: f64,
    hi: f64,
    cfg: &FlowConfig,
) -> Result<(f64, f64), FlowError> {
    const COARSE: usize = 200;
    let dist = |t: f64| field.flow(x, t, cfg).map(|q| q.distance(target)).unwrap_or(f64::INFINITY);
    let dt = (hi - lo) / COARSE as f64;
    let best = (0..=COARSE)
        .map(|i| lo + dt * i as f64)
        .map(|t| (t, dist(t)))
        .fold((lo, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
    if !best.1.is_finite() {
        return Err(FlowError::InvalidArgument("orbit never approached the target".into()));
    }
    Ok(golden_min(&dist, (best.0 - dt).max(lo), (best.0 + dt).min(hi), 1e-13 * (1.0 + hi.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodConfig {
    /// Return distance accepted as closure.
    pub tol: f64,
    /// Local minima of the return distance within this many steps are ignored.
    pub min_arc_steps: usize,
    /// Time step; default is a 1% arc relative to `max(|p|, 1e-3)`.
    pub step: Option<f64>,
    pub max_steps: usize,
    pub flow: FlowConfig,
}

impl Default for PeriodConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            min_arc_steps: 10,
            step: None,
            max_steps: 400_000,
            flow: FlowConfig::with_tol(1e-12),
        }
    }
}

/// Smallest `T ∈ (0, t_max]` with `|flow(p, T) − p| < tol`, if any.
pub fn detect_period(
    field: &VectorFieldSpec,
    p: &ComplexVec,
    t_max: f64,
    cfg: &PeriodConfig,
) -> Result<Option<f64>, FlowError> {
    let speed = field.speed(p)?;
    if speed < EQUILIBRIUM_FLOOR {
        return Err(FlowError::EquilibriumSeed { speed });
    }
    let dt = cfg
        .step
        .unwrap_or(0.01 * p.norm().max(1e-3) / speed)
        .max(t_max / cfg.max_steps as f64);
    let n_steps = (t_max / dt).ceil() as usize;

    // Linear flows reuse one propagator.
    let propagator = match field {
        VectorFieldSpec::LinearComplex(a) => Some((a * Complex64::new(dt, 0.0)).exp()),
        _ => None,
    };
    let step = |x: &ComplexVec| -> Result<ComplexVec, FlowError> {
        match &propagator {
            Some(m) => {
                let q = ComplexVec::from_dvector(&(m * x.to_dvector()));
                if q.norm() > cfg.flow.r_max || !q.is_finite() {
                    Err(FlowError::BlowUp { t_reached: f64::NAN, r_max: cfg.flow.r_max })
                } else {
                    Ok(q)
                }
            }
            None => field.flow(x, dt, &cfg.flow),
        }
    };

    let mut prev = p.clone();
    let mut cur = match step(&prev) {
        Ok(q) => q,
        Err(_) => return Ok(None),
    };
    let mut d_prev = 0.0;
    let mut d_cur = cur.distance(p);
    for i in 1..n_steps {
        let next = match step(&cur) {
            Ok(q) => q,
            Err(_) => return Ok(None),
        };
        let d_next = next.distance(p);
        if i >= cfg.min_arc_steps && d_cur <= d_prev && d_cur <= d_next {
            // refine on [t_{i-1}, t_{i+1}] starting from the sample at t_{i-1}
            let base = prev.clone();
            let dist = |s: f64| field.flow(&base, s, &cfg.flow).map(|q| q.distance(p)).unwrap_or(f64::INFINITY);
            let (s, d) = golden_min(&dist, 0.0, 2.0 * dt, 1e-14 * (1.0 + t_max));
            let t = (i - 1) as f64 * dt + s;
            if d < cfg.tol && t <= t_max {
                return Ok(Some(t));
            }
        }
        prev = cur;
        cur = next;
        d_prev = d_cur;
        d_cur = d_next;
    }
    Ok(None)
}

/// JSON description of a field. Callable variants are resolved by name
/// through [`crate::registry`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldJson {
    Holomorphic {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    LinearComplex {
        matrix: crate::form::MatrixJson,
    },
    RealLinearDiag {
        a: f64,
        b: f64,
    },
    Antiholomorphic {
        g: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    GradQuadratic {
        form: crate::form::QuadraticFormJson,
    },
    GradSmooth {
        rho: crate::registry::FnRef,
        dim: usize,
    },
    PolynomialPlane {
        p: Vec<Monomial>,
        q: Vec<Monomial>,
    },
}

impl FieldJson {
    pub fn build(&self) -> Result<VectorFieldSpec, String> {
        use crate::registry;
        Ok(match self {
            Self::Holomorphic { name, params } => registry::holomorphic_field(name, params)?,
            Self::LinearComplex { matrix } => {
                VectorFieldSpec::linear(crate::form::matrix_from_json(matrix)?).map_err(|e| e.to_string())?
            }
            Self::RealLinearDiag { a, b } => VectorFieldSpec::real_linear_diag(*a, *b).map_err(|e| e.to_string())?,
            Self::Antiholomorphic { g, params } => {
                let func = registry::holomorphic_scalar(g, params)?;
                VectorFieldSpec::Antiholomorphic { g: func, label: g.clone() }
            }
            Self::GradQuadratic { form } => VectorFieldSpec::GradQuadratic(QuadraticForm::try_from(form)?),
            Self::GradSmooth { rho, dim } => VectorFieldSpec::grad_smooth(registry::scalar_field(rho)?, *dim),
            Self::PolynomialPlane { p, q } => VectorFieldSpec::PolynomialPlane(PlanePolynomial {
                p: p.clone(),
                q: q.clone(),
            }),
        })
    }
}

/// Default differencing used when a scalar field's gradient drives a flow.
pub fn gradient_diff() -> DiffConfig {
    DiffConfig {
        step: None,
        scheme: Scheme::Central4,
    }
}
