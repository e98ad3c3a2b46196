//! Analytic continuation of univariate power-series germs by disc chaining.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{sample_at_times, FlowConfig, FlowError, VectorFieldSpec};
use crate::types::ComplexVec;

pub const DEFAULT_ORDER: usize = 40;
/// Radius reported for series with no detectable singularity.
pub const MAX_RADIUS: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContError {
    #[error("shift {shift:e} is not below half the radius {radius:e}")]
    StepTooLarge { shift: f64, radius: f64 },
    #[error("radius collapsed to {radius:e} near {at}: the path runs into a singularity")]
    SingularityEncountered { at: Complex64, radius: f64 },
    #[error("continuation exceeded {0} steps")]
    StepLimit(usize),
    #[error("loop is not closed: starts at {start}, ends at {end}")]
    OpenLoop { start: Complex64, end: Complex64 },
    #[error("field does not preserve the slice: transverse speed {transverse:e} at {point:?}")]
    SliceNotInvariant { point: ComplexVec, transverse: f64 },
    #[error("invalid germ: {0}")]
    InvalidGerm(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// How coefficients are produced at a new center.
///
/// A truncated series alone carries no information beyond its disc, so
/// re-expanding it repeatedly only reproduces the first polynomial. Named
/// germs instead rebuild their coefficients from the continued value, which
/// carries the branch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GermKind {
    /// `v (1 + h/c)^{1/2}` with `v² = c`.
    Sqrt,
    /// `v + scale · log(1 + h/c)`.
    Log { scale: Complex64 },
    /// Exact under re-expansion.
    Polynomial,
    /// Plain re-expansion; accuracy degrades away from the first disc.
    #[default]
    Series,
}

/// `Σ a_k (w − center)^k`, truncated at `coeffs.len()` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Germ {
    #[serde(default)]
    pub kind: GermKind,
    pub center: Complex64,
    pub coeffs: Vec<Complex64>,
    pub radius: f64,
    /// Branch points of the underlying function, when known.
    #[serde(default)]
    pub known_singularities: Vec<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Germ {
    pub fn new(center: Complex64, coeffs: Vec<Complex64>, known_singularities: Vec<Complex64>) -> Result<Self, ContError> {
        if coeffs.is_empty() {
            return Err(ContError::InvalidGerm("no coefficients".into()));
        }
        if coeffs.iter().any(|a| !a.is_finite()) || !center.is_finite() {
            return Err(ContError::InvalidGerm("non-finite coefficient or center".into()));
        }
        let mut g = Self {
            kind: GermKind::Series,
            center,
            coeffs,
            radius: MAX_RADIUS,
            known_singularities,
        };
        g.radius = g.estimate_radius();
        if !(g.radius > 0.0) {
            return Err(ContError::InvalidGerm("center sits on a known singularity".into()));
        }
        Ok(g)
    }

    /// Principal branch of `√w` at `center`.
    pub fn sqrt_at(center: Complex64, order: usize) -> Result<Self, ContError> {
        if center.norm() == 0.0 {
            return Err(ContError::InvalidGerm("sqrt has a branch point at 0".into()));
        }
        let mut g = Self::new(center, sqrt_coeffs(center, center.sqrt(), order), vec![c(0.0, 0.0)])?;
        g.kind = GermKind::Sqrt;
        Ok(g)
    }

    /// Principal branch of `log w` at `center`.
    pub fn log_at(center: Complex64, order: usize) -> Result<Self, ContError> {
        if center.norm() == 0.0 {
            return Err(ContError::InvalidGerm("log has a branch point at 0".into()));
        }
        Self::scaled_log_at(center, c(1.0, 0.0), order)
    }

    /// `−i log w` at `center`.
    pub fn neg_i_log_at(center: Complex64, order: usize) -> Result<Self, ContError> {
        Self::scaled_log_at(center, c(0.0, -1.0), order)
    }

    fn scaled_log_at(center: Complex64, scale: Complex64, order: usize) -> Result<Self, ContError> {
        if center.norm() == 0.0 {
            return Err(ContError::InvalidGerm("log has a branch point at 0".into()));
        }
        let coeffs = log_coeffs(center, scale * center.ln(), scale, order);
        let mut g = Self::new(center, coeffs, vec![c(0.0, 0.0)])?;
        g.kind = GermKind::Log { scale };
        Ok(g)
    }

    /// A polynomial in `w`, given by coefficients at 0.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self, ContError> {
        let mut g = Self::new(c(0.0, 0.0), coeffs, Vec::new())?;
        g.kind = GermKind::Polynomial;
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        let h = w - self.center;
        self.coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * h + a)
    }

    /// Geometric estimate of the truncation error at `w`.
    pub fn tail_bound(&self, w: Complex64) -> f64 {
        let q = (w - self.center).norm() / self.radius;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        let n = self.coeffs.len();
        let m = self.coeffs[n.saturating_sub(10)..]
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm() * self.radius.powi((n.saturating_sub(10) + i) as i32))
            .fold(0.0, f64::max);
        m * q.powi(n as i32) / (1.0 - q)
    }

    /// Minimum of the distance to known singularities and a ratio-test fit
    /// `|a_k| ~ A R^{-k}` over the last ten coefficients.
    pub fn estimate_radius(&self) -> f64 {
        let known = self
            .known_singularities
            .iter()
            .map(|s| (s - self.center).norm())
            .fold(f64::INFINITY, f64::min);
        known.min(self.ratio_fit()).min(MAX_RADIUS)
    }

    fn ratio_fit(&self) -> f64 {
        let n = self.coeffs.len();
        let tail: Vec<(f64, f64)> = (n.saturating_sub(10)..n)
            .filter(|&k| k > 0 && self.coeffs[k].norm() > 1e-300)
            .map(|k| (k as f64, self.coeffs[k].norm().ln()))
            .collect();
        if tail.len() < 3 {
            return f64::INFINITY;
        }
        let m = tail.len() as f64;
        let (sx, sy) = tail.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = tail
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        let slope = num / den;
        if slope >= 0.0 {
            // non-decaying coefficients: trust only the last index
            return self.coeffs[n - 1].norm().powf(-1.0 / (n - 1) as f64);
        }
        (-slope).exp()
    }

    /// Re-expands around `new_center`; the radius becomes `radius − |shift|`.
    pub fn recenter(&self, new_center: Complex64) -> Result<Self, ContError> {
        let s = new_center - self.center;
        if s.norm() >= 0.5 * self.radius {
            return Err(ContError::StepTooLarge {
                shift: s.norm(),
                radius: self.radius,
            });
        }
        let n = self.coeffs.len();
        match self.kind {
            GermKind::Sqrt => {
                let v = self.eval(new_center);
                return Ok(self.rebuilt(new_center, sqrt_coeffs(new_center, v, n), s.norm()));
            }
            GermKind::Log { scale } => {
                let v = self.eval(new_center);
                return Ok(self.rebuilt(new_center, log_coeffs(new_center, v, scale, n), s.norm()));
            }
            GermKind::Polynomial | GermKind::Series => {}
        }
        // repeated synthetic division: b_m = Σ_k a_k C(k, m) s^{k−m}
        let mut b = self.coeffs.clone();
        for m in 0..n {
            for k in (m..n - 1).rev() {
                let next = b[k + 1];
                b[k] += next * s;
            }
        }
        Ok(self.rebuilt(new_center, b, s.norm()))
    }

    fn rebuilt(&self, center: Complex64, coeffs: Vec<Complex64>, shift: f64) -> Self {
        Self {
            kind: self.kind,
            center,
            coeffs,
            radius: self.radius - shift,
            known_singularities: self.known_singularities.clone(),
        }
    }
}

fn sqrt_coeffs(center: Complex64, value: Complex64, order: usize) -> Vec<Complex64> {
    let mut coeffs = Vec::with_capacity(order);
    let mut binom = 1.0;
    for k in 0..order {
        coeffs.push(value * binom / center.powi(k as i32));
        binom *= (0.5 - k as f64) / (k as f64 + 1.0);
    }
    coeffs
}

fn log_coeffs(center: Complex64, value: Complex64, scale: Complex64, order: usize) -> Vec<Complex64> {
    let mut coeffs = vec![value];
    for k in 1..order {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        coeffs.push(scale * sign / (k as f64 * center.powi(k as i32)));
    }
    coeffs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub waypoints: Vec<Complex64>,
    #[serde(default)]
    pub description: String,
}

impl PathSpec {
    pub fn new(waypoints: Vec<Complex64>, description: impl Into<String>) -> Result<Self, ContError> {
        if waypoints.is_empty() {
            return Err(ContError::InvalidPath("no waypoints".into()));
        }
        if waypoints.windows(2).any(|w| w[0] == w[1]) {
            return Err(ContError::InvalidPath("consecutive waypoints coincide".into()));
        }
        Ok(Self {
            waypoints,
            description: description.into(),
        })
    }

    /// `n` segments around `center`, starting at angle `start`, closing exactly.
    pub fn circle(center: Complex64, radius: f64, n: usize, start: f64, clockwise: bool, turns: usize) -> Result<Self, ContError> {
        if n < 3 || turns == 0 || !(radius > 0.0) {
            return Err(ContError::InvalidPath("circle needs n >= 3, turns >= 1, radius > 0".into()));
        }
        let dir = if clockwise { -1.0 } else { 1.0 };
        let total = n * turns;
        let first = center + Complex64::from_polar(radius, start);
        let mut pts: Vec<Complex64> = (0..total)
            .map(|i| center + Complex64::from_polar(radius, start + dir * TAU * i as f64 / n as f64))
            .collect();
        pts.push(first);
        Self::new(pts, format!("{turns}x circle r={radius} about {center}"))
    }

    pub fn segment(a: Complex64, b: Complex64) -> Result<Self, ContError> {
        Self::new(vec![a, b], "segment")
    }

    pub fn is_closed(&self) -> bool {
        let (a, b) = (self.waypoints[0], self.waypoints[self.waypoints.len() - 1]);
        (a - b).norm() <= 1e-12 * (1.0 + a.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    /// Steps are at most this fraction of the current radius.
    pub step_fraction: f64,
    pub min_radius: f64,
    pub max_steps: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            step_fraction: 0.3,
            min_radius: 1e-9,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationResult {
    pub final_germ: Germ,
    pub steps: usize,
}

/// Continues `g` along the waypoints, subdividing each segment so every
/// recentering moves at most `step_fraction` of the current radius.
pub fn continue_along(g: &Germ, path: &PathSpec, cfg: &StepConfig) -> Result<ContinuationResult, ContError> {
    let start = path.waypoints[0];
    if (start - g.center).norm() >= 0.5 * g.radius {
        return Err(ContError::StepTooLarge {
            shift: (start - g.center).norm(),
            radius: g.radius,
        });
    }
    let mut germ = g.clone();
    let mut steps = 0usize;
    for &target in &path.waypoints {
        loop {
            let remaining = target - germ.center;
            let dist = remaining.norm();
            if dist == 0.0 {
                break;
            }
            if germ.radius < cfg.min_radius {
                return Err(ContError::SingularityEncountered {
                    at: germ.center,
                    radius: germ.radius,
                });
            }
            let max_step = cfg.step_fraction * germ.radius;
            let next = if dist <= max_step { target } else { germ.center + remaining * (max_step / dist) };
            germ = germ.recenter(next)?;
            germ.radius = germ.estimate_radius();
            steps += 1;
            if steps > cfg.max_steps {
                return Err(ContError::StepLimit(cfg.max_steps));
            }
        }
    }
    Ok(ContinuationResult { final_germ: germ, steps })
}

/// Value after continuation around `lp` minus the value before, at the base point.
pub fn monodromy(g: &Germ, lp: &PathSpec, cfg: &StepConfig) -> Result<Complex64, ContError> {
    if !lp.is_closed() {
        return Err(ContError::OpenLoop {
            start: lp.waypoints[0],
            end: lp.waypoints[lp.waypoints.len() - 1],
        });
    }
    let before = g.eval(lp.waypoints[0]);
    let after = continue_along(g, lp, cfg)?.final_germ.value();
    Ok(after - before)
}

/// A complex line in `C^n`: coordinate `coord` varies, the rest stay at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub base: ComplexVec,
    pub coord: usize,
}

impl Slice {
    pub fn line(dim: usize, coord: usize) -> Self {
        Self {
            base: ComplexVec::zeros(dim),
            coord,
        }
    }

    pub fn embed(&self, w: Complex64) -> ComplexVec {
        let mut p = self.base.clone();
        p[self.coord] = w;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitContinuation {
    pub result: ContinuationResult,
    pub path: Vec<Complex64>,
    pub flow_time: f64,
}

/// Continues `g` along the orbit of `field` from `g.center` for flow time `t`
/// (negative `t` runs the flow backwards), after checking that the field
/// is tangent to `slice` along the orbit.
pub fn continue_along_orbit(
    field: &VectorFieldSpec,
    slice: &Slice,
    g: &Germ,
    t: f64,
    cfg: &StepConfig,
) -> Result<OrbitContinuation, ContError> {
    if !t.is_finite() {
        return Err(ContError::InvalidPath("flow time must be finite".into()));
    }
    if t == 0.0 {
        return Ok(OrbitContinuation {
            result: ContinuationResult {
                final_germ: g.clone(),
                steps: 0,
            },
            path: vec![g.center],
            flow_time: 0.0,
        });
    }
    let n = 32 * (t.abs().ceil() as usize) + 1;
    let times: Vec<f64> = (0..n).map(|i| t * i as f64 / (n - 1) as f64).collect();
    let mut sorted = times.clone();
    if t < 0.0 {
        sorted.reverse();
    }
    let seed = slice.embed(g.center);
    let traj = sample_at_times(field, &seed, &sorted, &FlowConfig::default())?;
    if traj.truncated() {
        return Err(ContError::InvalidPath("orbit left the flow's range".into()));
    }
    let mut points = traj.points;
    if t < 0.0 {
        points.reverse();
    }
    for p in &points {
        let v = field.eval(p)?;
        let transverse = (0..v.dim())
            .filter(|&j| j != slice.coord)
            .map(|j| v[j].norm())
            .fold(0.0, f64::max)
            .max((0..p.dim()).filter(|&j| j != slice.coord).map(|j| (p[j] - slice.base[j]).norm()).fold(0.0, f64::max));
        if transverse > 1e-12 * (1.0 + v.norm()) {
            return Err(ContError::SliceNotInvariant {
                point: p.clone(),
                transverse,
            });
        }
    }
    let mut path: Vec<Complex64> = points.iter().map(|p| p[slice.coord]).collect();
    path.dedup();
    let spec = PathSpec::new(path.clone(), "orbit")?;
    let result = continue_along(g, &spec, cfg)?;
    Ok(OrbitContinuation { result, path, flow_time: t })
}

/// JSON description of a germ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GermSpec {
    /// `sqrt_at`, `log_at` or `neg_i_log_at`.
    Named {
        name: String,
        center: [f64; 2],
        #[serde(default)]
        order: Option<usize>,
    },
    Polynomial { coeffs: Vec<[f64; 2]> },
    Series {
        center: [f64; 2],
        coeffs: Vec<[f64; 2]>,
        #[serde(default)]
        known_singularities: Vec<[f64; 2]>,
    },
}

impl GermSpec {
    pub fn build(&self) -> Result<Germ, ContError> {
        let z = |p: &[f64; 2]| c(p[0], p[1]);
        match self {
            Self::Named { name, center, order } => {
                let order = order.unwrap_or(DEFAULT_ORDER);
                match name.as_str() {
                    "sqrt_at" => Germ::sqrt_at(z(center), order),
                    "log_at" => Germ::log_at(z(center), order),
                    "neg_i_log_at" => Germ::neg_i_log_at(z(center), order),
                    other => Err(ContError::InvalidGerm(format!("unknown named germ `{other}`"))),
                }
            }
            Self::Polynomial { coeffs } => Germ::polynomial(coeffs.iter().map(z).collect()),
            Self::Series {
                center,
                coeffs,
                known_singularities,
            } => Germ::new(z(center), coeffs.iter().map(z).collect(), known_singularities.iter().map(z).collect()),
        }
    }
}
