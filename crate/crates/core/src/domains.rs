//! Domains in `C^n` and their intersections with orbits.
//!
//! Every domain exposes a signed margin, positive inside. Orbit intersections
//! are found by sampling the margin along a trajectory, bisecting sign changes
//! and refining interior minima of the margin so that tangential contacts with
//! the boundary split a component instead of being stepped over.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::ScalarField;
use crate::fields::{golden_min, sample_at_times, FlowConfig, FlowError, VectorFieldSpec};
use crate::registry::{self, FnRef};
use crate::types::ComplexVec;

/// A sample counts as inside only when its margin exceeds this.
pub const INSIDE_MARGIN: f64 = 1e-12;
/// Refined margin minima at or below this are boundary contacts.
pub const TOUCH_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("seed set is empty")]
    EmptySeedSet,
    #[error("no sample of the base lies inside the window")]
    EmptyBase,
    #[error("box parameters must satisfy 0 < delta < eps < 1, got eps = {eps}, delta = {delta}")]
    BoxParameters { eps: f64, delta: f64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Subsets of `R^2`, used as tube bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanarSet {
    /// `{x₂ < 2α/3, and x₂ < x₁³ − x₁ when −α < x₁ < 2α}`.
    CubicNotch { alpha: f64 },
    /// Open convex polygon, vertices counterclockwise.
    Polygon { vertices: Vec<[f64; 2]> },
    Disc { center: [f64; 2], radius: f64 },
    /// Open axis-parallel rectangle.
    Rect { lo: [f64; 2], hi: [f64; 2] },
    Union { sets: Vec<PlanarSet> },
}

impl PlanarSet {
    pub fn cubic_notch() -> Self {
        Self::CubicNotch { alpha: 1.0 / 3f64.sqrt() }
    }

    pub fn margin(&self, x1: f64, x2: f64) -> f64 {
        match self {
            Self::CubicNotch { alpha } => {
                let cap = 2.0 * alpha / 3.0 - x2;
                if -alpha < x1 && x1 < 2.0 * alpha {
                    cap.min(x1 * x1 * x1 - x1 - x2)
                } else {
                    cap
                }
            }
            Self::Polygon { vertices } => polygon_margin(vertices, x1, x2),
            Self::Disc { center, radius } => radius - (x1 - center[0]).hypot(x2 - center[1]),
            Self::Rect { lo, hi } => (x1 - lo[0]).min(hi[0] - x1).min(x2 - lo[1]).min(hi[1] - x2),
            Self::Union { sets } => sets.iter().map(|s| s.margin(x1, x2)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        self.margin(x1, x2) > INSIDE_MARGIN
    }
}

fn polygon_margin(vertices: &[[f64; 2]], x1: f64, x2: f64) -> f64 {
    if vertices.len() < 3 {
        return f64::NEG_INFINITY;
    }
    let mut m = f64::INFINITY;
    for (i, a) in vertices.iter().enumerate() {
        let b = vertices[(i + 1) % vertices.len()];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = ex.hypot(ey);
        if len == 0.0 {
            continue;
        }
        // left of a counterclockwise edge is inside
        m = m.min((ex * (x2 - a[1]) - ey * (x1 - a[0])) / len);
    }
    m
}

pub type Predicate = Arc<dyn Fn(&ComplexVec) -> bool + Send + Sync>;

/// The domain classes of the laboratory.
#[derive(Clone)]
pub enum DomainSpec {
    /// Bare membership oracle, with optional stored parameters for reporting.
    Membership {
        pred: Predicate,
        label: String,
        params: Vec<(String, f64)>,
    },
    /// `{(z, x + iy) : y < u(z, x), |(z, x)| < r, |y| < r}`; `u` is evaluated at
    /// `(z, x + 0i)`.
    Subgraph { u: ScalarField, r: f64 },
    /// `base + iR²` in `C²`.
    Tube { base: PlanarSet },
    /// `Σ c_j |z_j|² < r²`.
    Ellipsoid { c: Vec<f64>, r: f64 },
    Ball { center: ComplexVec, radius: f64 },
    Sublevel { rho: ScalarField, level: f64 },
    /// `normal · x < offset` in real coordinates.
    HalfPlane { normal: Vec<f64>, offset: f64 },
    Intersection(Vec<DomainSpec>),
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Membership { label, params, .. } => write!(f, "Membership({label}, {params:?})"),
            Self::Subgraph { u, r } => write!(f, "Subgraph({:?}, r={r})", u.label()),
            Self::Tube { base } => write!(f, "Tube({base:?})"),
            Self::Ellipsoid { c, r } => write!(f, "Ellipsoid({c:?}, r={r})"),
            Self::Ball { center, radius } => write!(f, "Ball({center:?}, {radius})"),
            Self::Sublevel { rho, level } => write!(f, "Sublevel({:?} < {level})", rho.label()),
            Self::HalfPlane { normal, offset } => write!(f, "HalfPlane({normal:?} . x < {offset})"),
            Self::Intersection(parts) => f.debug_tuple("Intersection").field(parts).finish(),
        }
    }
}

impl DomainSpec {
    pub fn membership(label: impl Into<String>, pred: impl Fn(&ComplexVec) -> bool + Send + Sync + 'static) -> Self {
        Self::Membership {
            pred: Arc::new(pred),
            label: label.into(),
            params: Vec::new(),
        }
    }

    pub fn ellipsoid(c: Vec<f64>, r: f64) -> Result<Self, DomainError> {
        if c.iter().any(|&cj| !(cj > 0.0)) || !(r > 0.0) {
            return Err(DomainError::Invalid(format!("ellipsoid needs positive weights and radius, got {c:?}, {r}")));
        }
        Ok(Self::Ellipsoid { c, r })
    }

    pub fn half_plane(normal: Vec<f64>, offset: f64) -> Result<Self, DomainError> {
        let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(len > 0.0) {
            return Err(DomainError::Invalid("half-plane normal must be nonzero".into()));
        }
        Ok(Self::HalfPlane {
            normal: normal.iter().map(|v| v / len).collect(),
            offset: offset / len,
        })
    }

    pub fn subgraph(u: ScalarField, r: f64) -> Result<Self, DomainError> {
        if !(r > 0.0) {
            return Err(DomainError::Invalid("subgraph box radius must be positive".into()));
        }
        Ok(Self::Subgraph { u, r })
    }

    /// Signed distance-like margin, positive inside. `None` for bare oracles.
    pub fn margin(&self, p: &ComplexVec) -> Option<f64> {
        Some(match self {
            Self::Membership { .. } => return None,
            Self::Subgraph { u, r } => {
                let n = p.dim();
                let mut base = p.clone();
                base[n - 1].im = 0.0;
                let y = p[n - 1].im;
                (u.eval(&base) - y).min(r - base.norm()).min(r - y.abs())
            }
            Self::Tube { base } => base.margin(p[0].re, p[1].re),
            Self::Ellipsoid { c, r } => r * r - c.iter().zip(p.as_slice()).map(|(cj, z)| cj * z.norm_sqr()).sum::<f64>(),
            Self::Ball { center, radius } => radius - p.distance(center),
            Self::Sublevel { rho, level } => level - rho.eval(p),
            Self::HalfPlane { normal, offset } => {
                offset - normal.iter().zip(p.to_real()).map(|(a, b)| a * b).sum::<f64>()
            }
            Self::Intersection(parts) => {
                let mut m = f64::INFINITY;
                for part in parts {
                    m = m.min(part.margin(p)?);
                }
                m
            }
        })
    }

    pub fn contains(&self, p: &ComplexVec) -> bool {
        match self {
            Self::Membership { pred, .. } => pred(p),
            Self::Intersection(parts) => parts.iter().all(|d| d.contains(p)),
            _ => self.margin(p).is_some_and(|m| m > INSIDE_MARGIN && m.is_finite()),
        }
    }

    fn has_margin(&self) -> bool {
        match self {
            Self::Membership { .. } => false,
            Self::Intersection(parts) => parts.iter().all(Self::has_margin),
            _ => true,
        }
    }

    /// Stored parameters of a bare membership domain.
    pub fn params(&self) -> &[(String, f64)] {
        match self {
            Self::Membership { params, .. } => params,
            _ => &[],
        }
    }
}

/// The box `{|(z, x)| < δ, |y| < 3ε}` around the origin of `C^n`.
pub fn box_neighbourhood(eps: f64, delta: f64) -> Result<DomainSpec, DomainError> {
    if !(0.0 < delta && delta < eps && eps < 1.0) {
        return Err(DomainError::BoxParameters { eps, delta });
    }
    let y_half = 3.0 * eps;
    Ok(DomainSpec::Membership {
        pred: Arc::new(move |p: &ComplexVec| {
            let n = p.dim();
            let y = p[n - 1].im;
            let base = p.norm_sqr() - y * y;
            base.sqrt() < delta && y.abs() < y_half
        }),
        label: "box".into(),
        params: vec![("eps".into(), eps), ("delta".into(), delta), ("y_half_width".into(), y_half)],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Interval,
    Disconnected,
    Empty,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub t_lo: f64,
    pub t_hi: f64,
    /// The component reaches the lower end of the sampled range (read as `−∞`).
    pub open_below: bool,
    pub open_above: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_samples: usize,
    pub refine_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitIntersectionReport {
    pub seed: ComplexVec,
    pub t_range: (f64, f64),
    pub components: Vec<Component>,
    /// Flow times where the orbit touches the boundary from inside.
    pub touch_points: Vec<f64>,
    pub verdict: Verdict,
    pub resolution: Resolution,
    pub truncated_below: bool,
    pub truncated_above: bool,
    pub at_equilibrium: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectConfig {
    pub n_samples: usize,
    /// Sample doublings allowed while the component count changes.
    pub max_refine: usize,
    /// Bisection width for boundary crossings.
    pub t_accuracy: f64,
    pub flow: FlowConfig,
    pub parallel: bool,
}

impl Default for IntersectConfig {
    fn default() -> Self {
        Self {
            n_samples: 1001,
            max_refine: 4,
            t_accuracy: 1e-9,
            flow: FlowConfig::default(),
            parallel: true,
        }
    }
}

struct Sampler<'a> {
    field: &'a VectorFieldSpec,
    seed: &'a ComplexVec,
    domain: &'a DomainSpec,
    cfg: &'a IntersectConfig,
    exact: bool,
}

impl Sampler<'_> {
    fn point(&self, t: f64, base_t: f64, base: &ComplexVec) -> Option<ComplexVec> {
        let r = if self.exact {
            self.field.flow(self.seed, t, &self.cfg.flow)
        } else {
            self.field.flow(base, t - base_t, &self.cfg.flow)
        };
        r.ok()
    }

    fn inside(&self, p: &ComplexVec) -> bool {
        self.domain.contains(p)
    }

    /// Crossing time between `a` (state `inside_a`) and `b`.
    fn bisect(&self, mut a: f64, mut b: f64, inside_a: bool, base: &ComplexVec) -> f64 {
        let base_t = a;
        while (b - a).abs() > self.cfg.t_accuracy {
            let m = 0.5 * (a + b);
            match self.point(m, base_t, base) {
                Some(q) if self.inside(&q) == inside_a => a = m,
                _ => b = m,
            }
        }
        0.5 * (a + b)
    }
}

struct Pass {
    components: Vec<Component>,
    touches: Vec<f64>,
    truncated_below: bool,
    truncated_above: bool,
    at_equilibrium: bool,
}

fn one_pass(s: &Sampler<'_>, t_range: (f64, f64), n: usize) -> Result<Pass, FlowError> {
    let times: Vec<f64> = (0..n)
        .map(|i| t_range.0 + (t_range.1 - t_range.0) * i as f64 / (n - 1) as f64)
        .collect();
    let traj = sample_at_times(s.field, s.seed, &times, &s.cfg.flow)?;
    let inside: Vec<bool> = traj.points.iter().map(|p| s.inside(p)).collect();
    let margins: Option<Vec<f64>> = if s.domain.has_margin() {
        traj.points.iter().map(|p| s.domain.margin(p)).collect()
    } else {
        None
    };
    let last = traj.len().saturating_sub(1);
    let mut components = Vec::new();
    let mut touches = Vec::new();
    let mut i = 0;
    while i < traj.len() {
        if !inside[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < traj.len() && inside[i] {
            i += 1;
        }
        let end = i - 1;
        let open_below = start == 0 && !traj.truncated_below;
        let open_above = end == last && !traj.truncated_above;
        let t_lo = if start == 0 {
            traj.times[0]
        } else {
            s.bisect(traj.times[start], traj.times[start - 1], true, &traj.points[start])
        };
        let t_hi = if end == last {
            traj.times[last]
        } else {
            s.bisect(traj.times[end], traj.times[end + 1], true, &traj.points[end])
        };

        // boundary contacts split the run
        let mut cuts = Vec::new();
        if let Some(m) = &margins {
            for k in start + 1..end {
                if m[k] <= m[k - 1] && m[k] <= m[k + 1] {
                    let base = &traj.points[k - 1];
                    let base_t = traj.times[k - 1];
                    let f = |t: f64| {
                        s.point(t, base_t, base)
                            .and_then(|q| s.domain.margin(&q))
                            .unwrap_or(f64::INFINITY)
                    };
                    let (t, v) = golden_min(&f, traj.times[k - 1], traj.times[k + 1], 1e-12 * (1.0 + traj.times[k].abs()));
                    if v <= TOUCH_MARGIN {
                        cuts.push(t);
                    }
                }
            }
        }
        touches.extend(&cuts);
        let mut lo = t_lo;
        let mut lo_open = open_below;
        for &c in &cuts {
            components.push(Component { t_lo: lo, t_hi: c, open_below: lo_open, open_above: false });
            lo = c;
            lo_open = false;
        }
        components.push(Component { t_lo: lo, t_hi, open_below: lo_open, open_above });
    }
    Ok(Pass {
        components,
        touches,
        truncated_below: traj.truncated_below,
        truncated_above: traj.truncated_above,
        at_equilibrium: traj.at_equilibrium,
    })
}

/// Intersection of the orbit of `seed` (times in `t_range`) with `domain`.
pub fn orbit_intersection(
    field: &VectorFieldSpec,
    seed: &ComplexVec,
    domain: &DomainSpec,
    t_range: (f64, f64),
    cfg: &IntersectConfig,
) -> Result<OrbitIntersectionReport, DomainError> {
    if cfg.n_samples < 16 {
        return Err(DomainError::Invalid(format!("need at least 16 samples, got {}", cfg.n_samples)));
    }
    if !(t_range.0 < t_range.1) || !t_range.0.is_finite() || !t_range.1.is_finite() {
        return Err(DomainError::Invalid(format!("time range must be finite and increasing, got {t_range:?}")));
    }
    let sampler = Sampler {
        field,
        seed,
        domain,
        cfg,
        exact: field.has_closed_form(),
    };
    let mut prev = one_pass(&sampler, t_range, cfg.n_samples)?;
    let mut n = cfg.n_samples;
    let mut converged = false;
    let mut levels = 0;
    while levels < cfg.max_refine {
        levels += 1;
        n = 2 * n - 1;
        let next = one_pass(&sampler, t_range, n)?;
        let stable = next.components.len() == prev.components.len();
        prev = next;
        if stable {
            converged = true;
            break;
        }
    }
    let verdict = if !converged {
        Verdict::Unresolved
    } else {
        match prev.components.len() {
            0 => Verdict::Empty,
            1 => Verdict::Interval,
            _ => Verdict::Disconnected,
        }
    };
    Ok(OrbitIntersectionReport {
        seed: seed.clone(),
        t_range,
        components: prev.components,
        touch_points: prev.touches,
        verdict,
        resolution: Resolution {
            n_samples: n,
            refine_levels: levels,
        },
        truncated_below: prev.truncated_below,
        truncated_above: prev.truncated_above,
        at_equilibrium: prev.at_equilibrium,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregateVerdict {
    /// Every sampled orbit passed; this is evidence, not a proof.
    CertifiedOnSamples,
    Refuted,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub verdict: AggregateVerdict,
    pub per_seed: Vec<OrbitIntersectionReport>,
    /// Seeds whose orbit failed the property.
    pub witnesses: Vec<ComplexVec>,
    pub unresolved: Vec<ComplexVec>,
    pub t_range: (f64, f64),
    pub note: String,
}

const SAMPLING_NOTE: &str = "verdict covers the sampled orbits and time window only";

fn run_seeds(
    field: &VectorFieldSpec,
    domain: &DomainSpec,
    seeds: &[ComplexVec],
    t_range: (f64, f64),
    cfg: &IntersectConfig,
) -> Result<Vec<OrbitIntersectionReport>, DomainError> {
    if seeds.is_empty() {
        return Err(DomainError::EmptySeedSet);
    }
    let run = |s: &ComplexVec| orbit_intersection(field, s, domain, t_range, cfg);
    if cfg.parallel {
        seeds.par_iter().map(run).collect()
    } else {
        seeds.iter().map(run).collect()
    }
}

fn aggregate(
    per_seed: Vec<OrbitIntersectionReport>,
    t_range: (f64, f64),
    passes: impl Fn(&OrbitIntersectionReport) -> bool,
) -> AggregateReport {
    let mut witnesses = Vec::new();
    let mut unresolved = Vec::new();
    for r in &per_seed {
        if r.verdict == Verdict::Unresolved {
            unresolved.push(r.seed.clone());
        } else if !passes(r) {
            witnesses.push(r.seed.clone());
        }
    }
    let verdict = if !witnesses.is_empty() {
        AggregateVerdict::Refuted
    } else if !unresolved.is_empty() {
        AggregateVerdict::Unresolved
    } else {
        AggregateVerdict::CertifiedOnSamples
    };
    AggregateReport {
        verdict,
        per_seed,
        witnesses,
        unresolved,
        t_range,
        note: SAMPLING_NOTE.into(),
    }
}

/// Checks that every sampled orbit meets `domain` in a nonempty connected set.
pub fn is_interval_domain(
    field: &VectorFieldSpec,
    domain: &DomainSpec,
    seeds: &[ComplexVec],
    t_range: (f64, f64),
    cfg: &IntersectConfig,
) -> Result<AggregateReport, DomainError> {
    let per_seed = run_seeds(field, domain, seeds, t_range, cfg)?;
    Ok(aggregate(per_seed, t_range, |r| r.verdict == Verdict::Interval))
}

/// Checks that every sampled orbit meets `domain` in a backwards semiorbit:
/// one component reaching the lower end of the time window.
pub fn is_half_space(
    field: &VectorFieldSpec,
    domain: &DomainSpec,
    seeds: &[ComplexVec],
    t_range: (f64, f64),
    cfg: &IntersectConfig,
) -> Result<AggregateReport, DomainError> {
    let per_seed = run_seeds(field, domain, seeds, t_range, cfg)?;
    Ok(aggregate(per_seed, t_range, |r| {
        r.verdict == Verdict::Interval && r.components[0].open_below
    }))
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counterclockwise convex hull (monotone chain), collinear points dropped.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.iter().copied().filter(|p| p[0].is_finite() && p[1].is_finite()).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Window {
    pub fn square(half: f64) -> Self {
        Self {
            x: (-half, half),
            y: (-half, half),
        }
    }
}

/// Grid points of `window` lying in `base`.
pub fn sample_base(base: &PlanarSet, window: &Window, per_axis: usize) -> Vec<[f64; 2]> {
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64;
    (0..per_axis)
        .flat_map(|i| (0..per_axis).map(move |j| (i, j)))
        .map(|(i, j)| [step(window.x.0, window.x.1, i), step(window.y.0, window.y.1, j)])
        .filter(|p| base.contains(p[0], p[1]))
        .collect()
}

/// Envelope of a tube over `window`: the tube over the convex hull of the sampled base.
pub fn tube_envelope(base: &PlanarSet, window: &Window, per_axis: usize) -> Result<PlanarSet, DomainError> {
    if per_axis < 2 {
        return Err(DomainError::Invalid("need at least two samples per axis".into()));
    }
    let pts = sample_base(base, window, per_axis);
    if pts.is_empty() {
        return Err(DomainError::EmptyBase);
    }
    Ok(PlanarSet::Polygon {
        vertices: convex_hull_2d(&pts),
    })
}

/// JSON form of a domain; scalar fields are named registry entries.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainJson {
    Subgraph { u: FnRef, r: f64 },
    Tube { base: PlanarSet },
    Ellipsoid { c: Vec<f64>, r: f64 },
    Ball { center: ComplexVec, radius: f64 },
    Sublevel { rho: FnRef, level: f64 },
    HalfPlane { normal: Vec<f64>, offset: f64 },
    Box { eps: f64, delta: f64 },
    /// `C` minus the closed negative real axis.
    SlitPlane,
    Intersection { parts: Vec<DomainJson> },
}

impl DomainJson {
    pub fn build(&self) -> Result<DomainSpec, String> {
        let s = |e: DomainError| e.to_string();
        Ok(match self {
            Self::Subgraph { u, r } => DomainSpec::subgraph(registry::scalar_field(u)?, *r).map_err(s)?,
            Self::Tube { base } => DomainSpec::Tube { base: base.clone() },
            Self::Ellipsoid { c, r } => DomainSpec::ellipsoid(c.clone(), *r).map_err(s)?,
            Self::Ball { center, radius } => DomainSpec::Ball {
                center: center.clone(),
                radius: *radius,
            },
            Self::Sublevel { rho, level } => DomainSpec::Sublevel {
                rho: registry::scalar_field(rho)?,
                level: *level,
            },
            Self::HalfPlane { normal, offset } => DomainSpec::half_plane(normal.clone(), *offset).map_err(s)?,
            Self::Box { eps, delta } => box_neighbourhood(*eps, *delta).map_err(s)?,
            Self::SlitPlane => slit_plane(),
            Self::Intersection { parts } => {
                DomainSpec::Intersection(parts.iter().map(Self::build).collect::<Result<_, _>>()?)
            }
        })
    }
}

/// `C ∖ (−∞, 0]`.
pub fn slit_plane() -> DomainSpec {
    DomainSpec::membership("slit_plane", |p| !(p[0].im == 0.0 && p[0].re <= 0.0))
}
