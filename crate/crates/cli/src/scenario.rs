//! Scenario and manifest schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use schlicht_core::continuation::GermSpec;
use schlicht_core::domains::{DomainJson, Window};
use schlicht_core::fields::FieldJson;
use schlicht_core::form::{MatrixJson, QuadraticFormJson};
use schlicht_core::registry::FnRef;
use schlicht_core::ComplexVec;

pub const DEFAULT_RNG_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub rng_seed: Option<u64>,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(flatten)]
    pub op: Operation,
    #[serde(default)]
    pub rng_seed: Option<u64>,
    #[serde(default)]
    pub expected: Option<Expected>,
}

/// Expected verdict values; numbers match within `tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub verdicts: BTreeMap<String, Value>,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    Counterexample(CounterexampleSpec),
    Figure1(FigureSpec),
    Thm51(Thm51Spec),
    Classify(ClassifySpec),
    ClassifyTable(ClassifyTableSpec),
    Rectify(RectifySpec),
    Continue(ContinueSpec),
    ContinueOrbit(ContinueOrbitSpec),
    Linear(LinearSpec),
    Constancy(ConstancySpec),
    Compactness(CompactnessSpec),
    HalfSpace(HalfSpaceSpec),
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Counterexample(_) => "counterexample",
            Self::Figure1(_) => "figure1",
            Self::Thm51(_) => "thm51",
            Self::Classify(_) => "classify",
            Self::ClassifyTable(_) => "classify_table",
            Self::Rectify(_) => "rectify",
            Self::Continue(_) => "continue",
            Self::ContinueOrbit(_) => "continue_orbit",
            Self::Linear(_) => "linear",
            Self::Constancy(_) => "constancy",
            Self::Compactness(_) => "compactness",
            Self::HalfSpace(_) => "half_space",
        }
    }
}

fn t10() -> (f64, f64) {
    (-10.0, 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    #[serde(default = "t10")]
    pub t_range: (f64, f64),
    /// Seed grid per axis over `[−1.5, 1.5]²`.
    #[serde(default = "d9")]
    pub seeds_per_axis: usize,
    /// Samples per axis for the sampled hull.
    #[serde(default = "d601")]
    pub hull_grid: usize,
    #[serde(default = "d201")]
    pub figure_samples: usize,
}

impl Default for CounterexampleSpec {
    fn default() -> Self {
        Self {
            t_range: t10(),
            seeds_per_axis: 9,
            hull_grid: 601,
            figure_samples: 201,
        }
    }
}

fn d9() -> usize {
    9
}
fn d601() -> usize {
    601
}
fn d201() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSpec {
    #[serde(default = "d201")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhoSpec {
    Named {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    /// `|z1|² − |z2|²` plus a cubic in the real coordinates with random coefficients.
    SaddleRandomCubic {
        max_coef: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn r01() -> f64 {
    0.1
}
fn d21() -> usize {
    21
}
fn d2() -> usize {
    2
}
fn d10000() -> usize {
    10_000
}
fn d2000() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thm51Spec {
    pub rho: RhoSpec,
    #[serde(default = "d2")]
    pub n: usize,
    #[serde(default = "r01")]
    pub r: f64,
    #[serde(default = "d21")]
    pub grid: usize,
    #[serde(default)]
    pub refine_grid: Option<usize>,
    #[serde(default = "d10000")]
    pub n_samples: usize,
    #[serde(default = "d2000")]
    pub n_entry: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    pub form: QuadraticFormJson,
}

fn d100() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyTableSpec {
    #[serde(default = "d100")]
    pub count: usize,
}

fn d101() -> usize {
    101
}
fn d2001() -> usize {
    2001
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectifySpec {
    pub alpha: FnRef,
    pub window: Window,
    #[serde(default = "d101")]
    pub grid: usize,
    #[serde(default = "d2001")]
    pub n_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathJson {
    Waypoints {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        description: String,
    },
    Segment {
        from: [f64; 2],
        to: [f64; 2],
    },
    Circle {
        center: [f64; 2],
        radius: f64,
        #[serde(default = "d64")]
        n: usize,
        #[serde(default)]
        start: f64,
        #[serde(default)]
        clockwise: bool,
        #[serde(default = "one")]
        turns: usize,
    },
}

fn d64() -> usize {
    64
}
fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinueSpec {
    pub germ: GermSpec,
    pub path: PathJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinueOrbitSpec {
    pub field: FieldJson,
    pub germ: GermSpec,
    /// Flow time; negative runs the flow backwards.
    pub t: f64,
    #[serde(default)]
    pub coord: usize,
}

fn d50() -> f64 {
    50.0
}
fn tol6() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub matrix: MatrixJson,
    #[serde(default)]
    pub domain: Option<DomainJson>,
    pub seeds: Vec<ComplexVec>,
    #[serde(default = "t10")]
    pub t_range: (f64, f64),
    #[serde(default = "d50")]
    pub t_max: f64,
    #[serde(default = "tol6")]
    pub period_tol: f64,
}

fn t1() -> (f64, f64) {
    (-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstancySpec {
    pub field: FieldJson,
    pub alpha: FnRef,
    pub seeds: Vec<ComplexVec>,
    #[serde(default = "t1")]
    pub t_range: (f64, f64),
    #[serde(default = "d101")]
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactnessSpec {
    /// Holomorphic `g` from the registry; the field is `conj(g) ∂/∂z`.
    pub g: FnRef,
    pub seeds: Vec<[f64; 2]>,
    #[serde(default = "d50")]
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpaceSpec {
    pub field: FieldJson,
    pub domain: DomainJson,
    pub seeds: Vec<ComplexVec>,
    #[serde(default = "t10")]
    pub t_range: (f64, f64),
}
