//! One runner per operation. Each returns verdicts plus optional artifacts;
//! the driver in `lib.rs` handles expectations, files and exit codes.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use schlicht_core::continuation::{continue_along, continue_along_orbit, ContError, PathSpec, Slice, StepConfig};
use schlicht_core::domains::{
    is_half_space, is_interval_domain, orbit_intersection, tube_envelope, AggregateReport, AggregateVerdict,
    DomainSpec, IntersectConfig, PlanarSet, Verdict, Window,
};
use schlicht_core::fields::{PeriodConfig, PlanePolynomial, VectorFieldSpec};
use schlicht_core::form::{matrix_from_json, QuadraticForm};
use schlicht_core::linearfields::{analyze_linear, certify_interval_hypothesis, compact_orbit_test};
use schlicht_core::quasihol::{
    antiholomorphic_compactness, classify_quadratic_gradient, obstruction_constancy_test, reallinear_quasihol_test,
    rectify, ClassVerdict, ConstancyConfig, QuasiholError, RectifyConfig,
};
use schlicht_core::registry::{holomorphic_scalar, scalar_field};
use schlicht_core::singularities::{
    build_family, certify_yr, extract_model, verify_entry_inequality, verify_increasing, verify_orbit_convexity,
    JetConfig,
};
use schlicht_core::{Complex64, ComplexVec, ScalarField};

use crate::scenario::*;

/// Failure of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// Bad scenario input; maps to exit code 4.
    Input(String),
    /// The numerics could not produce an answer.
    Numeric(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Input(m) => write!(f, "input error: {m}"),
            Self::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

fn input<E: ToString>(e: E) -> RunError {
    RunError::Input(e.to_string())
}

fn numeric<E: ToString>(e: E) -> RunError {
    RunError::Numeric(e.to_string())
}

/// Knobs shared by all runners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunContext {
    pub rng_seed: u64,
    /// Overrides the per-axis seed grid of grid-based scenarios.
    pub seeds_per_axis: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub verdicts: BTreeMap<String, Value>,
    pub witnesses: Vec<Value>,
    pub tolerances: BTreeMap<String, f64>,
    pub unresolved: bool,
    /// File name and contents.
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    fn put(&mut self, key: &str, v: impl Serialize) {
        self.verdicts
            .insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn tol(&mut self, key: &str, v: f64) {
        self.tolerances.insert(key.to_string(), v);
    }

    fn witness(&mut self, v: impl Serialize) {
        self.witnesses.push(serde_json::to_value(v).unwrap_or(Value::Null));
    }
}

pub fn run(op: &Operation, ctx: &RunContext) -> Result<Outcome, RunError> {
    match op {
        Operation::Counterexample(s) => counterexample(s, ctx),
        Operation::Figure1(s) => figure1(s),
        Operation::Thm51(s) => thm51(s, ctx),
        Operation::Classify(s) => classify(s),
        Operation::ClassifyTable(s) => classify_table(s, ctx),
        Operation::Rectify(s) => rectify_op(s),
        Operation::Continue(s) => continue_op(s),
        Operation::ContinueOrbit(s) => continue_orbit(s),
        Operation::Linear(s) => linear(s),
        Operation::Constancy(s) => constancy(s),
        Operation::Compactness(s) => compactness(s),
        Operation::HalfSpace(s) => half_space(s),
    }
}

fn alpha() -> f64 {
    1.0 / 3f64.sqrt()
}

fn f0() -> VectorFieldSpec {
    VectorFieldSpec::PolynomialPlane(PlanePolynomial::cubic_counterexample())
}

fn components(r: &schlicht_core::OrbitIntersectionReport) -> Vec<[Value; 2]> {
    r.components
        .iter()
        .map(|c| {
            let lo = if c.open_below { json!("-inf") } else { json!(c.t_lo) };
            let hi = if c.open_above { json!("+inf") } else { json!(c.t_hi) };
            [lo, hi]
        })
        .collect()
}

fn grid_seeds(half: f64, per_axis: usize) -> Vec<ComplexVec> {
    let at = |i: usize| -half + 2.0 * half * i as f64 / (per_axis - 1) as f64;
    (0..per_axis)
        .flat_map(|i| (0..per_axis).map(move |j| ComplexVec::from_reals(&[at(i), at(j)])))
        .collect()
}

fn figure_csvs(samples: usize) -> Vec<(String, String)> {
    // boundary curve over the notch, the hull's top line over a wider range
    let n = samples.max(2);
    let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut curve = String::from("x1,x2\n");
    let mut line = String::from("x1,x2\n");
    let top = 2.0 * alpha() / 3.0;
    for i in 0..n {
        let x = at(-alpha(), 2.0 * alpha(), i);
        curve.push_str(&format!("{x},{}\n", x * x * x - x));
        line.push_str(&format!("{},{top}\n", at(-1.5, 1.5, i)));
    }
    vec![("figure1_curve.csv".into(), curve), ("figure1_line.csv".into(), line)]
}

fn aggregate_unresolved(a: &AggregateReport) -> bool {
    a.verdict == AggregateVerdict::Unresolved
}

fn counterexample(s: &CounterexampleSpec, ctx: &RunContext) -> Result<Outcome, RunError> {
    let per_axis = ctx.seeds_per_axis.unwrap_or(s.seeds_per_axis);
    if per_axis < 2 || s.hull_grid < 2 {
        return Err(input("grids need at least two points per axis"));
    }
    let cfg = IntersectConfig::default();
    let field = f0();
    let origin = ComplexVec::zeros(2);
    let y0 = DomainSpec::Tube {
        base: PlanarSet::cubic_notch(),
    };
    let top = 2.0 * alpha() / 3.0;
    let hull = DomainSpec::half_plane(vec![0.0, 0.0, 1.0, 0.0], top).map_err(input)?;
    let seeds = grid_seeds(1.5, per_axis);

    let mut out = Outcome::default();
    let y0_origin = orbit_intersection(&field, &origin, &y0, s.t_range, &cfg).map_err(numeric)?;
    let y0_all = is_interval_domain(&field, &y0, &seeds, s.t_range, &cfg).map_err(numeric)?;
    let hull_origin = orbit_intersection(&field, &origin, &hull, s.t_range, &cfg).map_err(numeric)?;
    let hull_all = is_interval_domain(&field, &hull, &seeds, s.t_range, &cfg).map_err(numeric)?;

    let env = tube_envelope(&PlanarSet::cubic_notch(), &Window::square(3.0), s.hull_grid).map_err(numeric)?;
    let sampled_top = match &env {
        PlanarSet::Polygon { vertices } => vertices.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max),
        _ => f64::NAN,
    };
    let spacing = 6.0 / (s.hull_grid - 1) as f64;

    out.put("y0_origin_verdict", y0_origin.verdict);
    out.put("y0_origin_components", components(&y0_origin));
    out.put("y0_certification", y0_all.verdict);
    out.put("hull_top_exact", top);
    out.put("hull_top_sampled", sampled_top);
    out.put("hull_top_sampled_ok", (top - sampled_top).abs() <= spacing);
    out.put("hull_origin_verdict", hull_origin.verdict);
    out.put("hull_origin_components", components(&hull_origin));
    out.put("hull_certification", hull_all.verdict);
    out.put("n_seeds", seeds.len());
    let (gap, reentry) = match hull_origin.components.as_slice() {
        [a, b] => (json!([a.t_hi, b.t_lo]), json!(b.t_hi)),
        _ => (Value::Null, Value::Null),
    };
    out.put("gap", gap);
    out.put("exit_time", reentry);
    out.tol("t_accuracy", cfg.t_accuracy);
    out.tol("flow_tol", cfg.flow.tol);
    out.tol("hull_sampling_spacing", spacing);
    for w in &hull_all.witnesses {
        out.witness(json!({"domain": "hull", "seed": w}));
    }
    for w in &y0_all.witnesses {
        out.witness(json!({"domain": "y0", "seed": w}));
    }
    out.unresolved = aggregate_unresolved(&y0_all)
        || aggregate_unresolved(&hull_all)
        || y0_origin.verdict == Verdict::Unresolved
        || hull_origin.verdict == Verdict::Unresolved;
    out.artifacts = figure_csvs(s.figure_samples);
    Ok(out)
}

fn figure1(s: &FigureSpec) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    out.put("samples", s.samples.max(2));
    out.put("line_height", 2.0 * alpha() / 3.0);
    out.put("notch", [-alpha(), 2.0 * alpha()]);
    out.artifacts = figure_csvs(s.samples);
    Ok(out)
}

/// `|z1|² − |z2|² + Σ c_ijk x_i x_j x_k` with `|c_ijk| ≤ max_coef`.
fn saddle_random_cubic(max_coef: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cubic = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            for k in j..4 {
                cubic.push((i, j, k, rng.gen_range(-max_coef..=max_coef)));
            }
        }
    }
    ScalarField::new(move |p| {
        let x = p.to_real();
        let quad = x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3];
        quad + cubic.iter().map(|&(i, j, k, a)| a * x[i] * x[j] * x[k]).sum::<f64>()
    })
}

fn thm51(s: &Thm51Spec, ctx: &RunContext) -> Result<Outcome, RunError> {
    let rho = match &s.rho {
        RhoSpec::Named { name, params } => scalar_field(&schlicht_core::registry::FnRef::new(name.clone(), params))
            .map_err(input)?,
        RhoSpec::SaddleRandomCubic { max_coef, seed } => {
            if s.n != 2 {
                return Err(input("saddle_random_cubic lives on C^2"));
            }
            if !(*max_coef >= 0.0) {
                return Err(input("max_coef must be nonnegative"));
            }
            saddle_random_cubic(*max_coef, seed.unwrap_or(ctx.rng_seed))
        }
    };
    if !(s.r > 0.0) {
        return Err(input("r must be positive"));
    }
    let grid = ctx.seeds_per_axis.unwrap_or(s.grid);
    let model = extract_model(&rho, s.n, &JetConfig::default()).map_err(numeric)?;
    let family = build_family(&model).map_err(numeric)?;
    let inc = verify_increasing(&model, 0.01 * s.r, s.r, s.n_samples, ctx.rng_seed).map_err(numeric)?;
    let entry = verify_entry_inequality(&family, &model, s.r, s.n_entry, ctx.rng_seed.wrapping_add(1))
        .map_err(numeric)?;

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.rng_seed.wrapping_add(2));
    let conv_seeds: Vec<ComplexVec> = (0..16)
        .map(|_| {
            let x: Vec<f64> = (0..2 * s.n).map(|_| rng.gen_range(-s.r..s.r)).collect();
            ComplexVec::from_real(&x)
        })
        .collect();
    let conv = verify_orbit_convexity(&family, &conv_seeds, (-1.0, 1.0), 11).map_err(numeric)?;

    let cfg = IntersectConfig::default();
    let yr = certify_yr(&model, &family, s.r, grid, &cfg).map_err(numeric)?;
    let refined = match s.refine_grid {
        Some(g) => Some(certify_yr(&model, &family, s.r, g, &cfg).map_err(numeric)?),
        None => None,
    };

    let mut out = Outcome::default();
    out.put("eigen", &model.eigen);
    out.put("k", model.k);
    out.put("hypotheses", model.flags);
    out.put("eps", family.eps);
    out.put("c", &family.c);
    out.put("identity_defect", family.identity_defect());
    out.put("increasing_passed", inc.passed);
    out.put("increasing_min", inc.min_value);
    out.put("increasing_samples", inc.n_samples);
    out.put("convexity_passed", conv.passed);
    out.put("entry_passed", entry.passed);
    out.put("entry_points", entry.n_entry);
    out.put("yr_verdict", yr.aggregate.verdict);
    out.put("yr_seeds", yr.aggregate.per_seed.len());
    if let Some(r) = &refined {
        out.put("yr_refined_verdict", r.aggregate.verdict);
    }
    let yr_ok = yr.aggregate.verdict == AggregateVerdict::CertifiedOnSamples
        && refined
            .as_ref()
            .is_none_or(|r| r.aggregate.verdict == AggregateVerdict::CertifiedOnSamples);
    out.put("all_passed", inc.passed && conv.passed && entry.passed && yr_ok);
    out.tol("convexity", conv.tol);
    out.tol("t_accuracy", cfg.t_accuracy);
    for w in inc.witnesses.iter().chain(&entry.witnesses).chain(&yr.aggregate.witnesses) {
        out.witness(w);
    }
    out.unresolved = aggregate_unresolved(&yr.aggregate) || refined.as_ref().is_some_and(|r| aggregate_unresolved(&r.aggregate));
    Ok(out)
}

fn classify(s: &ClassifySpec) -> Result<Outcome, RunError> {
    let q = QuadraticForm::try_from(&s.form).map_err(input)?;
    let mut out = Outcome::default();
    match classify_quadratic_gradient(&q) {
        Ok(v) => {
            out.put("verdict", v.verdict);
            out.put("evidence", v.evidence);
        }
        Err(QuasiholError::DegenerateForm { min_abs_eigenvalue }) => {
            out.put("verdict", "Degenerate");
            out.put("min_abs_hessian_eigenvalue", min_abs_eigenvalue);
        }
        Err(e) => return Err(numeric(e)),
    }
    out.tol("nondegeneracy_floor", schlicht_core::quasihol::NONDEGENERACY_FLOOR);
    out.tol("zero_part", schlicht_core::quasihol::ZERO_PART_TOL);
    Ok(out)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, adjoint: bool) -> nalgebra::DMatrix<Complex64> {
    let m = nalgebra::DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let t = if adjoint { m.adjoint() } else { m.transpose() };
    (&m + t) * Complex64::new(0.5, 0.0)
}

/// Random forms from the three classes, checked against the class they were drawn from.
fn classify_table(s: &ClassifyTableSpec, ctx: &RunContext) -> Result<Outcome, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.rng_seed);
    let mut counts = [0usize; 3];
    let mut wrong = Vec::new();
    let mut done = 0;
    while done < s.count {
        let kind = done % 3;
        let (h, sm, expected) = match kind {
            0 => {
                let n = rng.gen_range(1..=3);
                (random_matrix(&mut rng, n, true), nalgebra::DMatrix::zeros(n, n), ClassVerdict::HermitianCase)
            }
            1 => {
                let a = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                (nalgebra::DMatrix::zeros(1, 1), nalgebra::DMatrix::from_element(1, 1, a), ClassVerdict::HarmonicN1Case)
            }
            _ => {
                let n = rng.gen_range(1..=3);
                let h = random_matrix(&mut rng, n, true);
                (h, random_matrix(&mut rng, n, false), ClassVerdict::Incompatible)
            }
        };
        let q = QuadraticForm::new(h, sm).map_err(numeric)?;
        let Ok(v) = classify_quadratic_gradient(&q) else {
            continue;
        };
        counts[kind] += 1;
        done += 1;
        if v.verdict != expected {
            wrong.push(json!({"expected": expected, "got": v.verdict, "form": schlicht_core::form::QuadraticFormJson::from(&q)}));
        }
    }
    let mut out = Outcome::default();
    out.put("count", s.count);
    out.put("hermitian_case", counts[0]);
    out.put("harmonic_n1_case", counts[1]);
    out.put("incompatible", counts[2]);
    out.put("misclassified", wrong.len());
    out.witnesses = wrong;
    Ok(out)
}

fn rectify_op(s: &RectifySpec) -> Result<Outcome, RunError> {
    let alpha = scalar_field(&s.alpha).map_err(input)?;
    let cfg = RectifyConfig {
        grid: s.grid,
        n_levels: s.n_levels,
        ..RectifyConfig::default()
    };
    let mut out = Outcome::default();
    match rectify(&alpha, &s.window, None, &cfg) {
        Ok(r) => {
            out.put("rectified", true);
            out.put("residual", r.residual);
            out.put("injectivity_ok", r.injectivity_ok);
            out.put("level_range", r.level_range);
            let max_std = r.u_std.iter().copied().fold(0.0, f64::max);
            out.put("max_level_spread", max_std);
            let mut csv = String::from("level,w\n");
            for (l, w) in r.levels.iter().zip(&r.w) {
                csv.push_str(&format!("{l},{w}\n"));
            }
            out.artifacts.push(("rectify_w.csv".into(), csv));
            out.artifacts.push(("rectify_tables.csv".into(), r.to_csv()));
        }
        Err(e @ (QuasiholError::ObstructionNotLevelConstant { .. } | QuasiholError::NotSubmersion { .. })) => {
            out.put("rectified", false);
            out.put("reason", e.to_string());
        }
        Err(QuasiholError::Invalid(m)) => return Err(input(m)),
        Err(e) => return Err(numeric(e)),
    }
    out.tol("constancy", cfg.constancy_tol);
    out.tol("gradient_floor", cfg.gradient_floor);
    Ok(out)
}

fn z(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn build_path(p: &PathJson) -> Result<PathSpec, ContError> {
    match p {
        PathJson::Waypoints { points, description } => PathSpec::new(points.iter().map(z).collect(), description.clone()),
        PathJson::Segment { from, to } => PathSpec::segment(z(from), z(to)),
        PathJson::Circle {
            center,
            radius,
            n,
            start,
            clockwise,
            turns,
        } => PathSpec::circle(z(center), *radius, *n, *start, *clockwise, *turns),
    }
}

fn pair(w: Complex64) -> [f64; 2] {
    [w.re, w.im]
}

fn continue_op(s: &ContinueSpec) -> Result<Outcome, RunError> {
    let germ = s.germ.build().map_err(input)?;
    let path = build_path(&s.path).map_err(input)?;
    let cfg = StepConfig::default();
    let mut out = Outcome::default();
    // the path may start anywhere inside the germ's disc
    let start = germ.eval(path.waypoints[0]);
    out.put("initial_value", pair(start));
    out.put("closed_path", path.is_closed());
    match continue_along(&germ, &path, &cfg) {
        Ok(r) => {
            let fin = r.final_germ.value();
            out.put("outcome", "completed");
            out.put("final_value", pair(fin));
            out.put("final_center", pair(r.final_germ.center));
            out.put("steps", r.steps);
            if path.is_closed() {
                let m = fin - start;
                out.put("monodromy", pair(m));
                out.put("multivalued", m.norm() > 1e-8 * (1.0 + start.norm()));
            }
        }
        Err(ContError::SingularityEncountered { at, radius }) => {
            out.put("outcome", "singularity_encountered");
            out.put("singularity_near", pair(at));
            out.put("radius", radius);
        }
        Err(e @ (ContError::InvalidPath(_) | ContError::InvalidGerm(_) | ContError::StepTooLarge { .. })) => {
            return Err(input(e))
        }
        Err(e) => return Err(numeric(e)),
    }
    out.tol("step_fraction", cfg.step_fraction);
    out.tol("min_radius", cfg.min_radius);
    Ok(out)
}

fn continue_orbit(s: &ContinueOrbitSpec) -> Result<Outcome, RunError> {
    let field = s.field.build().map_err(input)?;
    let germ = s.germ.build().map_err(input)?;
    if s.coord >= field.dim() {
        return Err(input(format!("coord {} out of range for dimension {}", s.coord, field.dim())));
    }
    let slice = Slice::line(field.dim(), s.coord);
    let cfg = StepConfig::default();
    let mut out = Outcome::default();
    out.put("initial_value", pair(germ.value()));
    match continue_along_orbit(&field, &slice, &germ, s.t, &cfg) {
        Ok(r) => {
            out.put("outcome", "completed");
            out.put("final_value", pair(r.result.final_germ.value()));
            out.put("final_center", pair(r.result.final_germ.center));
            out.put("steps", r.result.steps);
            out.put("flow_time", r.flow_time);
        }
        Err(ContError::SingularityEncountered { at, radius }) => {
            out.put("outcome", "singularity_encountered");
            out.put("singularity_near", pair(at));
            out.put("radius", radius);
        }
        Err(e @ ContError::SliceNotInvariant { .. }) => return Err(input(e)),
        Err(e) => return Err(numeric(e)),
    }
    out.tol("step_fraction", cfg.step_fraction);
    Ok(out)
}

fn linear(s: &LinearSpec) -> Result<Outcome, RunError> {
    let a = matrix_from_json(&s.matrix).map_err(input)?;
    let analysis = analyze_linear(&a).map_err(input)?;
    let mut out = Outcome::default();
    let summary = analysis.summary();
    out.put("eigenvalues", &summary.eigenvalues);
    out.put("diagonalizable", summary.diagonalizable);
    out.put("imaginary_spectrum_indices", &summary.imaginary_spectrum_indices);
    out.put("commensurability", summary.commensurability);
    out.put("max_residual", summary.max_residual);
    let mut compact = Vec::new();
    let mut all_consistent = true;
    for z in &s.seeds {
        let r = compact_orbit_test(&analysis, z, s.t_max, s.period_tol).map_err(input)?;
        all_consistent &= r.consistent;
        compact.push(json!({
            "seed": r.seed,
            "detected_period": r.detected_period,
            "prediction": r.prediction,
            "consistent": r.consistent,
        }));
    }
    out.put("compact_orbits", compact);
    out.put("spectral_agreement", all_consistent);
    if let Some(d) = &s.domain {
        let domain = d.build().map_err(input)?;
        let rep = certify_interval_hypothesis(&analysis, &domain, &s.seeds, s.t_range, &IntersectConfig::default())
            .map_err(numeric)?;
        out.put("interval_verdict", rep.verdict);
        out.put("compact_containment", &rep.compact_orbits);
        for w in &rep.intervals.witnesses {
            out.witness(json!({"kind": "not_interval", "seed": w}));
        }
        for c in rep.compact_orbits.iter().filter(|c| !c.contained) {
            out.witness(json!({"kind": "compact_orbit_leaves_domain", "seed": c.seed, "period": c.period}));
        }
        out.unresolved = rep.verdict == AggregateVerdict::Unresolved;
    }
    out.tol("period", s.period_tol);
    out.tol("eigen_error", analysis.eigen_error);
    Ok(out)
}

fn constancy(s: &ConstancySpec) -> Result<Outcome, RunError> {
    let field = s.field.build().map_err(input)?;
    let alpha = scalar_field(&s.alpha).map_err(input)?;
    let cfg = ConstancyConfig {
        n_samples: s.n_samples,
        ..ConstancyConfig::default()
    };
    let r = obstruction_constancy_test(&field, &alpha, &s.seeds, s.t_range, &cfg).map_err(|e| match e {
        QuasiholError::Invalid(m) => input(m),
        QuasiholError::NotConserved { .. } => input(e),
        other => numeric(other),
    })?;
    let mut out = Outcome::default();
    out.put("constant", r.constant);
    out.put("max_variation", r.max_variation);
    let min_var = r.traces.iter().map(|t| t.variation).fold(f64::INFINITY, f64::min);
    out.put("min_variation", min_var);
    out.put(
        "endpoint_ratios",
        r.traces
            .iter()
            .map(|t| [t.ratios.first().copied(), t.ratios.last().copied()])
            .collect::<Vec<_>>(),
    );
    if let schlicht_core::fields::FieldJson::RealLinearDiag { a, b } = &s.field {
        let exact = reallinear_quasihol_test(*a, *b).map_err(input)?;
        out.put("closed_form_quasiholomorphic", exact);
        out.put("agrees_with_closed_form", exact == r.constant);
    }
    for t in r.traces.iter().filter(|t| t.variation >= r.tol) {
        out.witness(json!({"seed": t.seed, "variation": t.variation}));
    }
    out.tol("constancy", r.tol);
    out.tol("conservation", cfg.conservation_tol);
    Ok(out)
}

fn compactness(s: &CompactnessSpec) -> Result<Outcome, RunError> {
    let g = holomorphic_scalar(&s.g.name, &s.g.params).map_err(input)?;
    let seeds: Vec<Complex64> = s.seeds.iter().map(z).collect();
    if seeds.is_empty() {
        return Err(input("no seeds"));
    }
    let cfg = PeriodConfig::default();
    let r = antiholomorphic_compactness(g, &seeds, s.t_max, &cfg).map_err(numeric)?;
    let mut out = Outcome::default();
    out.put("periodic_seeds", r.periodic.len());
    out.put("periods", r.periodic.iter().map(|(_, t)| *t).collect::<Vec<_>>());
    out.put("non_quasiholomorphic", r.non_quasiholomorphic);
    for (p, t) in &r.periodic {
        out.witness(json!({"seed": p, "period": t}));
    }
    out.tol("closure", cfg.tol);
    Ok(out)
}

fn half_space(s: &HalfSpaceSpec) -> Result<Outcome, RunError> {
    let field = s.field.build().map_err(input)?;
    let domain = s.domain.build().map_err(input)?;
    if s.seeds.iter().any(|p| p.dim() != field.dim()) {
        return Err(input("seed dimension does not match the field"));
    }
    let cfg = IntersectConfig::default();
    let r = is_half_space(&field, &domain, &s.seeds, s.t_range, &cfg).map_err(numeric)?;
    let mut out = Outcome::default();
    out.put("verdict", r.verdict);
    out.put("per_seed_components", r.per_seed.iter().map(components).collect::<Vec<_>>());
    for w in &r.witnesses {
        out.witness(w);
    }
    out.tol("t_accuracy", cfg.t_accuracy);
    out.unresolved = aggregate_unresolved(&r);
    Ok(out)
}
