//! Nondegenerate hermitian critical points of a defining function and the
//! ellipsoid family that exhibits an interval domain around them.
//!
//! All checks run in diagonal coordinates `w`, with `z = U w` and
//! `σ(w) = Σ a_j |w_j|²`, `λ(w) = Σ c_j |w_j|²`, `c_j = a_j / (a_j − ε)`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{self, CalcError, DiffConfig, ScalarField, Scheme};
use crate::domains::{self, AggregateReport, AggregateVerdict, DomainError, DomainSpec, IntersectConfig, OrbitIntersectionReport};
use crate::fields::VectorFieldSpec;
use crate::form::{matrix_to_json, FormError, MatrixJson, QuadraticForm, QuadraticFormJson};
use crate::types::ComplexVec;

/// `|∇ρ(0)|` must be below this.
pub const CRITICAL_FLOOR: f64 = 1e-7;
/// Relative thresholds for the hermitian and nondegeneracy hypotheses.
pub const HYPOTHESIS_RTOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SingError {
    #[error("origin is not critical: |grad rho(0)| = {grad_norm:e}")]
    NotCritical { grad_norm: f64 },
    #[error("critical point is degenerate: eigenvalues {eigen:?}")]
    Degenerate { eigen: Vec<f64> },
    #[error("critical point is not hermitian: |S| = {norm_s:e}, |H| = {norm_h:e}")]
    NotHermitian { norm_s: f64, norm_h: f64 },
    #[error("critical point is a local minimum (no negative eigenvalue)")]
    IsMinimum,
    #[error("no positive eigenvalue, so epsilon is undefined")]
    NoPositiveEigenvalue,
    #[error("no entry points found on the boundary of U_r for r = {r}")]
    NoEntryPoints { r: f64 },
    #[error("no radius in [{r_min}, 0.5] passed all checks")]
    RadiusNotFound { r_min: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub critical: bool,
    pub hermitian: bool,
    pub nondegenerate: bool,
    pub not_minimum: bool,
}

impl Hypotheses {
    pub fn all(&self) -> bool {
        self.critical && self.hermitian && self.nondegenerate && self.not_minimum
    }
}

#[derive(Debug, Clone)]
pub struct CriticalPointModel {
    pub rho: ScalarField,
    pub n: usize,
    /// Quadratic part of `ρ` at 0 in the original coordinates.
    pub jet: QuadraticForm,
    /// Eigenvalues of `H`, positives first.
    pub eigen: Vec<f64>,
    pub k: usize,
    /// Unitary with `z = U w`.
    pub basis: DMatrix<Complex64>,
    pub grad_norm_at_origin: f64,
    pub flags: Hypotheses,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetConfig {
    /// Largest of the three Richardson steps.
    pub h0: f64,
}

impl Default for JetConfig {
    fn default() -> Self {
        Self { h0: 4e-3 }
    }
}

/// Real Hessian at `p` by second central differences at `h, h/2, h/4`,
/// extrapolated to remove error terms in `h` and `h²`. The `h` term appears
/// for functions like `|z|³` that are only `C²` at the point.
pub fn richardson_hessian(f: &ScalarField, p: &ComplexVec, h0: f64) -> Result<DMatrix<f64>, CalcError> {
    let at = |h: f64| calculus::hessian(f, p, &DiffConfig::with_step(h, Scheme::Central2));
    let (d1, d2, d4) = (at(h0)?, at(h0 / 2.0)?, at(h0 / 4.0)?);
    Ok((d4 * 8.0 - d2 * 6.0 + d1) / 3.0)
}

/// Splits a real Hessian `M` of `σ(x) = ½ xᵀMx` into `(H, S)`.
pub fn split_hessian(m: &DMatrix<f64>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = m.nrows() / 2;
    let (x, y) = (|j: usize| 2 * j, |j: usize| 2 * j + 1);
    let h = DMatrix::from_fn(n, n, |j, k| {
        Complex64::new(
            0.25 * (m[(x(j), x(k))] + m[(y(j), y(k))]),
            0.25 * (m[(y(j), x(k))] - m[(x(j), y(k))]),
        )
    });
    let s = DMatrix::from_fn(n, n, |j, k| {
        Complex64::new(
            0.25 * (m[(x(j), x(k))] - m[(y(j), y(k))]),
            -0.25 * (m[(x(j), y(k))] + m[(y(j), x(k))]),
        )
    });
    (h, s)
}

/// Two-jet of `ρ` at 0 and hypothesis flags; fails only on malformed input.
pub fn extract_jet(rho: &ScalarField, n: usize, cfg: &JetConfig) -> Result<CriticalPointModel, SingError> {
    if n == 0 {
        return Err(SingError::Invalid("dimension must be positive".into()));
    }
    let origin = ComplexVec::zeros(n);
    let grad_norm = calculus::gradient_complex(rho, &origin, &DiffConfig::default())?.norm();
    let m = richardson_hessian(rho, &origin, cfg.h0)?;
    let (h, s) = split_hessian(&m);
    let jet = QuadraticForm::symmetrized(h, s)?;

    let eig = SymmetricEigen::new(jet.hermitian_part().clone());
    let mut order: Vec<usize> = (0..n).collect();
    let vals = eig.eigenvalues.clone();
    order.sort_by(|&i, &j| {
        let (a, b) = (vals[i], vals[j]);
        match (a > 0.0, b > 0.0) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => b.total_cmp(&a),
        }
    });
    let eigen: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let basis = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let max_abs = eigen.iter().map(|a| a.abs()).fold(0.0, f64::max);
    let min_abs = eigen.iter().map(|a| a.abs()).fold(f64::INFINITY, f64::min);
    let nondegenerate = max_abs > 0.0 && min_abs > HYPOTHESIS_RTOL * max_abs;
    let k = if nondegenerate { eigen.iter().filter(|&&a| a > 0.0).count() } else { 0 };
    let flags = Hypotheses {
        critical: grad_norm < CRITICAL_FLOOR,
        hermitian: jet.harmonic_part().norm() <= HYPOTHESIS_RTOL * jet.hermitian_part().norm(),
        nondegenerate,
        not_minimum: eigen.iter().any(|&a| a < 0.0),
    };
    Ok(CriticalPointModel {
        rho: rho.clone(),
        n,
        jet,
        eigen,
        k,
        basis,
        grad_norm_at_origin: grad_norm,
        flags,
    })
}

impl CriticalPointModel {
    /// First violated hypothesis, in the order critical, hermitian, nondegenerate, not-a-minimum.
    pub fn check(&self) -> Result<(), SingError> {
        let f = &self.flags;
        if !f.critical {
            return Err(SingError::NotCritical {
                grad_norm: self.grad_norm_at_origin,
            });
        }
        if !f.hermitian {
            return Err(SingError::NotHermitian {
                norm_s: self.jet.harmonic_part().norm(),
                norm_h: self.jet.hermitian_part().norm(),
            });
        }
        if !f.nondegenerate {
            return Err(SingError::Degenerate { eigen: self.eigen.clone() });
        }
        if !f.not_minimum {
            return Err(SingError::IsMinimum);
        }
        Ok(())
    }

    /// `ρ(U w)`.
    pub fn rho_diag(&self) -> ScalarField {
        let u = self.basis.clone();
        let rho = self.rho.clone();
        ScalarField::new(move |w| rho.eval(&ComplexVec::from_dvector(&(&u * w.to_dvector())))).with_label("rho(Uw)")
    }

    pub fn to_z(&self, w: &ComplexVec) -> ComplexVec {
        ComplexVec::from_dvector(&(&self.basis * w.to_dvector()))
    }

    /// `σ(w) = Σ a_j |w_j|²`.
    pub fn sigma_diag(&self) -> QuadraticForm {
        QuadraticForm::diagonal(&self.eigen)
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            n: self.n,
            eigen: self.eigen.clone(),
            k: self.k,
            basis: matrix_to_json(&self.basis),
            jet: QuadraticFormJson::from(&self.jet),
            grad_norm_at_origin: self.grad_norm_at_origin,
            flags: self.flags,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub n: usize,
    pub eigen: Vec<f64>,
    pub k: usize,
    pub basis: MatrixJson,
    pub jet: QuadraticFormJson,
    pub grad_norm_at_origin: f64,
    pub flags: Hypotheses,
}

/// [`extract_jet`] followed by the hypothesis check.
pub fn extract_model(rho: &ScalarField, n: usize, cfg: &JetConfig) -> Result<CriticalPointModel, SingError> {
    let model = extract_jet(rho, n, cfg)?;
    model.check()?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidFamily {
    pub eps: f64,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
}

impl EllipsoidFamily {
    /// `ε = ½ min a_j` over positive `a_j`, `c_j = a_j / (a_j − ε)`.
    pub fn from_eigen(a: &[f64]) -> Result<Self, SingError> {
        let eps = 0.5 * a.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
        if !eps.is_finite() {
            return Err(SingError::NoPositiveEigenvalue);
        }
        let c = a.iter().map(|&aj| aj / (aj - eps)).collect();
        Ok(Self { eps, a: a.to_vec(), c })
    }

    pub fn lambda(&self, w: &ComplexVec) -> f64 {
        self.c.iter().zip(w.as_slice()).map(|(c, z)| c * z.norm_sqr()).sum()
    }

    pub fn lambda_field(&self) -> ScalarField {
        let fam = self.clone();
        ScalarField::new(move |w| fam.lambda(w)).with_label("lambda")
    }

    pub fn sigma(&self, w: &ComplexVec) -> f64 {
        self.a.iter().zip(w.as_slice()).map(|(a, z)| a * z.norm_sqr()).sum()
    }

    /// `Σ a_j c_j |w_j|²`, equal to `σ + ελ`.
    pub fn sigma_plus_eps_lambda(&self, w: &ComplexVec) -> f64 {
        self.a
            .iter()
            .zip(&self.c)
            .zip(w.as_slice())
            .map(|((a, c), z)| a * c * z.norm_sqr())
            .sum()
    }

    /// `max_j |a_j + ε c_j − a_j c_j|`.
    pub fn identity_defect(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.c)
            .map(|(a, c)| (a + self.eps * c - a * c).abs())
            .fold(0.0, f64::max)
    }

    /// `(λ∘γ)''(t)` along `γ(t) = (w_j e^{a_j t})`.
    pub fn lambda_second_derivative(&self, w: &ComplexVec, t: f64) -> f64 {
        4.0 * self
            .a
            .iter()
            .zip(&self.c)
            .zip(w.as_slice())
            .map(|((a, c), z)| a * a * c * z.norm_sqr() * (2.0 * a * t).exp())
            .sum::<f64>()
    }
}

pub fn build_family(model: &CriticalPointModel) -> Result<EllipsoidFamily, SingError> {
    model.check()?;
    EllipsoidFamily::from_eigen(&model.eigen)
}

fn random_unit(rng: &mut ChaCha8Rng, real_dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..real_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.iter().map(|x| x / n).collect();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncreasingReport {
    pub n_samples: usize,
    pub annulus: (f64, f64),
    /// Minimum of `∇ρ·∇σ` over the samples.
    pub min_value: f64,
    /// Minimum of `|∇σ|²` over the same samples.
    pub min_grad_sigma_sq: f64,
    /// Violating points in the original coordinates.
    pub witnesses: Vec<ComplexVec>,
    pub passed: bool,
}

/// Samples the annulus `r_in ≤ |w| ≤ r_out` and checks `∇ρ·∇σ > 0`.
pub fn verify_increasing(
    model: &CriticalPointModel,
    r_in: f64,
    r_out: f64,
    n_samples: usize,
    seed: u64,
) -> Result<IncreasingReport, SingError> {
    if !(0.0 < r_in && r_in < r_out) {
        return Err(SingError::Invalid(format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    let rho = model.rho_diag();
    let sigma = model.sigma_diag();
    let diff = DiffConfig::default();
    let dim = 2 * model.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_samples + 4 * dim);
    // coordinate axes at a few radii, then random directions
    for i in 0..dim {
        for s in [r_in, 0.5 * (r_in + r_out), r_out] {
            for sign in [1.0, -1.0] {
                points.push(ComplexVec::zeros(model.n).shifted(i, sign * s));
            }
        }
    }
    let target = n_samples.max(points.len() + 1);
    while points.len() < target {
        let dir = random_unit(&mut rng, dim);
        let r = rng.gen_range(r_in..=r_out);
        points.push(ComplexVec::from_real(&dir.iter().map(|d| d * r).collect::<Vec<_>>()));
    }
    let mut report = IncreasingReport {
        n_samples: points.len(),
        annulus: (r_in, r_out),
        min_value: f64::INFINITY,
        min_grad_sigma_sq: f64::INFINITY,
        witnesses: Vec::new(),
        passed: true,
    };
    for w in &points {
        let gs = sigma.gradient(w);
        let value = calculus::gradient_complex(&rho, w, &diff)?.real_dot(&gs);
        report.min_value = report.min_value.min(value);
        report.min_grad_sigma_sq = report.min_grad_sigma_sq.min(gs.norm_sqr());
        if !(value > 0.0) {
            report.witnesses.push(model.to_z(w));
        }
    }
    report.passed = report.witnesses.is_empty();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub n_orbits: usize,
    pub max_relative_error: f64,
    pub min_second_derivative: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Compares `(λ∘γ)''` in closed form with second differences along orbits
/// `γ(t) = (w_j e^{a_j t})`, the orbits of `∇σ` traversed at half speed.
pub fn verify_orbit_convexity(
    family: &EllipsoidFamily,
    seeds: &[ComplexVec],
    t_range: (f64, f64),
    n_times: usize,
) -> Result<ConvexityReport, SingError> {
    const H: f64 = 1e-3;
    const TOL: f64 = 1e-5;
    let a: Vec<Complex64> = family.a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let field = VectorFieldSpec::diagonal_linear(&a);
    let cfg = crate::fields::FlowConfig::default();
    let mut max_err: f64 = 0.0;
    let mut min_val = f64::INFINITY;
    for w in seeds {
        for i in 0..n_times.max(2) {
            let t = t_range.0 + (t_range.1 - t_range.0) * i as f64 / (n_times.max(2) - 1) as f64;
            let lam = |s: f64| -> Result<f64, SingError> {
                let q = field
                    .flow(w, t + s, &cfg)
                    .map_err(|e| SingError::Invalid(e.to_string()))?;
                Ok(family.lambda(&q))
            };
            let numeric = (-lam(2.0 * H)? + 16.0 * lam(H)? - 30.0 * lam(0.0)? + 16.0 * lam(-H)? - lam(-2.0 * H)?)
                / (12.0 * H * H);
            let exact = family.lambda_second_derivative(w, t);
            max_err = max_err.max((numeric - exact).abs() / exact.abs().max(1.0));
            min_val = min_val.min(exact);
        }
    }
    Ok(ConvexityReport {
        n_orbits: seeds.len(),
        max_relative_error: max_err,
        min_second_derivative: min_val,
        tol: TOL,
        passed: max_err < TOL && min_val >= 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub r: f64,
    pub n_boundary_samples: usize,
    pub n_entry: usize,
    /// Max of `|σ + εr² − Σ a_j c_j |w_j|²|`.
    pub max_identity_defect: f64,
    pub max_sigma_plus_eps_r2: f64,
    pub max_rho: f64,
    pub witnesses: Vec<ComplexVec>,
    pub passed: bool,
}

/// On entry points of `∂U_r` (where `∇σ·∇λ < 0`) checks `σ + εr² < 0` and `ρ < 0`.
pub fn verify_entry_inequality(
    family: &EllipsoidFamily,
    model: &CriticalPointModel,
    r: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EntryReport, SingError> {
    if !(r > 0.0) {
        return Err(SingError::Invalid("radius must be positive".into()));
    }
    let n = model.n;
    let rho = model.rho_diag();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let onto_boundary = |w: ComplexVec| {
        let l = family.lambda(&w);
        w.scale(r / l.sqrt())
    };
    let mut points = Vec::new();
    for j in 0..n {
        for i in [2 * j, 2 * j + 1] {
            points.push(onto_boundary(ComplexVec::zeros(n).shifted(i, 1.0)));
        }
    }
    let target = n_samples.max(points.len() + 1);
    while points.len() < target {
        points.push(onto_boundary(ComplexVec::from_real(&random_unit(&mut rng, 2 * n))));
    }
    let mut rep = EntryReport {
        r,
        n_boundary_samples: points.len(),
        n_entry: 0,
        max_identity_defect: 0.0,
        max_sigma_plus_eps_r2: f64::NEG_INFINITY,
        max_rho: f64::NEG_INFINITY,
        witnesses: Vec::new(),
        passed: true,
    };
    for w in &points {
        // ∇σ·∇λ = 4 Σ a_j c_j |w_j|²
        let inward = 4.0 * family.sigma_plus_eps_lambda(w);
        if inward >= 0.0 {
            continue;
        }
        rep.n_entry += 1;
        let lhs = family.sigma(w) + family.eps * r * r;
        let rhs = family.sigma_plus_eps_lambda(w);
        rep.max_identity_defect = rep.max_identity_defect.max((lhs - rhs).abs());
        rep.max_sigma_plus_eps_r2 = rep.max_sigma_plus_eps_r2.max(lhs);
        let rho_w = rho.eval(w);
        rep.max_rho = rep.max_rho.max(rho_w);
        if !(lhs < 0.0 && rho_w < 0.0) {
            rep.witnesses.push(model.to_z(w));
        }
    }
    if rep.n_entry == 0 {
        return Err(SingError::NoEntryPoints { r });
    }
    rep.passed = rep.witnesses.is_empty() && rep.max_identity_defect <= 1e-14 * r * r * 10.0;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YrReport {
    pub r: f64,
    pub grid_per_axis: usize,
    pub aggregate: AggregateReport,
    /// Seeds on `E = C^k × 0`, reported and excluded from the verdict.
    pub on_e: Vec<OrbitIntersectionReport>,
}

/// `Y_r = {λ < r², ρ < 0}` in diagonal coordinates.
pub fn y_r(model: &CriticalPointModel, family: &EllipsoidFamily, r: f64) -> Result<DomainSpec, SingError> {
    Ok(DomainSpec::Intersection(vec![
        DomainSpec::ellipsoid(family.c.clone(), r)?,
        DomainSpec::Sublevel {
            rho: model.rho_diag(),
            level: 0.0,
        },
    ]))
}

/// Checks that orbits of `∇σ` meet `Y_r` in intervals, for seeds on a grid
/// over `[−r, r]²` in the plane `(Re w_1, Re w_n)` inside `U_r`.
pub fn certify_yr(
    model: &CriticalPointModel,
    family: &EllipsoidFamily,
    r: f64,
    grid_per_axis: usize,
    cfg: &IntersectConfig,
) -> Result<YrReport, SingError> {
    if grid_per_axis < 2 {
        return Err(SingError::Invalid("grid needs at least two points per axis".into()));
    }
    let n = model.n;
    let k = model.k;
    let field = VectorFieldSpec::GradQuadratic(model.sigma_diag());
    let domain = y_r(model, family, r)?;
    let mut seeds = Vec::new();
    let mut e_seeds = Vec::new();
    for i in 0..grid_per_axis {
        for j in 0..grid_per_axis {
            let s = |m: usize| -r + 2.0 * r * m as f64 / (grid_per_axis - 1) as f64;
            let mut w = ComplexVec::zeros(n);
            w[0].re = s(i);
            w[n - 1].re += s(j);
            if w.norm() == 0.0 || !(family.lambda(&w) < r * r) {
                continue;
            }
            if w.as_slice()[k..].iter().all(|z| z.norm() == 0.0) {
                e_seeds.push(w);
            } else {
                seeds.push(w);
            }
        }
    }
    let t_range = (-5.0, 5.0);
    let aggregate = domains::is_interval_domain(&field, &domain, &seeds, t_range, cfg)?;
    let on_e = e_seeds
        .iter()
        .map(|w| domains::orbit_intersection(&field, w, &domain, t_range, cfg))
        .collect::<Result<_, _>>()?;
    Ok(YrReport {
        r,
        grid_per_axis,
        aggregate,
        on_e,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSearch {
    pub r: f64,
    pub tried: Vec<f64>,
}

/// Halves `r` from 0.5 until the increasing, entry and `Y_r` checks all pass.
pub fn find_radius(
    model: &CriticalPointModel,
    family: &EllipsoidFamily,
    n_samples: usize,
    cfg: &IntersectConfig,
) -> Result<RadiusSearch, SingError> {
    const R_MIN: f64 = 1e-4;
    let mut r = 0.5;
    let mut tried = Vec::new();
    while r >= R_MIN {
        tried.push(r);
        let inc = verify_increasing(model, 0.05 * r, r, n_samples, 1)?;
        let entry = verify_entry_inequality(family, model, r, n_samples, 2)?;
        if inc.passed && entry.passed {
            let yr = certify_yr(model, family, r, 11, cfg)?;
            if yr.aggregate.verdict == AggregateVerdict::CertifiedOnSamples {
                return Ok(RadiusSearch { r, tried });
            }
        }
        r *= 0.5;
    }
    Err(SingError::RadiusNotFound { r_min: R_MIN })
}
