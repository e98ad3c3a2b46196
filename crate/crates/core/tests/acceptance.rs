//! Acceptance checks, one PASS/FAIL line per criterion.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schlicht_core::calculus::{dz_dzbar_nested, laplacian, DiffConfig, ScalarField, Scheme};
use schlicht_core::continuation::{monodromy, Germ, PathSpec, StepConfig};
use schlicht_core::domains::{orbit_intersection, DomainSpec, IntersectConfig, PlanarSet, Verdict, AggregateVerdict};
use schlicht_core::fields::{FlowConfig, PlanePolynomial, VectorFieldSpec};
use schlicht_core::form::QuadraticForm;
use schlicht_core::linearfields::{analyze_linear, compact_orbit_test, SpectralPrediction};
use schlicht_core::quasihol::{
    classify_quadratic_gradient, obstruction_constancy_test, reallinear_quasihol_test, rectify, ClassVerdict,
    ConstancyConfig, RectifyConfig,
};
use schlicht_core::registry::{holomorphic_field, scalar_field, FnRef};
use schlicht_core::singularities::{
    build_family, certify_yr, extract_model, verify_entry_inequality, verify_increasing, EllipsoidFamily, JetConfig,
};
use schlicht_core::{Complex64, ComplexVec};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn f0() -> VectorFieldSpec {
    VectorFieldSpec::PolynomialPlane(PlanePolynomial::cubic_counterexample())
}

fn criterion_1() -> Outcome {
    let cfg = IntersectConfig::default();
    let seed = ComplexVec::zeros(2);
    let y0 = DomainSpec::Tube { base: PlanarSet::cubic_notch() };
    let r = orbit_intersection(&f0(), &seed, &y0, (-10.0, 10.0), &cfg).map_err(|e| e.to_string())?;
    check(r.verdict == Verdict::Interval && r.components.len() == 1, format!("Y0 verdict {:?}", r.verdict))?;
    let hull = DomainSpec::half_plane(vec![0.0, 0.0, 1.0, 0.0], 2.0 / (3.0 * 3f64.sqrt())).map_err(|e| e.to_string())?;
    let r = orbit_intersection(&f0(), &seed, &hull, (-10.0, 10.0), &cfg).map_err(|e| e.to_string())?;
    check(r.components.len() == 2, format!("hull components {}", r.components.len()))?;
    let (a, b) = (&r.components[0], &r.components[1]);
    let gap = (a.t_hi + 0.57735).abs().max((b.t_lo + 0.57735).abs());
    let close = (b.t_hi - 2.0 / 3f64.sqrt()).abs().max((b.t_hi - 1.15470).abs());
    check(gap < 1e-3 && close < 1e-3, format!("endpoints {:?}", r.components))?;
    Ok(format!(
        "Y0 one component; hull components (-inf, {:.6}) and ({:.6}, {:.6})",
        a.t_hi, b.t_lo, b.t_hi
    ))
}

fn criterion_2() -> Outcome {
    let cfg = ConstancyConfig::default();
    let err = |e: schlicht_core::quasihol::QuasiholError| e.to_string();
    let field = VectorFieldSpec::real_linear_diag(1.0, 2.0).map_err(|e| e.to_string())?;
    let alpha = scalar_field(&FnRef::new("real_linear_invariant", &[1.0, 2.0]))?;
    // t = 0 and t = ln 2 map (1,1) to (2,4)
    let two = ConstancyConfig { n_samples: 2, ..cfg };
    let r = obstruction_constancy_test(&field, &alpha, &[ComplexVec::from_pairs(&[(1.0, 1.0)])], (0.0, 2f64.ln()), &two)
        .map_err(err)?;
    let (r0, r1) = (r.traces[0].ratios[0], r.traces[0].ratios[1]);
    check((r0 - 0.2).abs() < 1e-6 && (r1 - 7.0 / 17.0).abs() < 1e-6, format!("ratios {r0}, {r1}"))?;

    let grid: Vec<ComplexVec> = [0.5, 1.0, 1.5, 2.0]
        .iter()
        .flat_map(|&x| [0.5, 1.0, 1.5, 2.0].map(|y| ComplexVec::from_pairs(&[(x, y)])))
        .collect();
    let r = obstruction_constancy_test(&field, &alpha, &grid, (-1.0, 1.0), &cfg).map_err(err)?;
    let min_var = r.traces.iter().map(|t| t.variation).fold(f64::INFINITY, f64::min);
    check(min_var > 1e-3, format!("(1,2) min variation {min_var:e}"))?;
    let mut max_equal = 0.0f64;
    for (a, b) in [(1.0, 1.0), (1.0, -1.0)] {
        let field = VectorFieldSpec::real_linear_diag(a, b).map_err(|e| e.to_string())?;
        let alpha = scalar_field(&FnRef::new("real_linear_invariant", &[a, b]))?;
        let r = obstruction_constancy_test(&field, &alpha, &grid, (-1.0, 1.0), &cfg).map_err(err)?;
        max_equal = max_equal.max(r.max_variation);
    }
    check(max_equal < 1e-6, format!("(1,±1) variation {max_equal:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let levels = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];
    let mut mismatches = 0;
    for _ in 0..50 {
        let a: f64 = levels[rng.gen_range(0..levels.len())];
        let b: f64 = match rng.gen_range(0..3) {
            0 => a,
            1 => -a,
            _ => levels[rng.gen_range(0..levels.len())],
        };
        let field = VectorFieldSpec::real_linear_diag(a, b).map_err(|e| e.to_string())?;
        let alpha = scalar_field(&FnRef::new("real_linear_invariant", &[a, b]))?;
        let seeds = &grid[..4];
        let numeric = obstruction_constancy_test(&field, &alpha, seeds, (-0.5, 0.5), &cfg).map_err(err)?.constant;
        if numeric != reallinear_quasihol_test(a, b).map_err(err)? {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches} classifier mismatches"))?;
    Ok(format!(
        "ratios 1/5 and 7/17 (err {:.1e}, {:.1e}); (1,2) min variation {min_var:.3e}; (1,±1) max {max_equal:.1e}; 50/50 agree",
        (r0 - 0.2).abs(),
        (r1 - 7.0 / 17.0).abs()
    ))
}

fn criterion_3() -> Outcome {
    let window = schlicht_core::domains::Window { x: (0.5, 2.0), y: (-1.0, 1.0) };
    let alpha = scalar_field(&FnRef::new("y_over_x", &[]))?;
    let r = rectify(&alpha, &window, None, &RectifyConfig::default()).map_err(|e| e.to_string())?;
    // least-squares fit w∘α ≈ s·arctan(y/x) + t
    let n = 101;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = 0.5 + 1.5 * i as f64 / (n - 1) as f64;
            let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            let p = ComplexVec::from_pairs(&[(x, y)]);
            rows.push([(y / x).atan(), 1.0]);
            rhs.push(r.harmonic_integral.eval(&p));
        }
    }
    let a = DMatrix::from_fn(rows.len(), 2, |i, k| rows[i][k]);
    let b = DVector::from_vec(rhs);
    let coef = a.clone().svd(true, true).solve(&b, 1e-14).map_err(|e| e.to_string())?;
    let fit_err = (a * &coef - b).amax();
    check(fit_err < 1e-5, format!("affine fit error {fit_err:e}"))?;
    check(r.residual < 1e-4, format!("Laplacian residual {:e}", r.residual))?;
    Ok(format!(
        "affine fit error {fit_err:.2e} (scale {:.6}); max |Δ(w∘α)| {:.2e} on 101x101",
        coef[0], r.residual
    ))
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&m + m.adjoint()) * c(0.5, 0.0)
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&m + m.transpose()) * c(0.5, 0.0)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut counts = [0usize; 3];
    let mut done = 0;
    let mut wrong = Vec::new();
    while done < 100 {
        let kind = done % 3;
        let (q, expected) = match kind {
            0 => {
                let n = rng.gen_range(1..=3);
                let h = random_hermitian(&mut rng, n);
                (QuadraticForm::new(h, DMatrix::zeros(n, n)), ClassVerdict::HermitianCase)
            }
            1 => {
                let s = DMatrix::from_element(1, 1, c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
                (QuadraticForm::new(DMatrix::zeros(1, 1), s), ClassVerdict::HarmonicN1Case)
            }
            _ => {
                let n = rng.gen_range(1..=3);
                let h = random_hermitian(&mut rng, n);
                (QuadraticForm::new(h, random_symmetric(&mut rng, n)), ClassVerdict::Incompatible)
            }
        };
        let q = q.map_err(|e| e.to_string())?;
        let Ok(v) = classify_quadratic_gradient(&q) else {
            // degenerate draw, try again
            continue;
        };
        counts[kind] += 1;
        done += 1;
        if v.verdict != expected {
            wrong.push((expected, v.verdict));
        }
    }
    check(wrong.is_empty(), format!("misclassified {wrong:?}"))?;
    Ok(format!(
        "100 forms ({} hermitian, {} harmonic n=1, {} mixed), 0 misclassified",
        counts[0], counts[1], counts[2]
    ))
}

fn criterion_5() -> Outcome {
    // ρ = |z1|² − |z2|² + Σ c_ijk x_i x_j x_k with |c_ijk| ≤ 0.05
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cubic = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            for k in j..4 {
                cubic.push((i, j, k, rng.gen_range(-0.05..=0.05)));
            }
        }
    }
    let rho = ScalarField::new(move |p| {
        let x = p.to_real();
        let quad = x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3];
        quad + cubic.iter().map(|&(i, j, k, a)| a * x[i] * x[j] * x[k]).sum::<f64>()
    });
    let err = |e: schlicht_core::singularities::SingError| e.to_string();
    let model = extract_model(&rho, 2, &JetConfig::default()).map_err(err)?;
    let exact = EllipsoidFamily::from_eigen(&[1.0, -1.0]).map_err(err)?;
    check(exact.eps == 0.5 && exact.c == vec![2.0, 2.0 / 3.0], format!("exact family {exact:?}"))?;
    let defect = exact.identity_defect();
    check(defect <= 4.0 * f64::EPSILON, format!("identity defect {defect:e}"))?;
    let family = build_family(&model).map_err(err)?;
    let drift = (family.eps - 0.5)
        .abs()
        .max((family.c[0] - 2.0).abs())
        .max((family.c[1] - 2.0 / 3.0).abs());
    check(drift < 1e-8, format!("extracted family drift {drift:e}"))?;

    let r = 0.1;
    let inc = verify_increasing(&model, 0.01 * r, r, 10_000, 11).map_err(err)?;
    check(inc.passed && inc.n_samples >= 10_000, format!("increasing: min {:e}", inc.min_value))?;
    let entry = verify_entry_inequality(&family, &model, r, 2_000, 12).map_err(err)?;
    check(entry.passed, format!("entry: max rho {:e}", entry.max_rho))?;
    let cfg = IntersectConfig::default();
    let coarse = certify_yr(&model, &family, r, 21, &cfg).map_err(err)?;
    let fine = certify_yr(&model, &family, r, 41, &cfg).map_err(err)?;
    check(
        coarse.aggregate.verdict == AggregateVerdict::CertifiedOnSamples
            && fine.aggregate.verdict == AggregateVerdict::CertifiedOnSamples,
        format!("Y_r: {:?} / {:?}", coarse.aggregate.verdict, fine.aggregate.verdict),
    )?;
    Ok(format!(
        "eps=0.5, c=(2, 2/3) exact (extracted drift {drift:.1e}); defect {defect:.1e}; min grad product {:.2e} on {} samples; {} entry points with rho<0; Y_r certified on 21² and 41²",
        inc.min_value, inc.n_samples, entry.n_entry
    ))
}

fn criterion_6() -> Outcome {
    let cfg = StepConfig::default();
    let err = |e: schlicht_core::continuation::ContError| e.to_string();
    let unit = PathSpec::circle(c(0.0, 0.0), 1.0, 64, 0.0, false, 1).map_err(err)?;
    let sqrt = Germ::sqrt_at(c(1.0, 0.0), 40).map_err(err)?;
    let after = schlicht_core::continuation::continue_along(&sqrt, &unit, &cfg).map_err(err)?.final_germ.value();
    let e1 = (after - c(-1.0, 0.0)).norm();
    check(e1 < 1e-9, format!("sqrt loop {after}"))?;
    let log = Germ::log_at(c(1.0, 0.0), 40).map_err(err)?;
    let m = monodromy(&log, &unit, &cfg).map_err(err)?;
    let e2 = (m - c(0.0, TAU)).norm();
    check(e2 < 1e-9, format!("log monodromy {m}"))?;
    let twice = PathSpec::circle(c(0.0, 0.0), 1.0, 64, 0.0, false, 2).map_err(err)?;
    let back = schlicht_core::continuation::continue_along(&sqrt, &twice, &cfg).map_err(err)?.final_germ.value();
    let e3 = (back - c(1.0, 0.0)).norm();
    check(e3 < 1e-8, format!("double sqrt loop {back}"))?;
    let base = (-2.0f64).exp();
    let cartan = Germ::neg_i_log_at(c(base, 0.0), 40).map_err(err)?;
    let lp = PathSpec::circle(c(0.0, 0.0), base, 64, 0.0, false, 1).map_err(err)?;
    let m = monodromy(&cartan, &lp, &cfg).map_err(err)?;
    let e4 = (m - c(TAU, 0.0)).norm();
    check(e4 < 1e-6, format!("Cartan monodromy {m}"))?;
    Ok(format!(
        "errors: sqrt loop {e1:.1e}, log loop {e2:.1e}, double loop {e3:.1e}, Cartan {e4:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    type F = fn(f64, f64) -> f64;
    let family: [(&str, F, F); 4] = [
        ("sin(x)e^y", |x, y| x.sin() * y.exp(), |_, _| 0.0),
        ("x^3 y^2", |x, y| x.powi(3) * y * y, |x, y| 6.0 * x * y * y + 2.0 * x.powi(3)),
        ("exp(x^2+y)", |x, y| (x * x + y).exp(), |x, y| (x * x + y).exp() * (2.0 + 4.0 * x * x + 1.0)),
        ("cos(xy)", |x, y| (x * y).cos(), |x, y| -(x * y).cos() * (x * x + y * y)),
    ];
    let p = ComplexVec::from_pairs(&[(0.3, -0.2)]);
    let mut worst_gap: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    for (name, f, lap) in family {
        let field = ScalarField::new(move |q| f(q[0].re, q[0].im));
        let exact = lap(0.3, -0.2);
        let mut errs = Vec::new();
        for h in [2e-2, 1e-2, 5e-3] {
            let cfg = DiffConfig::with_step(h, Scheme::Central2);
            let l = laplacian(&field, &p, &cfg).map_err(|e| e.to_string())?;
            let w = 4.0 * dz_dzbar_nested(&field, &p, 0, &cfg).map_err(|e| e.to_string())?;
            let gap = (l - w.re).abs().max(w.im.abs());
            check(gap <= 10.0 * h * h, format!("{name}: gap {gap:e} at h={h}"))?;
            worst_gap = worst_gap.max(gap / (h * h));
            errs.push((l - exact).abs());
        }
        if errs[0] > 1e-12 {
            for k in 0..2 {
                let order = (errs[k] / errs[k + 1]).log2();
                check(order >= 1.8, format!("{name}: order {order:.3}"))?;
                min_order = min_order.min(order);
            }
        }
    }
    Ok(format!("max gap/h² {worst_gap:.3}; min observed order {min_order:.3}"))
}

fn group_law_defect(field: &VectorFieldSpec, p: &ComplexVec, tol: f64) -> Result<f64, String> {
    let cfg = FlowConfig::with_tol(tol);
    let e = |x: schlicht_core::fields::FlowError| x.to_string();
    let mut worst: f64 = 0.0;
    for (s, t) in [(0.3, 0.4), (-0.5, 0.2), (0.25, -0.6)] {
        let a = field.flow_numeric(&field.flow_numeric(p, t, &cfg).map_err(e)?, s, &cfg).map_err(e)?;
        let b = field.flow_numeric(p, s + t, &cfg).map_err(e)?;
        worst = worst.max(a.distance(&b));
    }
    Ok(worst)
}

fn criterion_8() -> Outcome {
    let tol = 1e-10;
    let saddle = QuadraticForm::diagonal(&[1.0, -1.0]);
    let mixed = QuadraticForm::new(
        DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(-0.5, 0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(0.1, 0.0), c(0.0, 0.2), c(0.0, 0.2), c(-0.3, 0.1)]),
    )
    .map_err(|e| e.to_string())?;
    let rot = DMatrix::from_row_slice(2, 2, &[c(0.1, 1.0), c(0.5, 0.0), c(-0.2, 0.3), c(-0.3, -0.5)]);
    let variants: Vec<(&str, VectorFieldSpec, ComplexVec)> = vec![
        ("holomorphic", holomorphic_field("f0_holomorphic", &[])?, ComplexVec::from_pairs(&[(0.2, 0.1), (0.3, -0.2)])),
        ("linear", VectorFieldSpec::linear(rot.clone()).map_err(|e| e.to_string())?, ComplexVec::from_pairs(&[(1.0, 0.5), (-0.5, 0.2)])),
        ("real_linear", VectorFieldSpec::real_linear_diag(1.0, 2.0).map_err(|e| e.to_string())?, ComplexVec::from_pairs(&[(0.5, 0.4)])),
        ("antiholomorphic", VectorFieldSpec::antiholomorphic("grad_arg", |z| -Complex64::i() / z), ComplexVec::from_pairs(&[(1.0, 0.3)])),
        ("grad_quadratic", VectorFieldSpec::GradQuadratic(mixed.clone()), ComplexVec::from_pairs(&[(0.3, 0.1), (0.2, -0.4)])),
        (
            "grad_smooth",
            VectorFieldSpec::grad_smooth(ScalarField::new(|p| p[0].re * p[0].re - p[0].im * p[0].im + 0.1 * p[0].re.powi(3)), 1),
            ComplexVec::from_pairs(&[(0.3, 0.2)]),
        ),
        ("polynomial_plane", f0(), ComplexVec::from_reals(&[0.1, 0.2])),
    ];
    let mut worst_group: f64 = 0.0;
    for (name, field, p) in &variants {
        let d = group_law_defect(field, p, tol)?;
        check(d <= 10.0 * tol, format!("{name}: group law defect {d:e}"))?;
        worst_group = worst_group.max(d);
    }
    let exact_cases: Vec<(&str, VectorFieldSpec, ComplexVec)> = vec![
        ("F0", f0(), ComplexVec::from_reals(&[0.1, -0.3])),
        ("linear", VectorFieldSpec::linear(rot).map_err(|e| e.to_string())?, ComplexVec::from_pairs(&[(1.0, 0.5), (-0.5, 0.2)])),
        ("grad_saddle", VectorFieldSpec::GradQuadratic(saddle), ComplexVec::from_pairs(&[(0.3, 0.1), (0.2, -0.4)])),
        ("grad_mixed", VectorFieldSpec::GradQuadratic(mixed), ComplexVec::from_pairs(&[(0.3, 0.1), (0.2, -0.4)])),
    ];
    let mut worst_rk: f64 = 0.0;
    let cfg = FlowConfig::with_tol(1e-12);
    for (name, field, p) in &exact_cases {
        for i in 0..=8 {
            let t = -2.0 + 0.5 * i as f64;
            let rk = field.flow_numeric(p, t, &cfg).map_err(|e| e.to_string())?;
            let exact = field.flow(p, t, &cfg).map_err(|e| e.to_string())?;
            let d = rk.distance(&exact);
            check(d < 1e-9, format!("{name}: RK vs closed form {d:e} at t={t}"))?;
            worst_rk = worst_rk.max(d);
        }
    }
    Ok(format!(
        "group law max defect {worst_group:.1e} (tol {tol:.0e}, 7 variants); RK vs closed form max {worst_rk:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agree = 0;
    for _ in 0..30 {
        let q = rng.gen_range(1..=20u32);
        let p = rng.gen_range(1..=q);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 1.0), c(0.0, sign * p as f64 / q as f64)]));
        let an = analyze_linear(&a).map_err(|e| e.to_string())?;
        let z = ComplexVec::from_pairs(&[(rng.gen_range(0.2..1.0), rng.gen_range(-1.0..1.0)), (rng.gen_range(0.2..1.0), 0.3)]);
        let z = z.scale(1.0 / z.norm());
        let SpectralPrediction::Compact { period } = an.predict(&z) else {
            return Err(format!("no compact prediction for p/q = {p}/{q}"));
        };
        let rep = compact_orbit_test(&an, &z, 2.0 * PI * 20.0 + 1.0, 1e-6).map_err(|e| e.to_string())?;
        check(
            rep.consistent && rep.detected_period.is_some_and(|t| (t - period).abs() < 1e-6),
            format!("p/q = {p}/{q}: predicted {period}, detected {:?}", rep.detected_period),
        )?;
        agree += 1;
    }
    let mut hyperbolic = 0;
    for _ in 0..10 {
        let re = |rng: &mut ChaCha8Rng| {
            let s: f64 = rng.gen_range(0.1..1.5);
            if rng.gen_bool(0.5) { s + 0.01 } else { -s - 0.01 }
        };
        let mut a = DMatrix::from_fn(2, 2, |_, _| c(0.0, 0.0));
        a[(0, 0)] = c(re(&mut rng), rng.gen_range(-2.0..2.0));
        a[(1, 1)] = c(re(&mut rng), rng.gen_range(-2.0..2.0));
        a[(0, 1)] = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let an = analyze_linear(&a).map_err(|e| e.to_string())?;
        for _ in 0..3 {
            let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z = ComplexVec::from_real(&v);
            let z = z.scale(1.0 / z.norm());
            let rep = compact_orbit_test(&an, &z, 50.0, 1e-6).map_err(|e| e.to_string())?;
            check(rep.detected_period.is_none(), format!("hyperbolic period {:?} for {a}", rep.detected_period))?;
            hyperbolic += 1;
        }
    }
    Ok(format!("{agree}/30 commensurable spectra match detected periods; {hyperbolic} hyperbolic orbits without period <= 50"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("counterexample reproduction", criterion_1),
        ("real-linear obstruction", criterion_2),
        ("rectification", criterion_3),
        ("classifier truth table", criterion_4),
        ("hermitian singularity battery", criterion_5),
        ("continuation monodromy", criterion_6),
        ("calculus convergence", criterion_7),
        ("flow correctness", criterion_8),
        ("linear-field compact orbits", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2}s] {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
