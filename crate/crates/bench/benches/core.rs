use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use schlicht_core::continuation::{continue_along, Germ, PathSpec, StepConfig};
use schlicht_core::domains::{orbit_intersection, DomainSpec, IntersectConfig, PlanarSet, Window};
use schlicht_core::fields::{FlowConfig, PlanePolynomial, VectorFieldSpec};
use schlicht_core::quasihol::{rectify, RectifyConfig};
use schlicht_core::registry::{scalar_field, FnRef};
use schlicht_core::{Complex64, ComplexVec};

fn f0() -> VectorFieldSpec {
    VectorFieldSpec::PolynomialPlane(PlanePolynomial::cubic_counterexample())
}

fn flow(c: &mut Criterion) {
    let cfg = FlowConfig::default();
    let field = f0();
    let p = ComplexVec::from_reals(&[0.2, -0.1]);
    c.bench_function("flow/polynomial_plane_t1", |b| b.iter(|| field.flow(black_box(&p), 1.0, &cfg)));
    let lin = VectorFieldSpec::diagonal_linear(&[Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)]);
    let z = ComplexVec::from_pairs(&[(1.0, 0.0), (0.5, 0.0)]);
    c.bench_function("flow/linear_closed_form", |b| b.iter(|| lin.flow(black_box(&z), 3.0, &cfg)));
}

fn intersection(c: &mut Criterion) {
    let cfg = IntersectConfig {
        parallel: false,
        ..IntersectConfig::default()
    };
    let y0 = DomainSpec::Tube {
        base: PlanarSet::cubic_notch(),
    };
    let origin = ComplexVec::zeros(2);
    c.bench_function("orbit_intersection/y0_origin", |b| {
        b.iter(|| orbit_intersection(&f0(), black_box(&origin), &y0, (-10.0, 10.0), &cfg))
    });
}

fn continuation(c: &mut Criterion) {
    let cfg = StepConfig::default();
    let g = Germ::sqrt_at(Complex64::new(1.0, 0.0), 40).unwrap();
    let lp = PathSpec::circle(Complex64::new(0.0, 0.0), 1.0, 64, 0.0, false, 1).unwrap();
    c.bench_function("continuation/sqrt_unit_loop", |b| b.iter(|| continue_along(black_box(&g), &lp, &cfg)));
}

fn rectification(c: &mut Criterion) {
    let alpha = scalar_field(&FnRef::new("y_over_x", &[])).unwrap();
    let window = Window {
        x: (0.5, 2.0),
        y: (-1.0, 1.0),
    };
    let cfg = RectifyConfig {
        grid: 41,
        n_levels: 501,
        ..RectifyConfig::default()
    };
    let mut group = c.benchmark_group("rectify");
    group.sample_size(10);
    group.bench_function("y_over_x", |b| b.iter(|| rectify(black_box(&alpha), &window, None, &cfg)));
    group.finish();
}

criterion_group!(benches, flow, intersection, continuation, rectification);
criterion_main!(benches);
