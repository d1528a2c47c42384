use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use flowout_core::glancing::{model_glancing_surface, pair_classification, quadratic_phase_lagrangian, QuadraticCase};
use flowout_core::manifolds::{flow_out, BesselCylinder, ManifoldChart, PlaneWave, SharedChart};
use flowout_core::normal_form::{TransitionConfig, TransitionProblem};
use flowout_core::poly::position_names;
use flowout_core::semiclassical::bessel_j0;
use flowout_core::symplectic::field::PolyField;
use flowout_core::symplectic::hamiltonian::Conformal;
use flowout_core::{PhasePoint, Polynomial, SharedHamiltonian};

fn conformal2(src: &str) -> SharedHamiltonian {
    let rho = Polynomial::parse(src, &position_names(2)).unwrap();
    Arc::new(Conformal::new("conformal2", 2.0, rho).unwrap())
}

fn special(c: &mut Criterion) {
    c.bench_function("bessel_j0", |b| b.iter(|| bessel_j0(black_box(7.3))));
}

fn flow(c: &mut Criterion) {
    let base: SharedChart = Arc::new(BesselCylinder::new(2).with_phi_range(0.2, 1.5));
    let chart = flow_out(base, conformal2("1 + x1^2 + x2^2"), 1.0, 1e-12).unwrap();
    c.bench_function("flow_out_embed", |b| {
        b.iter(|| chart.embed(black_box(&[0.8, 1.1, 0.7])).unwrap())
    });
}

fn classify(c: &mut Criterion) {
    let lag = quadratic_phase_lagrangian(QuadraticCase::I, 2.0).unwrap();
    let (f1, f2, g) = (
        PolyField::new(lag.f1),
        PolyField::new(lag.f2),
        PolyField::new(model_glancing_surface()),
    );
    let z = PhasePoint::zeros(2);
    c.bench_function("pair_classification", |b| {
        b.iter(|| pair_classification(&f1, &f2, &g, black_box(&z), 1e-6).unwrap())
    });
}

fn transition(c: &mut Criterion) {
    let cfg = TransitionConfig {
        samples: 90,
        ..Default::default()
    };
    let p = TransitionProblem::new(
        conformal2("1 + x1^2 + x2^2"),
        Arc::new(PlaneWave::new(vec![1.0, 0.0], (-2.0, 2.0))),
        vec![0.0, 0.0],
        cfg,
    )
    .unwrap();
    c.bench_function("transition_sample", |b| b.iter(|| p.sample(black_box(0.9)).unwrap()));
}

criterion_group!(benches, special, flow, classify, transition);
criterion_main!(benches);
