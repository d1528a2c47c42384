use std::f64::consts::PI;
use std::sync::Arc;

use flowout_core::manifolds::*;
use flowout_core::poly::{position_names, Polynomial};
use flowout_core::symplectic::hamiltonian::{from_registry, Conformal};
use flowout_core::symplectic::phase::symplectic_product;
use flowout_core::{Error, PhasePoint, Result, SharedHamiltonian};

fn conformal(src: &str) -> SharedHamiltonian {
    let rho = Polynomial::parse(src, &position_names(2)).unwrap();
    Arc::new(Conformal::new("conformal1", 1.0, rho).unwrap())
}

fn bessel2() -> SharedChart {
    Arc::new(BesselCylinder::new(2))
}

#[test]
fn bessel_points() {
    let z = bessel_point(2.0, &[0.0]);
    assert_eq!(z.x, vec![2.0, 0.0]);
    assert_eq!(z.p, vec![1.0, 0.0]);
    let z = bessel_point(0.0, &[1.3]);
    assert_eq!(z.x, vec![0.0, 0.0]);
    assert!((z.momentum_norm() - 1.0).abs() < 1e-15);
    let z = bessel_point(1.0, &[PI / 2.0, 0.0]);
    assert_eq!(z.x, z.p);
    assert!((z.momentum_norm() - 1.0).abs() < 1e-15);
}

#[test]
fn bessel_tangent_frame() {
    let f = tangent_frame_bessel(3.0, &[0.0]);
    assert_eq!(f[0], PhasePoint::from_slice(&[1.0, 0.0, 0.0, 0.0]));
    assert_eq!(f[1], PhasePoint::from_slice(&[0.0, 3.0, 0.0, 1.0]));
    assert_eq!(symplectic_product(&f[0], &f[1]), 0.0);
    let f = tangent_frame_bessel(0.0, &[0.8]);
    assert_eq!(symplectic_product(&f[0], &f[1]), 0.0);
    let f = tangent_frame_bessel(0.7, &[1.1, 2.3]);
    let m = nalgebra::DMatrix::from_fn(6, 3, |i, j| f[j].to_vec()[i]);
    assert_eq!(m.rank(1e-12), 3);
}

#[test]
fn bessel_chart_is_lagrangian_with_eikonal_phi() {
    for n in 1..=3 {
        let c = BesselCylinder::new(n);
        assert!(lagrangian_residual(&c, 100).unwrap() <= 1e-8);
        assert!(eikonal_residual(&c, 50).unwrap().unwrap() <= 1e-8);
    }
    let c = BesselCylinder::shifted(vec![0.4, -1.0]);
    assert!(eikonal_residual(&c, 50).unwrap().unwrap() <= 1e-8);
}

#[derive(Debug)]
struct Broken;

impl ManifoldChart for Broken {
    fn param_names(&self) -> Vec<String> {
        vec!["phi".into(), "psi".into()]
    }
    fn domain(&self) -> Vec<(f64, f64)> {
        vec![(0.5, 2.0), (0.0, 2.0 * PI)]
    }
    fn embed(&self, u: &[f64]) -> Result<PhasePoint> {
        let mut z = bessel_point(u[0], &u[1..]);
        let (c, s) = (u[1].cos(), u[1].sin());
        z.p[0] += -1e-3 * u[0] * s;
        z.p[1] += 1e-3 * u[0] * c;
        Ok(z)
    }
}

#[test]
fn perturbed_chart_is_detected() {
    assert!(lagrangian_residual(&Broken, 100).unwrap() >= 1e-4);
}

#[test]
fn translation_flow_out() {
    let h = from_registry("pn", 2, None).unwrap();
    let c = flow_out(bessel2(), h, 2.0, DEFAULT_FLOW_TOL).unwrap();
    assert_eq!(c.param_names(), vec!["phi", "psi", "t"]);
    let z = c.embed(&[1.5, 0.4, 1.25]).unwrap();
    let w = [0.4f64.cos(), 0.4f64.sin()];
    let expect = PhasePoint::from_slice(&[1.5 * w[0], 1.5 * w[1] + 1.25, 1.25, w[0], w[1], -w[1]]);
    assert!(z.distance(&expect) < 1e-12);

    let h3 = from_registry("pn", 3, None).unwrap();
    let c3 = flow_out(Arc::new(BesselCylinder::new(3)), h3, 1.0, DEFAULT_FLOW_TOL).unwrap();
    assert!(lagrangian_residual(&c3, 30).unwrap() <= 1e-6);
}

#[test]
fn flow_out_at_time_zero_is_the_initial_chart() {
    let h = conformal("1+x^2+y^2");
    let c = flow_out(bessel2(), h, 1.0, DEFAULT_FLOW_TOL).unwrap();
    for (phi, psi) in [(0.3, 0.1), (-1.2, 2.5)] {
        let z = c.embed(&[phi, psi, 0.0]).unwrap();
        let b = bessel_point(phi, &[psi]);
        assert_eq!(&z.x[..2], &b.x[..]);
        assert_eq!(&z.p[..2], &b.p[..]);
    }
}

#[test]
fn degree_one_flow_out_keeps_the_eikonal() {
    let h = conformal("1+x^2+y^2");
    let c = flow_out(
        Arc::new(BesselCylinder::new(2).with_phi_range(0.2, 1.5)),
        h,
        1.0,
        DEFAULT_FLOW_TOL,
    )
    .unwrap();
    assert!(lagrangian_residual(&c, 100).unwrap() <= 1e-6);
    for u in sample_params(&c, 20, 3) {
        let s = c.eikonal(&u).unwrap().unwrap();
        assert!((s - u[0]).abs() <= 1e-7, "{u:?}: {s}");
    }
    assert!(eikonal_residual(&c, 20).unwrap().unwrap() <= 1e-6);
}

#[test]
fn quadratic_flow_out_actions() {
    let h = from_registry("free", 2, None).unwrap();
    let c = flow_out(bessel2(), h, 2.0, DEFAULT_FLOW_TOL).unwrap();
    // E = 1 on the cylinder.
    let u = [0.7, 1.9, 1.5];
    let s = c.eikonal(&u).unwrap().unwrap();
    let r = c.reduced_eikonal(&u).unwrap().unwrap();
    assert!((s - (0.7 + 1.5)).abs() < 1e-12);
    assert!((r - (0.7 + 2.0 * 1.5)).abs() < 1e-12);
}

#[test]
fn model_pair_energy_flow_out() {
    let h = from_registry("pn", 2, None).unwrap();
    let fiber: SharedChart = Arc::new(VerticalFiber::new(2, (-1.0, 1.0)));
    let c = flow_out_energy(fiber, h, 0.0, 1, (-1.0, 1.0), 2.0, DEFAULT_FLOW_TOL).unwrap();
    assert_eq!(c.param_names(), vec!["p1", "t"]);
    for u in sample_params(&c, 20, 1) {
        let z = c.embed(&u).unwrap();
        assert!(z.x[0].abs() < 1e-14 && z.p[1].abs() < 1e-14);
        assert!((z.x[1] - u[1]).abs() < 1e-12 && z.x[1] >= 0.0);
    }
}

#[test]
fn radial_energy_flow_out_is_parametrised_by_angle_and_time() {
    let h = conformal("1+x^2+y^2");
    let c = flow_out_energy(bessel2(), h.clone(), 0.9, 0, (0.0, 2.0), 1.0, DEFAULT_FLOW_TOL).unwrap();
    assert_eq!(c.param_names(), vec!["psi", "t"]);
    for u in sample_params(&c, 30, 5) {
        let z = c.embed(&u).unwrap();
        assert!((h.value(&z.x, &z.p) - 0.9).abs() <= 1e-8);
    }
    assert!(lagrangian_residual(&c, 50).unwrap() <= 1e-6);
    assert!(symmetry_relation_residual(&c, 0, 50).unwrap() <= 1e-6);
}

#[test]
fn free_energy_flow_out_satisfies_the_symmetry_relation() {
    let h = from_registry("free", 2, None).unwrap();
    let fiber: SharedChart = Arc::new(VerticalFiber::new(2, (-0.8, 0.8)));
    let c = flow_out_energy(fiber, h, 1.0, 1, (0.0, 2.0), 1.0, DEFAULT_FLOW_TOL).unwrap();
    assert!(symmetry_relation_residual(&c, 0, 50).unwrap() <= 1e-8);
}

#[test]
fn non_radial_speed_breaks_the_forced_parametrisation() {
    let h = conformal("1+(x-0.5)^2+y^2");
    let forced: SharedChart = Arc::new(FixedSlice::new(bessel2(), 0, 0.6).unwrap());
    let c = Trajectories::new(forced, h, (0.0, 1.0), DEFAULT_FLOW_TOL).unwrap();
    assert!(symmetry_relation_residual(&c, 0, 50).unwrap() >= 1e-3);
}

#[test]
fn energy_outside_the_range_has_no_intersection() {
    let h = conformal("1+x^2+y^2");
    let r = flow_out_energy(bessel2(), h, 1.5, 0, (-2.0, 2.0), 1.0, DEFAULT_FLOW_TOL);
    assert!(matches!(r, Err(Error::NoIntersection(_))));
}

#[test]
fn critical_energy_is_reported_as_glancing() {
    let h = conformal("1+x^2+y^2");
    let r = flow_out_energy(bessel2(), h, 1.0, 0, (-2.0, 2.0), 1.0, DEFAULT_FLOW_TOL);
    assert!(matches!(r, Err(Error::GlancingDetected { .. })));
}

#[test]
fn csv_dump_layout() {
    let h = from_registry("pn", 2, None).unwrap();
    let c = flow_out(bessel2(), h, 1.0, DEFAULT_FLOW_TOL).unwrap();
    let csv = dump_csv(&c, &[2, 3, 2]).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "phi,psi,t,X1,X2,P1,P2,t,E,S");
    assert_eq!(lines.count(), 12);
    let b = dump_csv(&BesselCylinder::new(2), &[3, 4]).unwrap();
    assert!(b.starts_with("phi,psi,X1,X2,P1,P2,S\n"));
}
