use std::f64::consts::PI;
use std::sync::Arc;

use flowout_core::manifolds::{BesselCylinder, ManifoldChart, Trajectories};
use flowout_core::poly::{position_names, Polynomial};
use flowout_core::semiclassical::*;
use flowout_core::symplectic::hamiltonian::Conformal;
use flowout_core::{Error, SharedHamiltonian};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;

/// `J_n(x) = (1/pi) int_0^pi cos(n s - x sin s) ds`; the trapezoid rule is
/// spectrally accurate for this periodic integrand.
fn bessel_oracle(n: i32, x: f64) -> f64 {
    let m = 4000;
    let mut s = 0.0;
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        s += (n as f64 * th - x * th.sin()).cos();
    }
    s / m as f64
}

const J0_FIRST_ZERO: f64 = 2.404825557695773;
const J1_FIRST_ZERO: f64 = 3.831705970207512;

#[test]
fn bessel_functions_match_the_integral_representation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let x: f64 = rng.gen_range(0.0..80.0);
        assert!((bessel_j0(x) - bessel_oracle(0, x)).abs() < 1e-12, "J0({x})");
        assert!((bessel_j1(x) - bessel_oracle(1, x)).abs() < 1e-12, "J1({x})");
    }
}

#[test]
fn oracle_zeros() {
    assert!(bessel_oracle(0, J0_FIRST_ZERO).abs() < 1e-14);
    assert!(bessel_oracle(1, J1_FIRST_ZERO).abs() < 1e-14);
}

#[test]
fn source_values() {
    let h = 0.1;
    assert!((bessel_source(&[0.0, 0.0], h).unwrap() - 7.926654595212022).abs() < 1e-12);
    let r = h * J0_FIRST_ZERO;
    assert!(bessel_source(&[r * 0.6, r * 0.8], h).unwrap().abs() < 1e-10);
    assert!(exact_u1(&[h * J1_FIRST_ZERO, 0.0], h).unwrap().abs() < 1e-10);
    assert!(bessel_source(&[1.0, 1.0], -1.0).is_err());
}

#[test]
fn shifted_source_centre() {
    assert_eq!(shifted_bessel_source(&[0.7, 0.0], &[0.7, 0.0], 0.05).unwrap(), 1.0);
}

#[test]
fn exact_solution_is_second_order_consistent() {
    let pts = radial_samples(50, 0.05, 1.2);
    let rep = helmholtz_richardson(&pts, 0.1, 1e-3).unwrap();
    assert!(rep.ratio >= 3.8 && rep.ratio <= 4.2, "{rep:?}");
    assert!(rep.extrapolated_max < 1e-3 * rep.rms.0.max(1e-12) + 1e-9, "{rep:?}");
    assert!((rep.source_constant - (2.0 * PI / 0.1).sqrt()).abs() < 1e-12);
}

fn gaussian(xi: &[f64]) -> f64 {
    (-0.5 * xi.iter().map(|v| v * v).sum::<f64>()).exp()
}

#[test]
fn model_pair_gaussian_closed_form() {
    let v = model_pair_integral(gaussian, &[0.0], 0.05, 10.0).unwrap();
    let exact = Complex64::new(0.0, (2.0 * PI).sqrt() / 2.0);
    assert!((v - exact).norm() <= 1e-8 * exact.norm(), "{v}");
    for &(x1, xn, h) in &[(0.0, -0.03, 0.05), (0.02, 0.04, 0.02), (-0.1, 0.4, 0.1)] {
        let v = model_pair_integral(gaussian, &[x1, xn], h, 10.0).unwrap();
        let e = (-0.5f64 * (x1 / h).powi(2)).exp() * (PI / 2.0).sqrt() * (1.0 + erf(xn / (h * 2f64.sqrt())));
        assert!(
            (v - Complex64::new(0.0, e)).norm() <= 1e-8 * e.abs(),
            "{x1} {xn}: {v} vs {e}"
        );
    }
}

#[test]
fn model_pair_cutoff_independence() {
    for xn in [-0.2, 0.0, 0.3] {
        let a = model_pair_integral(gaussian, &[xn], 0.05, 10.0).unwrap();
        let b = model_pair_integral(gaussian, &[xn], 0.05, 20.0).unwrap();
        assert!((a - b).norm() <= 1e-10);
    }
}

#[test]
fn model_pair_validity_domain() {
    let r = model_pair_integral(gaussian, &[5.5], 0.05, 10.0);
    assert!(matches!(r, Err(Error::ValidityDomain(_))));
}

#[test]
fn translated_source() {
    let f = |y: &[f64]| y[0] + 10.0 * y[1];
    assert_eq!(pair_solution(f, &[1.0, 2.0], 0.5), 16.0);
}

fn bump(t: f64, c: f64, w: f64) -> f64 {
    let s = (t - c) / w;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

#[test]
fn zero_amplitude_gives_zero() {
    let chart = WkbChart::from_fns(|_, t| t * t, |_, _| 0.0, vec![(-1.0, 1.0)], (0.0, 3.0)).unwrap();
    let r = time_integral(&chart, &[0.0], 1.0, 0.01, 5.0).unwrap();
    assert_eq!(r.value(), Complex64::new(0.0, 0.0));
}

/// Gaussian profile of width 0.25 about the stationary time, windowed to a
/// compact support.
fn windowed_gaussian(t: f64) -> f64 {
    let window = smooth_step((0.25 - t) / 0.2) * smooth_step((t - 1.75) / 0.2);
    (-(t - 1.0f64).powi(2) / (2.0 * 0.25 * 0.25)).exp() * window
}

fn normal_form_chart() -> WkbChart {
    WkbChart::from_fns(
        |x, t| -x[0] * x[0] * t - t.powi(3) / 3.0,
        |_, t| windowed_gaussian(t),
        vec![(-1.0, 1.0)],
        (0.05, 1.95),
    )
    .unwrap()
}

#[test]
fn stationary_phase_error_is_first_order() {
    let chart = normal_form_chart();
    let hs = [0.04, 0.02, 0.01];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let r = time_integral(&chart, &[0.5], 1.25, h, 5.0).unwrap();
            assert_eq!(r.stationary.len(), 1);
            assert!((r.stationary[0].t - 1.0).abs() < 1e-8);
            assert!((r.stationary[0].second_derivative + 2.0).abs() < 1e-5);
            assert!(r.warnings.is_empty(), "{:?}", r.warnings);
            (r.value() - r.stationary_sum()).norm() / r.value().norm()
        })
        .collect();
    let slope = (errs[0] / errs[2]).ln() / (hs[0] / hs[2]).ln();
    assert!(slope >= 0.8, "{errs:?} slope {slope}");
    assert!(errs[2] < 0.05, "{errs:?}");
}

/// Integration by parts with `psi' = 1`: `|int B e^{it/h}| <= h^k int |B^(k)|`.
#[test]
fn nonstationary_phase_decays() {
    let chart = WkbChart::from_fns(|_, t| t, |_, t| bump(t, 1.5, 1.0), vec![(-1.0, 1.0)], (0.5, 2.5)).unwrap();
    let n = 20_000;
    let dt = 2.0 / n as f64;
    let d = 1e-4;
    let (mut v1, mut v2) = (0.0, 0.0);
    for k in 0..n {
        let t = 0.5 + (k as f64 + 0.5) * dt;
        v1 += ((bump(t + d, 1.5, 1.0) - bump(t - d, 1.5, 1.0)) / (2.0 * d)).abs() * dt;
        v2 += ((bump(t + d, 1.5, 1.0) - 2.0 * bump(t, 1.5, 1.0) + bump(t - d, 1.5, 1.0)) / (d * d)).abs() * dt;
    }
    for h in [0.2, 0.1, 0.05] {
        let raw = time_integral(&chart, &[0.0], 0.0, h, 5.0).unwrap().value().norm() * h;
        assert!(
            raw <= h * v1 && raw <= h * h * v2,
            "h = {h}: {raw} vs {} {}",
            h * v1,
            h * h * v2
        );
    }
}

#[test]
fn edge_stationary_point_warns() {
    let chart = WkbChart::from_fns(|_, t| -(t - 0.05).powi(2), |_, _| 1.0, vec![(-1.0, 1.0)], (0.0, 1.0)).unwrap();
    let r = time_integral(&chart, &[0.0], 0.0, 0.01, 5.0).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("lower limit")), "{:?}", r.warnings);
}

fn conformal2(src: &str) -> (SharedHamiltonian, Polynomial) {
    let rho = Polynomial::parse(src, &position_names(2)).unwrap();
    (Arc::new(Conformal::new("conformal2", 2.0, rho.clone()).unwrap()), rho)
}

fn trajectories(src: &str) -> (Trajectories, Polynomial) {
    let (h, rho) = conformal2(src);
    let base = Arc::new(BesselCylinder::new(2).with_phi_range(0.6, 1.4));
    (Trajectories::new(base, h, (0.0, 0.3), 1e-12).unwrap(), rho)
}

#[test]
fn transport_of_constant_amplitude_on_straight_rays() {
    let (traj, _) = trajectories("1");
    let amp = transport_amplitude(Arc::new(|_: &[f64]| 1.0), &traj, 4).unwrap();
    for u in [[0.7, 1.0, 0.0], [1.2, 4.0, 0.25]] {
        assert_eq!(amp.transported(&u), 1.0);
    }
}

#[test]
fn transport_starts_at_the_initial_amplitude() {
    let (traj, _) = trajectories("1+0.2*x^2+0.1*y^2");
    let a = |u: &[f64]| 1.0 + 0.3 * u[0] * u[1].cos();
    let amp = transport_amplitude(Arc::new(a), &traj, 4).unwrap();
    for u in [[0.8, 0.4], [1.3, 5.0]] {
        assert_eq!(amp.transported(&[u[0], u[1], 0.0]), a(&u));
    }
}

#[test]
fn caustics_are_refused() {
    let (h, _) = conformal2("1");
    let base = Arc::new(BesselCylinder::new(2).with_phi_range(-1.0, 1.0));
    let traj = Trajectories::new(base, h, (0.0, 0.3), 1e-12).unwrap();
    let r = transport_amplitude(Arc::new(|_: &[f64]| 1.0), &traj, 5);
    assert!(matches!(r, Err(Error::Caustic(_))), "{r:?}");
}

#[test]
fn wkb_chart_of_a_flow_out() {
    let (traj, rho) = trajectories("1+0.2*x^2+0.1*y^2");
    let a = |u: &[f64]| (1.0 + 0.3 * u[0] * u[1].cos()) * (-(u[0] - 1.0).powi(2)).exp();
    let amp = transport_amplitude(Arc::new(a), &traj, 4).unwrap();
    let chart = wkb_from_flow_out(traj.clone(), amp, vec![(-3.0, 3.0), (-3.0, 3.0)]).unwrap();
    let rho_f = |x: &[f64]| rho.eval(x);
    for (phi, psi, t) in [(1.0, 1.2, 0.15), (0.8, 2.5, 0.1), (1.2, 4.0, 0.2)] {
        let z = traj.embed(&[phi, psi, t]).unwrap();
        let d = 1e-5;
        let grad: Vec<f64> = (0..2)
            .map(|i| {
                let mut p = z.x.clone();
                let mut m = z.x.clone();
                p[i] += d;
                m[i] -= d;
                (chart.phase(&p, t).unwrap() - chart.phase(&m, t).unwrap()) / (2.0 * d)
            })
            .collect();
        assert!(
            (grad[0] - z.p[0]).abs() < 1e-6 && (grad[1] - z.p[1]).abs() < 1e-6,
            "{grad:?} {z:?}"
        );
        if t == 0.0 {
            continue;
        }
        let res = wkb_residual(&chart, rho_f, &z.x, t, 1e-3).unwrap();
        assert!(res.c0.abs() <= 1e-6, "{res:?}");
        assert!(res.c1.abs() <= 1e-4, "{res:?}");
        let r: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&h| res.at(h).norm()).collect();
        for w in r.windows(2) {
            let q = w[0] / w[1];
            assert!((3.5..=4.5).contains(&q), "{r:?}");
        }
    }
}

#[test]
fn wkb_amplitude_at_time_zero() {
    let (traj, _) = trajectories("1+0.2*x^2+0.1*y^2");
    let amp = transport_amplitude(Arc::new(|_: &[f64]| 1.0), &traj, 3).unwrap();
    let chart = wkb_from_flow_out(traj, amp, vec![(-3.0, 3.0), (-3.0, 3.0)]).unwrap();
    let phi: f64 = 0.9;
    let b = chart.amplitude(&[phi * 1.1f64.cos(), phi * 1.1f64.sin()], 0.0).unwrap();
    assert!((b - 1.0 / phi.sqrt()).abs() < 1e-10);
    assert!((chart.phase(&[phi * 1.1f64.cos(), phi * 1.1f64.sin()], 0.0).unwrap() - phi).abs() < 1e-10);
}
