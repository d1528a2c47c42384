use std::sync::Arc;

use flowout_core::manifolds::PlaneWave;
use flowout_core::normal_form::*;
use flowout_core::numeric::diff::gradient;
use flowout_core::poly::{position_names, Polynomial};
use flowout_core::symplectic::hamiltonian::Conformal;
use flowout_core::{Error, SharedHamiltonian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn conformal2(src: &str) -> SharedHamiltonian {
    let rho = Polynomial::parse(src, &position_names(2)).unwrap();
    Arc::new(Conformal::new("conformal2", 2.0, rho).unwrap())
}

fn problem(src: &str, samples: usize) -> flowout_core::Result<TransitionProblem> {
    let cfg = TransitionConfig {
        samples,
        ..Default::default()
    };
    TransitionProblem::new(
        conformal2(src),
        Arc::new(PlaneWave::new(vec![1.0, 0.0], (-2.0, 2.0))),
        vec![0.0, 0.0],
        cfg,
    )
}

#[test]
fn normal_form_values() {
    let (z, s) = normal_form_manifold(0.0, 0.0, 0.0);
    assert_eq!(z.to_array(), [0.0; 6]);
    assert_eq!(s, 0.0);
    let (z, s) = normal_form_manifold(1.0, 0.0, 1.0);
    assert!((s + 4.0 / 3.0).abs() < 1e-15);
    assert_eq!(z.p_xi, -2.0);
    assert_eq!(z.eps, 2.0);
    assert_eq!(z.manifold_defect(), 0.0);
}

#[test]
fn normal_form_momenta_are_phase_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (xi, tau) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let g = gradient(|v| normal_form_phase(v[0], v[1]), &[xi, tau], 1e-5);
        let (z, _) = normal_form_manifold(xi, 0.3, tau);
        assert!((g[0] - z.p_xi).abs() < 1e-8);
        // d S / d tau = -eps on the manifold
        assert!((g[1] + z.eps).abs() < 1e-8);
    }
}

#[test]
fn example_point() {
    let z = example_manifold_point(0.3, 1.0, 0.4);
    let want = [0.36, 0.45, 0.45, 0.3, 1.0, 0.4];
    assert!(z.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15));
    let n = example_canonical_map(z, 1.0);
    assert!((n.p_xi - 0.36).abs() < 1e-15);
    assert_eq!(n.p_eta, 0.0);
    assert!((n.eps - 0.45).abs() < 1e-15);
    assert_eq!(n.xi, 0.3);
    assert_eq!(n.eta, 0.0);
    assert!((n.tau + 0.6).abs() < 1e-15);
    assert!(n.manifold_defect() < 1e-15);
}

#[test]
fn example_momenta_match_phase() {
    let (x, y, t) = (0.7, -0.4, 0.9);
    let g = gradient(|v| example_phase(v[0], v[1], v[2]), &[x, y, t], 1e-5);
    let z = example_manifold_point(x, y, t);
    assert!((g[0] - z[0]).abs() < 1e-8);
    assert!((g[1] - z[1]).abs() < 1e-8);
    assert!((g[2] + z[2]).abs() < 1e-8);
}

#[test]
fn example_map_is_symplectic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let z: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        assert!(example_symplectic_defect(z, rng.gen_range(-1.0..1.0)) < 1e-9);
    }
}

#[test]
fn eps_depends_only_on_energy() {
    let j = example_map_jacobian([0.2, 0.5, 0.7, -0.1, 0.4, 1.3], 0.5);
    for c in 0..6 {
        let want = if c == 2 { 1.0 } else { 0.0 };
        assert!((j[(2, c)] - want).abs() < 1e-9);
    }
    // pi_E sees E through eps and x through xi
    let z = [0.2, 0.5, 0.7, -0.1, 0.4, 1.3];
    let n = example_canonical_map(z, 0.0);
    let pe = pi_e(z);
    assert_eq!((pe[0], pe[2]), (n.xi, n.eps));
    assert_eq!(pi_t(z)[2], z[5]);
}

#[test]
fn example_manifold_maps_onto_normal_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (x, y, t) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let n = example_canonical_map(example_manifold_point(x, y, t), rng.gen_range(-1.0..1.0));
        assert!(n.manifold_defect() < 1e-12);
    }
}

#[test]
fn normal_form_section_is_a_figure_eight() {
    let sec = normal_form_section(0.25, 720);
    let curve: Vec<[f64; 2]> = sec.iter().map(|p| [p[0], p[1]]).collect();
    assert_eq!(self_intersections(&curve), 1);
    let turns = turning_points(&curve);
    assert_eq!(turns.len(), 2);
    for k in turns {
        assert!((curve[k][0].abs() - 0.5).abs() < 1e-4);
    }
}

#[test]
fn glancing_extremum_is_found() {
    let p = problem("1 + x1^2 + x2^2", 90).unwrap();
    assert!((p.e0() - 1.0).abs() < 1e-15);
    assert_eq!(p.extremum(), Extremum::Max);
    assert!((p.epsilon_proxy(0.9) - 0.1).abs() < 1e-15);
}

#[test]
fn regimes_across_the_critical_energy() {
    let p = problem("1 + x1^2 + x2^2", 90).unwrap();
    let got: Vec<Regime> = [0.90, 0.95, 1.00, 1.05, 1.10]
        .iter()
        .map(|&e| p.sample(e).unwrap().regime)
        .collect();
    assert_eq!(
        got,
        [
            Regime::InfinityCurve,
            Regime::InfinityCurve,
            Regime::DegenerateTrajectory,
            Regime::Empty,
            Regime::Empty
        ]
    );
    let d = p.sample(1.0).unwrap();
    assert_eq!(d.points.len(), 1);
    assert!(d.points[0].y.abs() < 1e-12);
}

#[test]
fn infinity_curve_geometry() {
    let p = problem("1 + x1^2 + x2^2", 360).unwrap();
    let s = p.sample(0.9).unwrap();
    assert_eq!(s.self_intersections, 1);
    assert_eq!(s.cusps.len(), 2);
    let r = (1.0f64 / 0.9 - 1.0).sqrt();
    assert!((s.level_radius.unwrap() - r).abs() < 1e-10);
    for c in &s.cusps {
        assert!(c.phase_slope <= 1e-6, "phase slope {}", c.phase_slope);
        assert!((c.y.abs() - r).abs() < 1e-3, "cusp at {}", c.y);
    }
    assert!(s.cusps[0].y * s.cusps[1].y < 0.0);
}

#[test]
fn momentum_is_the_phase_derivative() {
    let p = problem("1 + x1^2 + x2^2", 120).unwrap();
    let s = p.sample(0.9).unwrap();
    let r = p.phase_derivative_residual(0.9, &s, 1e-5).unwrap();
    assert!(r < 1e-5, "residual {r}");
}

#[test]
fn section_curve_is_symmetric() {
    let p = problem("1 + x1^2 + x2^2", 120).unwrap();
    let s = p.sample(0.9).unwrap();
    let pts: Vec<[f64; 2]> = s.points.iter().map(|q| [q.y, q.p_y]).collect();
    for q in &pts {
        let best = pts
            .iter()
            .map(|o| ((o[0] + q[0]).powi(2) + (o[1] + q[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-8, "no mirror for {q:?}");
    }
}

#[test]
fn diameter_scales_like_root_eps() {
    let p = problem("1 + x1^2 + x2^2", 180).unwrap();
    let diam = |e: f64| {
        let s = p.sample(e).unwrap();
        let ys = s.points.iter().map(|q| q.y);
        ys.clone().fold(f64::MIN, f64::max) - ys.fold(f64::MAX, f64::min)
    };
    let (d1, d2) = (diam(1.0 - 0.01), diam(1.0 - 0.0025));
    let slope = (d1 / d2).ln() / 4f64.ln();
    assert!((slope - 0.5).abs() < 0.02, "slope {slope}");
}

#[test]
fn sweep_is_monotone() {
    let p = problem("1 + x1^2 + x2^2", 72).unwrap();
    let mut last = f64::INFINITY;
    let mut seen_empty = false;
    for k in 0..11 {
        let e = 0.9 + 0.02 * k as f64;
        let s = p.sample(e).unwrap();
        match s.regime {
            Regime::InfinityCurve => {
                assert!(!seen_empty);
                let r = s.level_radius.unwrap();
                assert!(r < last);
                last = r;
            }
            Regime::DegenerateTrajectory => assert!((e - 1.0).abs() < 1e-12),
            Regime::Empty => seen_empty = true,
        }
        assert_eq!(s.regime == Regime::InfinityCurve, s.epsilon_proxy > 0.0);
    }
    assert!(seen_empty);
}

#[test]
fn saddle_or_degenerate_point_is_refused() {
    assert!(matches!(problem("1 + x1^2 - x2^2", 72), Err(Error::NotApplicable(_))));
    assert!(matches!(problem("1 + x1^4 + x2^2", 72), Err(Error::NotApplicable(_))));
}

#[test]
fn non_glancing_point_is_refused() {
    assert!(matches!(problem("1 + x1 + x2^2", 72), Err(Error::NotGlancing(_))));
}

#[test]
fn figure_tables() {
    let p = problem("1 + x1^2 + x2^2", 36).unwrap();
    let (f1, f2) = figure_data(&p.sample(0.9).unwrap());
    assert!(f1.starts_with("# regime: infinity-curve"));
    assert_eq!(f1.lines().count(), 2 + 37);
    assert_eq!(f2.lines().nth(1), Some("y,phase"));
    let (e1, _) = figure_data(&p.sample(1.1).unwrap());
    assert_eq!(e1.lines().count(), 2);
}
