use std::f64::consts::PI;

use flowout_core::glancing::*;
use flowout_core::poly::{phase_names, position_names, Polynomial};
use flowout_core::symplectic::field::PolyField;
use flowout_core::symplectic::hamiltonian::{from_registry, Conformal};
use flowout_core::{Error, PhasePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn rho2(src: &str) -> Polynomial {
    Polynomial::parse(src, &position_names(2)).unwrap()
}

fn bump(x0: [f64; 2]) -> Polynomial {
    rho2(&format!("0.5*(1+(x-({}))^2+(y-({}))^2)", x0[0], x0[1]))
}

fn field(src: &str) -> PolyField {
    PolyField::new(Polynomial::parse(src, &phase_names(2)).unwrap())
}

#[test]
fn bump_is_glancing_at_its_critical_energy() {
    let (phi, psi) = (1.3f64, 2.2f64);
    let x0 = [phi * psi.cos(), phi * psi.sin()];
    let rho = bump(x0);
    assert!(conformal_glancing_test(&rho, phi, &[psi], 1e-12));
    let h = Conformal::new("c1", 1.0, rho).unwrap();
    assert!(norm(&glancing_residual(&h, phi, &[psi], 2.0).unwrap()) < 1e-12);
}

#[test]
fn sloped_speed_is_not_glancing() {
    let h = Conformal::new("c1", 1.0, rho2("1+x^2+y^2")).unwrap();
    let r = glancing_residual(&h, 1.0, &[0.0], 0.5).unwrap();
    assert!(norm(&r) >= 0.1);
}

#[test]
fn conformal_dichotomy_examples() {
    let rho = rho2("1+x");
    assert!(conformal_glancing_test(&rho, 0.0, &[PI / 2.0], 1e-12));
    assert!(!conformal_glancing_test(&rho, 1.0, &[0.0], 1e-12));
}

#[test]
fn residual_and_dichotomy_agree_on_a_grid() {
    for src in ["1+x^2", "1+x^2+y^2", "2+x+y^2"] {
        let rho = rho2(src);
        for m in [1.0, 2.0] {
            let h = Conformal::new("c", m, rho.clone()).unwrap();
            for phi in [-1.0, 0.0, 0.5, 2.0] {
                for k in 0..8 {
                    let psi = k as f64 * PI / 4.0;
                    let e = flowout_core::glancing::restricted_energy(&h, &[phi, psi]);
                    let r = glancing_residual(&h, phi, &[psi], e).unwrap();
                    let by_residual = norm(&r) <= 1e-9;
                    assert_eq!(
                        by_residual,
                        conformal_glancing_test(&rho, phi, &[psi], 1e-9),
                        "{src} m={m} {phi} {psi}"
                    );
                }
            }
        }
    }
}

#[test]
fn tangency_examples() {
    let h = from_registry("pn", 2, None).unwrap();
    for phi in [-2.0, 0.0, 3.0] {
        assert!(norm(&tangency_residual(h.as_ref(), phi, &[PI / 2.0]).unwrap()) < 1e-15);
    }
    assert!(norm(&tangency_residual(h.as_ref(), 0.0, &[0.0]).unwrap()) > 0.5);
}

#[test]
fn tangency_and_energy_match_the_glancing_residual() {
    let h = Conformal::new("c", 1.0, rho2("1+x^2")).unwrap();
    for (phi, psi) in [(0.0, PI / 2.0), (1.0, PI / 2.0), (1.0, 0.3), (0.0, 0.0)] {
        let e = restricted_energy(&h, &[phi, psi]);
        let t = norm(&tangency_residual(&h, phi, &[psi]).unwrap()) <= 1e-12;
        let g = norm(&glancing_residual(&h, phi, &[psi], e).unwrap()) <= 1e-12;
        assert_eq!(t, g);
    }
}

#[test]
fn chain_rule_gradient_matches_finite_differences() {
    let h = Conformal::new("c", 1.0, rho2("1+(x-0.3)^2+2*y^2+x*y")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let u = [rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0 * PI)];
        let g = restricted_gradient(&h, &u);
        for j in 0..2 {
            let mut a = u;
            let mut b = u;
            a[j] += 1e-6;
            b[j] -= 1e-6;
            let fd = (restricted_energy(&h, &a) - restricted_energy(&h, &b)) / 2e-6;
            assert!((fd - g[j]).abs() < 1e-6);
        }
    }
}

#[test]
fn hessian_example_values() {
    for (phi, det, tr) in [(2.0f64, 64.0, -20.0), (1.0, 16.0, -8.0)] {
        let psi = 0.4f64;
        let h = Conformal::new("c", 1.0, bump([phi * psi.cos(), phi * psi.sin()])).unwrap();
        let r = restricted_hessian(&h, phi, &[psi]).unwrap();
        assert!((r.det - det).abs() < 1e-5, "{}", r.det);
        assert!((r.trace - tr).abs() < 1e-5, "{}", r.trace);
        assert_eq!(r.kind, GlancingKind::Max);
        assert!((r.energy - 2.0).abs() < 1e-15);
    }
}

#[test]
fn hessian_identities_at_random_bumps() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let phi: f64 = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let psi: f64 = rng.gen_range(0.0..2.0 * PI);
        let h = Conformal::new("c", 1.0, bump([phi * psi.cos(), phi * psi.sin()])).unwrap();
        let r = restricted_hessian(&h, phi, &[psi]).unwrap();
        let rho0 = 0.5f64;
        assert!((rho0.powi(4) * r.det - phi * phi).abs() < 1e-5);
        assert!((rho0.powi(2) * r.trace + 1.0 + phi * phi).abs() < 1e-5);
    }
}

#[test]
fn non_critical_point_is_rejected() {
    let h = Conformal::new("c", 1.0, rho2("1+x^2+y^2")).unwrap();
    assert!(matches!(
        restricted_hessian(&h, 1.0, &[0.0]),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn search_finds_the_bump_and_the_axis_saddles() {
    let x0 = [1.0, 0.5];
    let h = Conformal::new("c", 1.0, bump(x0)).unwrap();
    let found = glancing_search(&h, 2, (-3.0, 3.0), 12, 1e-8).unwrap();
    let maxima: Vec<_> = found.iter().filter(|r| r.kind == GlancingKind::Max).collect();
    let saddles: Vec<_> = found.iter().filter(|r| r.kind == GlancingKind::Saddle).collect();
    assert_eq!(maxima.len(), 2, "{found:#?}");
    assert_eq!(saddles.len(), 2);
    for m in maxima {
        assert!((m.energy - 2.0).abs() < 1e-10);
        assert!((m.z.x[0] - x0[0]).abs() < 1e-8 && (m.z.x[1] - x0[1]).abs() < 1e-8);
    }
    for s in saddles {
        assert!(s.params[0].abs() < 1e-8);
    }
}

#[test]
fn case_one_matches_closed_forms() {
    let g = PolyField::new(model_glancing_surface());
    let z = PhasePoint::zeros(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut tried = 0;
    while tried < 20 {
        let a: f64 = rng.gen_range(-5.0..5.0);
        if a.abs() < 1e-3 {
            continue;
        }
        tried += 1;
        let lag = quadratic_phase_lagrangian(QuadraticCase::I, a).unwrap();
        assert!(lag.transversal);
        let c = pair_classification(&PolyField::new(lag.f1), &PolyField::new(lag.f2), &g, &z, 1e-6).unwrap();
        let expect_a = [[2.0, 2.0 * a], [2.0 * a, 2.0 * a * a]];
        let expect_b = [-2.0 * a, 2.0];
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.a[i][j] - expect_a[i][j]).abs() < 1e-5);
            }
            assert!((c.b[i] - expect_b[i]).abs() < 1e-5);
        }
        assert_eq!(c.case_index, 7);
    }
    let c = {
        let lag = quadratic_phase_lagrangian(QuadraticCase::I, 2.0).unwrap();
        pair_classification(&PolyField::new(lag.f1), &PolyField::new(lag.f2), &g, &z, 1e-6).unwrap()
    };
    assert!((c.a[0][1] - 4.0).abs() < 1e-8 && (c.a[1][1] - 8.0).abs() < 1e-8);
    assert!((c.b[0] + 4.0).abs() < 1e-8);
}

#[test]
fn cases_two_and_three_match_closed_forms() {
    let g = PolyField::new(model_glancing_surface());
    let z = PhasePoint::zeros(2);
    for case in [QuadraticCase::II, QuadraticCase::III] {
        for v in [-3.0, 0.5, 2.0] {
            let lag = quadratic_phase_lagrangian(case, v).unwrap();
            assert!(lag.transversal);
            let c = pair_classification(&PolyField::new(lag.f1), &PolyField::new(lag.f2), &g, &z, 1e-6).unwrap();
            let expect_a = [[0.0, 0.0], [0.0, 2.0]];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((c.a[i][j] - expect_a[i][j]).abs() < 1e-6, "{case:?} {v} {:?}", c.a);
                }
            }
            assert!((c.b[0] - 2.0).abs() < 1e-6 && c.b[1].abs() < 1e-6);
            assert_eq!(c.case_index, 7);
        }
    }
}

#[test]
fn family_parameter_must_be_nonzero() {
    assert!(matches!(
        quadratic_phase_lagrangian(QuadraticCase::III, 0.0),
        Err(Error::DegenerateFamily(_))
    ));
    assert!(matches!("IV".parse::<QuadraticCase>(), Err(Error::NotApplicable(_))));
}

#[test]
fn representation_iv_never_glances() {
    let values: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.75).collect();
    assert!(representation_iv_search(&values, 1e-6).is_empty());
    // {g, f1}(0) = 1 for every member.
    let (f1, _) = representation_iv(1.0, -2.0, 0.5);
    let g = PolyField::new(model_glancing_surface());
    let b = flowout_core::symplectic::poisson_bracket(&g, &PolyField::new(f1), &PhasePoint::zeros(2)).unwrap();
    assert_eq!(b, 1.0);
}

#[test]
fn precondition_errors() {
    let g = PolyField::new(model_glancing_surface());
    let z = PhasePoint::zeros(2);
    let r = pair_classification(&field("p1"), &field("x2"), &g, &z, 1e-6);
    assert!(matches!(r, Err(Error::NotGlancing(_))));
    let r = pair_classification(&field("x2 + p1"), &field("x1"), &g, &z, 1e-6);
    assert!(matches!(r, Err(Error::NotLagrangian(_))));
}

#[test]
fn sign_table_covers_all_cases() {
    let cases = [
        ([[1.0, 0.0], [0.0, 1.0]], [1.0, 0.0], 1),
        ([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], 2),
        ([[1.0, 0.0], [0.0, -1.0]], [1.0, 0.0], 3),
        ([[1.0, 0.0], [0.0, -1.0]], [1.0, 1.0], 4),
        ([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0], 5),
        ([[1.0, 0.0], [0.0, 0.0]], [1.0, 0.0], 6),
        ([[1.0, 0.0], [0.0, 0.0]], [0.0, 1.0], 7),
        ([[1.0, 0.0], [0.0, 0.0]], [0.0, 0.0], 8),
        ([[0.0, 0.0], [0.0, 0.0]], [0.0, 1.0], 9),
        ([[0.0, 0.0], [0.0, 0.0]], [0.0, 0.0], 10),
    ];
    for (a, b, k) in cases {
        let c = classify_jets(a, b, DEFAULT_CLASSIFY_TOL);
        assert_eq!(c.case_index, k);
        assert!(!c.marginal);
    }
    assert!(classify_jets([[1.0, 0.0], [0.0, 1e-5]], [1.0, 0.0], 1e-6).marginal);
}
