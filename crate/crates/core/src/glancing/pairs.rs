//! Second-order invariants of a Lagrangian manifold `{f1 = f2 = 0}` glancing
//! an energy surface `{g = 0}` in `T*R^2`.

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::diff::jacobian;
use crate::poly::{phase_names, Polynomial};
use crate::symplectic::bracket::nested;
use crate::symplectic::field::{PolyField, ScalarField};
use crate::symplectic::phase::PhasePoint;

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct PairClassification {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub det_a: f64,
    pub tbab: f64,
    pub case_index: u8,
    /// Set when a quantity declared nonzero lies within 100 times its zero
    /// threshold.
    pub marginal: bool,
    pub tol: f64,
}

/// Zero decisions used by the sign table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignPattern {
    pub a_zero: bool,
    pub b_zero: bool,
    pub det_sign: i8,
    pub tbab_zero: bool,
    pub marginal: bool,
}

/// Zero thresholds are `tol s_A` for `A`, `tol s_B` for `B`, `tol s_A^2` for
/// `det A` and `tol s_A s_B^2` for `tB A B`, with `s = 1 + |.|`.
pub fn sign_pattern(a: &Matrix2<f64>, b: &Vector2<f64>, tol: f64) -> SignPattern {
    let sa = 1.0 + a.norm();
    let sb = 1.0 + b.norm();
    let det = a.determinant();
    let tbab = (b.transpose() * a * b)[(0, 0)];
    let tests = [
        (a.norm(), tol * sa),
        (b.norm(), tol * sb),
        (det.abs(), tol * sa * sa),
        (tbab.abs(), tol * sa * sb * sb),
    ];
    let marginal = tests.iter().any(|&(v, thr)| v > thr && v <= 100.0 * thr);
    let det_zero = tests[2].0 <= tests[2].1;
    SignPattern {
        a_zero: tests[0].0 <= tests[0].1,
        b_zero: tests[1].0 <= tests[1].1,
        det_sign: if det_zero {
            0
        } else if det > 0.0 {
            1
        } else {
            -1
        },
        tbab_zero: tests[3].0 <= tests[3].1,
        marginal,
    }
}

/// Case index in `1..=10` of the sign table.
pub fn case_from_pattern(s: &SignPattern) -> u8 {
    if s.a_zero {
        return if s.b_zero { 10 } else { 9 };
    }
    match s.det_sign {
        1 => {
            if s.b_zero {
                2
            } else {
                1
            }
        }
        -1 => {
            if !s.tbab_zero {
                3
            } else if !s.b_zero {
                4
            } else {
                5
            }
        }
        _ => {
            if !s.tbab_zero {
                6
            } else if !s.b_zero {
                7
            } else {
                8
            }
        }
    }
}

pub fn classify_jets(a: [[f64; 2]; 2], b: [f64; 2], tol: f64) -> PairClassification {
    let am = Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]);
    let bv = Vector2::new(b[0], b[1]);
    let s = sign_pattern(&am, &bv, tol);
    PairClassification {
        a,
        b,
        det_a: am.determinant(),
        tbab: (bv.transpose() * am * bv)[(0, 0)],
        case_index: case_from_pattern(&s),
        marginal: s.marginal,
        tol,
    }
}

/// `A_z = ({f2,{f2,g}}, -{f1,{f2,g}}; -{f2,{f1,g}}, {f1,{f1,g}})(z)`,
/// `B_z = ({g,{g,f1}}, {g,{g,f2}})(z)`.
pub fn pair_jets(
    f1: &dyn ScalarField,
    f2: &dyn ScalarField,
    g: &dyn ScalarField,
    z: &PhasePoint,
) -> Result<([[f64; 2]; 2], [f64; 2])> {
    let a = [
        [nested(&[f2, f2, g], z)?, -nested(&[f1, f2, g], z)?],
        [-nested(&[f2, f1, g], z)?, nested(&[f1, f1, g], z)?],
    ];
    let b = [nested(&[g, g, f1], z)?, nested(&[g, g, f2], z)?];
    Ok((a, b))
}

pub fn pair_classification(
    f1: &dyn ScalarField,
    f2: &dyn ScalarField,
    g: &dyn ScalarField,
    z: &PhasePoint,
    tol: f64,
) -> Result<PairClassification> {
    if z.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "pair classification needs n = 2, got n = {}",
            z.dim()
        )));
    }
    let commute = nested(&[f1, f2], z)?;
    let conds = [
        ("g", g.value(z)),
        ("f1", f1.value(z)),
        ("f2", f2.value(z)),
        ("{g,f1}", nested(&[g, f1], z)?),
        ("{g,f2}", nested(&[g, f2], z)?),
    ];
    if let Some((name, v)) = conds.iter().find(|(_, v)| v.abs() > tol) {
        return Err(Error::NotGlancing(format!("{name}(z) = {v:e}")));
    }
    if commute.abs() > tol {
        return Err(Error::NotLagrangian(commute));
    }
    let (a, b) = pair_jets(f1, f2, g, z)?;
    let sym = (a[0][1] - a[1][0]).abs();
    if sym > 1e-6 * (1.0 + a[0][1].abs()) {
        return Err(Error::NotLagrangian(sym));
    }
    Ok(classify_jets(a, b, tol))
}

/// Quadratic-phase families in the mixed representations of `T*R^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadraticCase {
    I,
    II,
    III,
}

impl std::str::FromStr for QuadraticCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(QuadraticCase::I),
            "II" | "2" => Ok(QuadraticCase::II),
            "III" | "3" => Ok(QuadraticCase::III),
            "IV" | "4" => Err(Error::NotApplicable(
                "representation IV carries no glancing transversal quadratic phase".into(),
            )),
            other => Err(Error::InvalidInput(format!("unknown case `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticLagrangian {
    pub f1: Polynomial,
    pub f2: Polynomial,
    pub transversal: bool,
}

fn phase_poly(src: &str) -> Polynomial {
    Polynomial::parse(src, &phase_names(2)).expect("built-in polynomial")
}

/// The model energy surface `g = p1^2 - x1 - p2`.
pub fn model_glancing_surface() -> Polynomial {
    phase_poly("p1^2 - x1 - p2")
}

/// Defining functions of the Lagrangian plane generated by the quadratic
/// phase of the given case:
/// * I: `phi = (a x1^2 - 2 x1 x2)/2`, `p = d_x phi`;
/// * II: `phi = (2 xi1 xi2 + c xi2^2)/2`, `x = -d_xi phi`;
/// * III: `phi = b (xi1 + x2)^2 / 2`, `x1 = -d_xi1 phi`, `p2 = d_x2 phi`.
pub fn quadratic_phase_lagrangian(case: QuadraticCase, param: f64) -> Result<QuadraticLagrangian> {
    if param == 0.0 || !param.is_finite() {
        return Err(Error::DegenerateFamily(format!(
            "family parameter must be nonzero, got {param}"
        )));
    }
    let v = param;
    let (f1, f2) = match case {
        QuadraticCase::I => (phase_poly(&format!("p1 - ({v})*x1 + x2")), phase_poly("p2 + x1")),
        QuadraticCase::II => (phase_poly("x1 + p2"), phase_poly(&format!("x2 + p1 + ({v})*p2"))),
        QuadraticCase::III => (
            phase_poly(&format!("x1 + ({v})*(p1 + x2)")),
            phase_poly(&format!("p2 - ({v})*(p1 + x2)")),
        ),
    };
    let transversal = transversal_to_x1(
        &PolyField::new(f1.clone()),
        &PolyField::new(f2.clone()),
        &PhasePoint::zeros(2),
    );
    Ok(QuadraticLagrangian { f1, f2, transversal })
}

/// `T_z Lambda cap (T_z {x1 = 0})^sigma = {0}`, with `Lambda = {f1 = f2 = 0}`.
///
/// The symplectic orthogonal of `T{x1 = 0}` is spanned by `d/dp1`; the test is
/// that the tangent plane together with `d/dp1` has rank 3.
pub fn transversal_to_x1(f1: &dyn ScalarField, f2: &dyn ScalarField, z: &PhasePoint) -> bool {
    let n = z.dim();
    let jac = jacobian(
        |v| {
            let q = PhasePoint::from_slice(v);
            vec![f1.value(&q), f2.value(&q)]
        },
        &z.to_vec(),
        1e-6,
    );
    if jac.rank(1e-9 * (1.0 + jac.norm())) < 2 {
        return false;
    }
    let Some(pinv) = jac.clone().pseudo_inverse(1e-12).ok() else {
        return false;
    };
    // Columns of the projector onto ker J span the tangent plane.
    let tangent = DMatrix::<f64>::identity(2 * n, 2 * n) - pinv * &jac;
    let mut m = DMatrix::zeros(2 * n, 2 * n + 1);
    m.columns_mut(0, 2 * n).copy_from(&tangent);
    m[(n, 2 * n)] = 1.0;
    m.rank(1e-8) == n + 1
}

/// Quadratic phases in representation IV,
/// `phi(x1, xi2) = (alpha x1^2 + 2 beta x1 xi2 + gamma xi2^2) / 2` with
/// `p1 = d_x1 phi`, `x2 = -d_xi2 phi`.
pub fn representation_iv(alpha: f64, beta: f64, gamma: f64) -> (Polynomial, Polynomial) {
    (
        phase_poly(&format!("p1 - ({alpha})*x1 - ({beta})*p2")),
        phase_poly(&format!("x2 + ({beta})*x1 + ({gamma})*p2")),
    )
}

/// Grid members of representation IV that are glancing with respect to the
/// model surface at `z = 0` and transversal to `{x1 = 0}`.
pub fn representation_iv_search(values: &[f64], tol: f64) -> Vec<(f64, f64, f64)> {
    let g = PolyField::new(model_glancing_surface());
    let z = PhasePoint::zeros(2);
    let mut hits = Vec::new();
    for &a in values {
        for &b in values {
            for &c in values {
                let (f1, f2) = representation_iv(a, b, c);
                let (f1, f2) = (PolyField::new(f1), PolyField::new(f2));
                let glancing = pair_classification(&f1, &f2, &g, &z, tol).is_ok();
                if glancing && transversal_to_x1(&f1, &f2, &z) {
                    hits.push((a, b, c));
                }
            }
        }
    }
    hits
}
