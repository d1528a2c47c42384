//! Glancing points of an energy surface on the Bessel cylinder.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifolds::bessel::bessel_point;
use crate::manifolds::sphere::{wrap_angle, SphereFrame};
use crate::numeric::diff::hessian_from_gradient;
use crate::poly::Polynomial;
use crate::symplectic::hamiltonian::Hamiltonian;
use crate::symplectic::phase::{dot, norm, PhasePoint};

fn frame_of(psi: &[f64]) -> SphereFrame {
    SphereFrame::new(psi.len() + 1)
}

/// Residual of the glancing conditions at `bessel_point(phi, psi)`:
/// `d_pH + phi d_xH - m H omega` (n entries), `<d_xH, omega>`, `H - E`.
pub fn glancing_residual(h: &dyn Hamiltonian, phi: f64, psi: &[f64], energy: f64) -> Result<Vec<f64>> {
    let m = h.homogeneity().ok_or_else(|| {
        Error::Unsupported(format!(
            "{} declares no homogeneity degree; use tangency_residual",
            h.name()
        ))
    })?;
    let z = bessel_point(phi, psi);
    h.check_domain(&z.x, &z.p)?;
    let (gx, gp) = h.gradient(&z.x, &z.p);
    let hv = h.value(&z.x, &z.p);
    let w = &z.p;
    let mut r: Vec<f64> = (0..w.len()).map(|i| gp[i] + phi * gx[i] - m * hv * w[i]).collect();
    r.push(dot(&gx, w));
    r.push(hv - energy);
    Ok(r)
}

/// Energy-free tangency test `v_H in T_z Lambda_0`:
/// `d_pH + phi d_xH - <d_pH, omega> omega` and `<d_xH, omega>`.
pub fn tangency_residual(h: &dyn Hamiltonian, phi: f64, psi: &[f64]) -> Result<Vec<f64>> {
    let z = bessel_point(phi, psi);
    h.check_domain(&z.x, &z.p)?;
    let (gx, gp) = h.gradient(&z.x, &z.p);
    let w = &z.p;
    let c = dot(&gp, w);
    let mut r: Vec<f64> = (0..w.len()).map(|i| gp[i] + phi * gx[i] - c * w[i]).collect();
    r.push(dot(&gx, w));
    Ok(r)
}

/// `x = phi omega(psi)` is glancing for `H = |p|^m / rho` iff either
/// `phi != 0` and `grad rho = 0`, or `phi = 0` and `<grad rho(0), omega> = 0`.
pub fn conformal_glancing_test(rho: &Polynomial, phi: f64, psi: &[f64], tol: f64) -> bool {
    let w = frame_of(psi).omega(psi);
    let x: Vec<f64> = w.iter().map(|v| phi * v).collect();
    let g: Vec<f64> = rho.gradient().iter().map(|d| d.eval(&x)).collect();
    if phi.abs() > tol {
        norm(&g) <= tol
    } else {
        dot(&g, &w).abs() <= tol
    }
}

/// `H` restricted to the cylinder, `(phi, psi) -> H(phi omega, omega)`.
pub fn restricted_energy(h: &dyn Hamiltonian, params: &[f64]) -> f64 {
    let z = bessel_point(params[0], &params[1..]);
    h.value(&z.x, &z.p)
}

/// Chain-rule gradient of the restricted energy:
/// `d_phi = <d_xH, omega>`, `d_psi_j = phi <d_xH, d_j omega> + <d_pH, d_j omega>`.
pub fn restricted_gradient(h: &dyn Hamiltonian, params: &[f64]) -> Vec<f64> {
    let (phi, psi) = (params[0], &params[1..]);
    let frame = frame_of(psi);
    let z = bessel_point(phi, psi);
    let (gx, gp) = h.gradient(&z.x, &z.p);
    let mut g = vec![dot(&gx, &z.p)];
    for d in frame.d_omega(psi) {
        g.push(phi * dot(&gx, &d) + dot(&gp, &d));
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlancingKind {
    Min,
    Max,
    Saddle,
    Degenerate,
    NonGlancing,
}

impl std::fmt::Display for GlancingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GlancingKind::Min => "min",
            GlancingKind::Max => "max",
            GlancingKind::Saddle => "saddle",
            GlancingKind::Degenerate => "degenerate",
            GlancingKind::NonGlancing => "non-glancing",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GlancingReport {
    pub z: PhasePoint,
    pub params: Vec<f64>,
    pub energy: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    pub det: f64,
    pub trace: f64,
    pub kind: GlancingKind,
}

fn scale_of(h: &dyn Hamiltonian, z: &PhasePoint) -> f64 {
    let (gx, gp) = h.gradient(&z.x, &z.p);
    1.0 + (dot(&gx, &gx) + dot(&gp, &gp)).sqrt()
}

/// Hessian of the restricted energy in cylinder coordinates, by central
/// differences of the chain-rule gradient.
pub fn restricted_hessian_matrix(h: &dyn Hamiltonian, params: &[f64]) -> DMatrix<f64> {
    let step = 1e-5 * (1.0 + params[0].abs());
    hessian_from_gradient(|u| restricted_gradient(h, u), params, step)
}

fn kind_of(hess: &DMatrix<f64>) -> GlancingKind {
    let scale = hess.norm();
    if scale <= 1e-10 {
        return GlancingKind::Degenerate;
    }
    let eig = SymmetricEigen::new(hess.clone()).eigenvalues;
    let thr = 1e-5 * scale;
    if eig.iter().any(|e| e.abs() <= thr) {
        GlancingKind::Degenerate
    } else if eig.iter().all(|&e| e > 0.0) {
        GlancingKind::Min
    } else if eig.iter().all(|&e| e < 0.0) {
        GlancingKind::Max
    } else {
        GlancingKind::Saddle
    }
}

/// Report at any cylinder point; `kind` is `NonGlancing` when the restricted
/// gradient exceeds `tol * (1 + |grad H|)`.
pub fn glancing_report(h: &dyn Hamiltonian, params: &[f64], tol: f64) -> Result<GlancingReport> {
    let z = bessel_point(params[0], &params[1..]);
    h.check_domain(&z.x, &z.p)?;
    let gradient = restricted_gradient(h, params);
    let hess = restricted_hessian_matrix(h, params);
    let critical = norm(&gradient) <= tol * scale_of(h, &z);
    let kind = if critical {
        kind_of(&hess)
    } else {
        GlancingKind::NonGlancing
    };
    Ok(GlancingReport {
        energy: h.value(&z.x, &z.p),
        z,
        params: params.to_vec(),
        gradient,
        det: hess.determinant(),
        trace: hess.trace(),
        hessian: hess.row_iter().map(|r| r.iter().copied().collect()).collect(),
        kind,
    })
}

/// Like [`glancing_report`], but non-glancing input is an error.
pub fn restricted_hessian(h: &dyn Hamiltonian, phi: f64, psi: &[f64]) -> Result<GlancingReport> {
    let mut params = vec![phi];
    params.extend_from_slice(psi);
    let r = glancing_report(h, &params, 1e-6)?;
    if r.kind == GlancingKind::NonGlancing {
        return Err(Error::Precondition(format!(
            "(phi, psi) = {params:?} is not a critical point of H on the cylinder (|grad| = {:e})",
            norm(&r.gradient)
        )));
    }
    Ok(r)
}

/// Critical points of the restricted energy in a `(phi, psi)` box: a coarse
/// grid followed by damped Newton on the gradient, deduplicated at `1e-4`.
pub fn glancing_search(
    h: &dyn Hamiltonian,
    n: usize,
    phi_range: (f64, f64),
    grid: usize,
    tol: f64,
) -> Result<Vec<GlancingReport>> {
    let frame = SphereFrame::new(n);
    let mut boxes = vec![phi_range];
    boxes.extend(frame.angle_box());
    let g = grid.max(2);
    let mut starts = vec![vec![]];
    for &(a, b) in &boxes {
        starts = starts
            .into_iter()
            .flat_map(|s: Vec<f64>| {
                (0..g).map(move |k| {
                    let mut v = s.clone();
                    v.push(a + (b - a) * (k as f64 + 0.5) / g as f64);
                    v
                })
            })
            .collect();
    }
    let mut found: Vec<GlancingReport> = Vec::new();
    for s in starts {
        let z = bessel_point(s[0], &s[1..]);
        if h.check_domain(&z.x, &z.p).is_err() {
            continue;
        }
        let Some(u) = newton_critical(h, s, &boxes) else {
            continue;
        };
        let rep = glancing_report(h, &u, tol)?;
        if rep.kind == GlancingKind::NonGlancing {
            continue;
        }
        if found.iter().any(|f| param_distance(&f.params, &u) < 1e-4) {
            continue;
        }
        found.push(rep);
    }
    Ok(found)
}

fn param_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut d = (a[0] - b[0]).powi(2);
    for (x, y) in a[1..].iter().zip(&b[1..]) {
        let t = wrap_angle(x - y);
        d += t.min(2.0 * std::f64::consts::PI - t).powi(2);
    }
    d.sqrt()
}

fn newton_critical(h: &dyn Hamiltonian, mut u: Vec<f64>, boxes: &[(f64, f64)]) -> Option<Vec<f64>> {
    let merit = |u: &[f64]| {
        let g = restricted_gradient(h, u);
        dot(&g, &g)
    };
    for _ in 0..60 {
        let g = restricted_gradient(h, &u);
        let gn = norm(&g);
        if !gn.is_finite() {
            return None;
        }
        if gn <= 1e-13 {
            break;
        }
        let hess = restricted_hessian_matrix(h, &u);
        let step = hess
            .clone()
            .svd(true, true)
            .solve(&nalgebra::DVector::from_column_slice(&g), 1e-12)
            .ok()?;
        let f0 = gn * gn;
        let mut lam = 1.0;
        let mut accepted = false;
        while lam > 1e-6 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a - lam * d).collect();
            let z = bessel_point(trial[0], &trial[1..]);
            if h.check_domain(&z.x, &z.p).is_ok() && merit(&trial) < f0 {
                u = trial;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if u[0] < boxes[0].0 - 1e-9 || u[0] > boxes[0].1 + 1e-9 {
        return None;
    }
    for (k, v) in u.iter_mut().enumerate().skip(1) {
        if boxes[k].1 - boxes[k].0 >= 2.0 * std::f64::consts::PI - 1e-12 {
            *v = wrap_angle(*v);
        }
    }
    Some(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::position_names;
    use crate::symplectic::hamiltonian::{from_registry, Conformal};

    fn shifted_rho(x0: [f64; 2]) -> Polynomial {
        let src = format!("0.5*(1+(x-({}))^2+(y-({}))^2)", x0[0], x0[1]);
        Polynomial::parse(&src, &position_names(2)).unwrap()
    }

    #[test]
    fn critical_energy_at_the_bump() {
        let (phi, psi) = (2.0f64, 0.7f64);
        let w = [psi.cos(), psi.sin()];
        let h = Conformal::new("c", 1.0, shifted_rho([phi * w[0], phi * w[1]])).unwrap();
        let r = glancing_residual(&h, phi, &[psi], 2.0).unwrap();
        assert!(norm(&r) < 1e-14, "{r:?}");
    }

    #[test]
    fn free_hamiltonian_glances_everywhere() {
        let h = from_registry("free", 2, None).unwrap();
        for (phi, psi) in [(0.0, 0.0), (1.5, 2.0), (-3.0, 5.0)] {
            assert!(norm(&glancing_residual(h.as_ref(), phi, &[psi], 1.0).unwrap()) < 1e-14);
        }
        let rep = restricted_hessian(h.as_ref(), 0.5, &[1.0]).unwrap();
        assert_eq!(rep.kind, GlancingKind::Degenerate);
    }

    #[test]
    fn undeclared_degree_is_unsupported() {
        let h = crate::symplectic::hamiltonian::FnHamiltonian::new("v", |x: &[f64], p: &[f64]| p[0] * p[0] + x[0]);
        assert!(matches!(
            glancing_residual(&h, 0.0, &[0.0], 0.0),
            Err(Error::Unsupported(_))
        ));
    }
}
