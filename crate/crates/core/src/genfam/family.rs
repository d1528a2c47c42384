//! Generating families `Phi(theta, x)`, their critical sets and the invariant
//! density `F[Phi, dy]`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::diff::try_jacobian;
use crate::symplectic::phase::{symplectic_product, PhasePoint};

pub trait GeneratingFamily: Send + Sync + fmt::Debug {
    /// Number `N` of fibre variables.
    fn n_theta(&self) -> usize;

    /// Dimension `d` of the base.
    fn dim_x(&self) -> usize;

    fn theta_names(&self) -> Vec<String>;

    fn value(&self, theta: &[f64], x: &[f64]) -> Result<f64>;

    fn grad_theta(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let s = 1e-6 * (1.0 + norm_of(theta));
        fd_grad(|v| self.value(v, x), theta, s)
    }

    fn grad_x(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let s = 1e-6 * (1.0 + norm_of(x));
        fd_grad(|v| self.value(theta, v), x, s)
    }

    /// Maps `theta` to a canonical representative (angles wrapped).
    fn canonicalize(&self, _theta: &mut [f64]) {}

    /// Default Newton seeds for a base point.
    fn default_seeds(&self, _x: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.n_theta()]]
    }
}

fn norm_of(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn fd_grad<F>(f: F, at: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut w = at.to_vec();
    (0..at.len())
        .map(|i| {
            let o = w[i];
            w[i] = o + step;
            let a = f(&w)?;
            w[i] = o - step;
            let b = f(&w)?;
            w[i] = o;
            Ok((a - b) / (2.0 * step))
        })
        .collect()
}

/// `d^2 Phi / d theta d theta` by differences of the analytic `theta` gradient.
pub fn theta_hessian(fam: &dyn GeneratingFamily, theta: &[f64], x: &[f64]) -> Result<DMatrix<f64>> {
    let s = 1e-6 * (1.0 + norm_of(theta));
    try_jacobian(|v| fam.grad_theta(v, x), theta, s)
}

/// `d^2 Phi / d theta d x`.
pub fn theta_x_block(fam: &dyn GeneratingFamily, theta: &[f64], x: &[f64]) -> Result<DMatrix<f64>> {
    let s = 1e-6 * (1.0 + norm_of(x));
    try_jacobian(|v| fam.grad_theta(theta, v), x, s)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub residual: f64,
    /// `sigma_N / sigma_1` of `(Phi_theta_theta, Phi_theta_x)`.
    pub rank_ratio: f64,
    /// The rank-`N` condition fails (`rank_ratio < 1e-6`).
    pub degenerate: bool,
}

impl CriticalPoint {
    pub fn point(&self) -> PhasePoint {
        PhasePoint {
            x: self.x.clone(),
            p: self.p.clone(),
        }
    }
}

pub const CRITICAL_TOL: f64 = 1e-12;

/// Roots whose Newton iteration stalls above [`CRITICAL_TOL`] are still
/// accepted below this residual.
pub const CRITICAL_ACCEPT: f64 = 1e-9;

/// Damped Newton on `d_theta Phi = 0` from one seed; `None` if it stalls.
pub fn newton_critical(fam: &dyn GeneratingFamily, x: &[f64], seed: &[f64]) -> Result<Option<Vec<f64>>> {
    let mut th = seed.to_vec();
    let mut g = match fam.grad_theta(&th, x) {
        Ok(g) => g,
        Err(_) => return Ok(None),
    };
    for _ in 0..50 {
        let gn = norm_of(&g);
        if gn <= CRITICAL_TOL {
            return Ok(Some(th));
        }
        let Ok(j) = theta_hessian(fam, &th, x) else {
            return Ok(None);
        };
        let Ok(step) = j.svd(true, true).solve(&DVector::from_column_slice(&g), 1e-14) else {
            return Ok(None);
        };
        let mut lam = 1.0;
        let mut moved = false;
        while lam >= 1.0 / 1024.0 {
            let trial: Vec<f64> = th.iter().zip(step.iter()).map(|(a, d)| a - lam * d).collect();
            if let Ok(gt) = fam.grad_theta(&trial, x) {
                if norm_of(&gt) < gn || norm_of(&gt) <= CRITICAL_TOL {
                    th = trial;
                    g = gt;
                    moved = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((norm_of(&g) <= CRITICAL_ACCEPT).then_some(th))
}

pub fn critical_point_at(fam: &dyn GeneratingFamily, theta: &[f64], x: &[f64]) -> Result<CriticalPoint> {
    let g = fam.grad_theta(theta, x)?;
    let p = fam.grad_x(theta, x)?;
    let n = fam.n_theta();
    let ratio = if n == 0 {
        1.0
    } else {
        let a = theta_hessian(fam, theta, x)?;
        let b = theta_x_block(fam, theta, x)?;
        let mut m = DMatrix::zeros(n, n + fam.dim_x());
        m.columns_mut(0, n).copy_from(&a);
        m.columns_mut(n, fam.dim_x()).copy_from(&b);
        let sv = m.singular_values();
        if sv.max() > 0.0 {
            sv.min() / sv.max()
        } else {
            0.0
        }
    };
    Ok(CriticalPoint {
        theta: theta.to_vec(),
        x: x.to_vec(),
        p,
        residual: norm_of(&g),
        rank_ratio: ratio,
        degenerate: ratio < 1e-6,
    })
}

/// Newton-polished roots of `d_theta Phi(., x) = 0` from the given seeds
/// (or the family's defaults), canonicalised and deduplicated at `1e-6`.
pub fn critical_set_solve(
    fam: &dyn GeneratingFamily,
    x: &[f64],
    seeds: Option<&[Vec<f64>]>,
) -> Result<Vec<CriticalPoint>> {
    if x.len() != fam.dim_x() {
        return Err(Error::InvalidInput(format!(
            "base point has {} coordinates, family expects {}",
            x.len(),
            fam.dim_x()
        )));
    }
    let defaults;
    let seeds = match seeds {
        Some(s) => s,
        None => {
            defaults = fam.default_seeds(x);
            &defaults
        }
    };
    let mut out: Vec<CriticalPoint> = Vec::new();
    for s in seeds {
        let Some(mut th) = newton_critical(fam, x, s)? else {
            continue;
        };
        fam.canonicalize(&mut th);
        if out.iter().any(|c| {
            c.theta
                .iter()
                .zip(&th)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                < 1e-6
        }) {
            continue;
        }
        out.push(critical_point_at(fam, &th, x)?);
    }
    Ok(out)
}

/// `F[Phi, dy]`: the Jacobian determinant of
/// `(x, theta) -> (y(theta, x), d_theta Phi(theta, x))`.
pub fn invariant_density<Y>(fam: &dyn GeneratingFamily, y: Y, theta: &[f64], x: &[f64]) -> Result<f64>
where
    Y: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let (d, n) = (fam.dim_x(), fam.n_theta());
    let mut at = x.to_vec();
    at.extend_from_slice(theta);
    let step = 1e-5 * (1.0 + norm_of(&at));
    let jac = try_jacobian(
        |v: &[f64]| -> Result<Vec<f64>> {
            let (xv, tv) = v.split_at(d);
            let mut row = y(tv, xv)?;
            if row.len() != d {
                return Err(Error::InvalidInput(format!(
                    "density coordinates must have {d} components, got {}",
                    row.len()
                )));
            }
            row.extend(fam.grad_theta(tv, xv)?);
            Ok(row)
        },
        &at,
        step,
    )?;
    debug_assert_eq!(jac.shape(), (d + n, d + n));
    let det = jac.clone().full_piv_lu().determinant();
    let hadamard: f64 = jac.row_iter().map(|r| r.norm()).product();
    if !det.is_finite() || det.abs() <= 1e-8 * hadamard {
        return Err(Error::DensityDegenerate(det));
    }
    Ok(det)
}

/// Largest symplectic product between difference tangents of the immersion
/// `x -> (x, d_x Phi(theta(x), x))` near a critical point, where `theta(x)`
/// is re-solved by Newton.
pub fn immersion_residual(fam: &dyn GeneratingFamily, cp: &CriticalPoint, step: f64) -> Result<f64> {
    let d = fam.dim_x();
    let mut tangents = Vec::with_capacity(d);
    for j in 0..d {
        let mut pts = Vec::with_capacity(2);
        for s in [step, -step] {
            let mut x = cp.x.clone();
            x[j] += s;
            let th = newton_critical(fam, &x, &cp.theta)?
                .ok_or_else(|| Error::DegenerateFamily(format!("critical point lost near x = {x:?}")))?;
            pts.push(PhasePoint {
                p: fam.grad_x(&th, &x)?,
                x,
            });
        }
        tangents.push(pts[0].sub(&pts[1]).scale(0.5 / step));
    }
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i + 1..d {
            worst = worst.max(symplectic_product(&tangents[i], &tangents[j]).abs());
        }
    }
    Ok(worst)
}
