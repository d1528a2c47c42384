//! The Bessel beam source, the exact radial Helmholtz solution and the
//! five-point residual check.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::semiclassical::special::{bessel_j0, bessel_j1};

fn radius(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("h must be positive, got {h}")))
    }
}

/// `f_h(x) = (2 pi / h)^{1/2} J_0(|x| / h)`.
pub fn bessel_source(x: &[f64], h: f64) -> Result<f64> {
    check_h(h)?;
    Ok((2.0 * PI / h).sqrt() * bessel_j0(radius(x) / h))
}

/// `J_0(|x - offset| / h)`, the source centred away from the origin.
pub fn shifted_bessel_source(x: &[f64], offset: &[f64], h: f64) -> Result<f64> {
    check_h(h)?;
    if x.len() != offset.len() {
        return Err(Error::InvalidInput("offset dimension mismatch".into()));
    }
    let d: Vec<f64> = x.iter().zip(offset).map(|(a, b)| a - b).collect();
    Ok(bessel_j0(radius(&d) / h))
}

/// `u_h(x, 1) = -J_1(|x| / h) |x| / (2h)`.
pub fn exact_u1(x: &[f64], h: f64) -> Result<f64> {
    check_h(h)?;
    let r = radius(x);
    Ok(-bessel_j1(r / h) * r / (2.0 * h))
}

/// `(-h^2 Delta_delta - 1) u_h(x, 1) - J_0(|x| / h)` with the five-point
/// Laplacian of step `delta` in the plane.
pub fn helmholtz_residual(x: [f64; 2], h: f64, delta: f64) -> Result<f64> {
    check_h(h)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("grid step must be positive, got {delta}")));
    }
    let u = |a: f64, b: f64| exact_u1(&[a, b], h);
    let c = u(x[0], x[1])?;
    let lap = (u(x[0] + delta, x[1])? + u(x[0] - delta, x[1])? + u(x[0], x[1] + delta)? + u(x[0], x[1] - delta)?
        - 4.0 * c)
        / (delta * delta);
    Ok(-h * h * lap - c - bessel_j0(radius(&x) / h))
}

#[derive(Debug, Clone, Serialize)]
pub struct RichardsonReport {
    pub h: f64,
    pub deltas: (f64, f64),
    /// RMS residual over the sample points at each step.
    pub rms: (f64, f64),
    /// `rms.0 / rms.1`, close to 4 for a second-order residual.
    pub ratio: f64,
    /// Largest residual after Richardson extrapolation `(4 r_2 - r_1) / 3`.
    pub extrapolated_max: f64,
    /// The source prefactor relative to the operator image `J_0(|x|/h)`.
    pub source_constant: f64,
}

/// Richardson study of [`helmholtz_residual`] at `delta` and `delta / 2`.
pub fn helmholtz_richardson(points: &[[f64; 2]], h: f64, delta: f64) -> Result<RichardsonReport> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no sample points".into()));
    }
    let (mut s1, mut s2, mut ext) = (0.0, 0.0, 0.0f64);
    for &p in points {
        let r1 = helmholtz_residual(p, h, delta)?;
        let r2 = helmholtz_residual(p, h, 0.5 * delta)?;
        s1 += r1 * r1;
        s2 += r2 * r2;
        ext = ext.max(((4.0 * r2 - r1) / 3.0).abs());
    }
    let n = points.len() as f64;
    let rms = ((s1 / n).sqrt(), (s2 / n).sqrt());
    Ok(RichardsonReport {
        h,
        deltas: (delta, 0.5 * delta),
        rms,
        ratio: rms.0 / rms.1,
        extrapolated_max: ext,
        source_constant: source_constant(h)?,
    })
}

/// Measured ratio `f_h(0) / J_0(0)` between the source as written and the
/// right-hand side the exact solution actually produces.
pub fn source_constant(h: f64) -> Result<f64> {
    Ok(bessel_source(&[0.0, 0.0], h)? / bessel_j0(0.0))
}

/// `n` points on a ray-spread pattern with radii in `[r_lo, r_hi]`.
pub fn radial_samples(n: usize, r_lo: f64, r_hi: f64) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let s = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
            let r = r_lo + (r_hi - r_lo) * s;
            let a = 2.399963229728653 * k as f64;
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_at_the_origin() {
        let v = bessel_source(&[0.0, 0.0], 0.1).unwrap();
        assert!((v - (20.0 * PI).sqrt()).abs() < 1e-14);
        assert!(bessel_source(&[0.0], 0.0).is_err());
    }

    #[test]
    fn exact_solution_vanishes_at_the_origin() {
        assert_eq!(exact_u1(&[0.0, 0.0], 0.1).unwrap(), 0.0);
    }

    #[test]
    fn shifted_source_is_a_translate() {
        let a = shifted_bessel_source(&[1.3, 0.2], &[1.0, 0.0], 0.2).unwrap();
        let b = shifted_bessel_source(&[0.3, 0.2], &[0.0, 0.0], 0.2).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}
