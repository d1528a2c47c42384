//! The cutoff integral of the model pair and the time integral
//! `(i/h) int B exp(i (S + E t) / h) Theta_{t0}(t) dt`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::roots::all_roots;
use crate::semiclassical::quadrature::{cutoff, integrate, oscillatory, QuadOptions};
use crate::semiclassical::wkb::WkbChart;

/// `f_h(x', x_n - t)`: the translated source solving the model problem.
pub fn pair_solution<F>(f_h: F, x: &[f64], t: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut y = x.to_vec();
    if let Some(last) = y.last_mut() {
        *last -= t;
    }
    f_h(&y)
}

/// `(i/h) int_0^inf Theta_{t0}(t) f1(x'/h, (x_n - t)/h) dt`, valid for
/// `x_n <= t0 / 2`.
pub fn model_pair_integral<F>(f1: F, x: &[f64], h: f64, t0: f64) -> Result<Complex64>
where
    F: Fn(&[f64]) -> f64,
{
    if x.is_empty() {
        return Err(Error::InvalidInput("empty base point".into()));
    }
    if !(h > 0.0 && t0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need h > 0 and t0 > 0, got h = {h}, t0 = {t0}"
        )));
    }
    let xn = x[x.len() - 1];
    if xn > 0.5 * t0 {
        return Err(Error::ValidityDomain(format!("x_n = {xn} exceeds t0/2 = {}", 0.5 * t0)));
    }
    let xi: Vec<f64> = x.iter().map(|v| v / h).collect();
    let n = xi.len();
    let integrand = |t: f64| {
        let mut y = xi.clone();
        y[n - 1] = (xn - t) / h;
        Complex64::new(cutoff(t, t0) * f1(&y), 0.0)
    };
    let mut breaks = vec![t0];
    for k in [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        breaks.push(xn + k * h);
        breaks.push(xn - k * h);
    }
    breaks.sort_by(f64::total_cmp);
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        ..Default::default()
    };
    let r = integrate(integrand, 0.0, 2.0 * t0, &breaks, opts)?;
    Ok(Complex64::new(0.0, 1.0 / h) * r.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryPoint {
    pub t: f64,
    pub second_derivative: f64,
    /// Leading stationary-phase term, including the `i/h` prefactor.
    pub contribution: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeIntegral {
    pub value: (f64, f64),
    pub error: f64,
    pub stationary: Vec<StationaryPoint>,
    pub stationary_sum: (f64, f64),
    pub warnings: Vec<String>,
}

impl TimeIntegral {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value.0, self.value.1)
    }

    pub fn stationary_sum(&self) -> Complex64 {
        Complex64::new(self.stationary_sum.0, self.stationary_sum.1)
    }
}

/// `u_h(x, E) = (i/h) int_0^inf B(x,t) exp(i (S(x,t) + E t) / h) Theta_{t0}(t) dt`
/// with the leading stationary-phase terms of its interior critical points.
pub fn time_integral(chart: &WkbChart, x: &[f64], energy: f64, h: f64, t0: f64) -> Result<TimeIntegral> {
    time_integral_with(chart, x, energy, h, t0, QuadOptions::default())
}

/// [`time_integral`] with explicit quadrature tolerances.
pub fn time_integral_with(
    chart: &WkbChart,
    x: &[f64],
    energy: f64,
    h: f64,
    t0: f64,
    opts: QuadOptions,
) -> Result<TimeIntegral> {
    if !(h > 0.0 && t0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need h > 0 and t0 > 0, got h = {h}, t0 = {t0}"
        )));
    }
    let (s_lo, s_hi) = chart.t_support();
    let lo = s_lo.max(0.0);
    let hi = s_hi.min(2.0 * t0);
    let zero = Complex64::new(0.0, 0.0);
    if !(lo < hi) {
        return Ok(TimeIntegral {
            value: (0.0, 0.0),
            error: 0.0,
            stationary: vec![],
            stationary_sum: (0.0, 0.0),
            warnings: vec![],
        });
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let record = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let amp = |t: f64| record(chart.amplitude(x, t)) * cutoff(t, t0);
    let psi = |t: f64| record(chart.phase(x, t)) + energy * t;
    let r = oscillatory(amp, psi, h, lo, hi, &[t0], opts)?;
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let pre = Complex64::new(0.0, 1.0 / h);

    let d = 1e-5 * (1.0 + hi.abs());
    let dpsi = |t: f64| (psi(t + d) - psi(t - d)) / (2.0 * d);
    let mut stationary = Vec::new();
    let mut sum = zero;
    let mut warnings = Vec::new();
    let edge = h.sqrt();
    for t in all_roots(dpsi, lo + d, hi - d, 40, 1e-13) {
        let b = amp(t);
        if b.abs() < 1e-14 {
            continue;
        }
        let e2 = 1e-4 * (1.0 + t.abs());
        let d2 = (psi(t + e2) - 2.0 * psi(t) + psi(t - e2)) / (e2 * e2);
        if d2.abs() < 1e-8 {
            warnings.push(format!("degenerate stationary point at t = {t}"));
            continue;
        }
        for (name, at) in [("lower limit", lo), ("upper limit", hi), ("cutoff start", t0)] {
            if (t - at).abs() < edge {
                warnings.push(format!(
                    "stationary point t = {t:.6} within h^(1/2) of the {name} {at}; boundary contamination"
                ));
            }
        }
        let c = pre
            * Complex64::from_polar(
                b * (2.0 * PI * h / d2.abs()).sqrt(),
                psi(t) / h + d2.signum() * PI / 4.0,
            );
        sum += c;
        stationary.push(StationaryPoint {
            t,
            second_derivative: d2,
            contribution: (c.re, c.im),
        });
    }
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let v = pre * r.value;
    Ok(TimeIntegral {
        value: (v.re, v.im),
        error: r.error / h,
        stationary,
        stationary_sum: (sum.re, sum.im),
        warnings,
    })
}
