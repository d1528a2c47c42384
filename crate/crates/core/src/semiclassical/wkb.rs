//! Caustic-free WKB charts `B(x, t) exp(i S(x, t) / h)` and amplitude transport
//! along a flow-out.

use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifolds::chart::ManifoldChart;
use crate::manifolds::flowout::Trajectories;

pub type FieldFn = Arc<dyn Fn(&[f64], f64) -> Result<f64> + Send + Sync>;
pub type InitialAmplitude = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Phase `S` and amplitude `B` of a caustic-free chart on `x_box x t_support`.
/// Outside the support the amplitude is zero.
#[derive(Clone)]
pub struct WkbChart {
    phase: FieldFn,
    amplitude: FieldFn,
    x_box: Vec<(f64, f64)>,
    t_support: (f64, f64),
}

impl fmt::Debug for WkbChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WkbChart")
            .field("x_box", &self.x_box)
            .field("t_support", &self.t_support)
            .finish_non_exhaustive()
    }
}

impl WkbChart {
    pub fn new(phase: FieldFn, amplitude: FieldFn, x_box: Vec<(f64, f64)>, t_support: (f64, f64)) -> Result<Self> {
        if !(t_support.0 <= t_support.1) || x_box.iter().any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidInput("empty chart support".into()));
        }
        Ok(WkbChart {
            phase,
            amplitude,
            x_box,
            t_support,
        })
    }

    /// Chart from plain closures.
    pub fn from_fns<S, B>(phase: S, amplitude: B, x_box: Vec<(f64, f64)>, t_support: (f64, f64)) -> Result<Self>
    where
        S: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        B: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        WkbChart::new(
            Arc::new(move |x, t| Ok(phase(x, t))),
            Arc::new(move |x, t| Ok(amplitude(x, t))),
            x_box,
            t_support,
        )
    }

    /// Extends phase and amplitude by zero where `(x, t)` has no preimage.
    /// Only meaningful when the amplitude vanishes at the edge of the image.
    pub fn extended_by_zero(self) -> WkbChart {
        let wrap = |f: FieldFn| -> FieldFn {
            Arc::new(move |x, t| match f(x, t) {
                Err(Error::ValidityDomain(_)) => Ok(0.0),
                r => r,
            })
        };
        WkbChart {
            phase: wrap(self.phase),
            amplitude: wrap(self.amplitude),
            x_box: self.x_box,
            t_support: self.t_support,
        }
    }

    pub fn x_box(&self) -> &[(f64, f64)] {
        &self.x_box
    }

    pub fn t_support(&self) -> (f64, f64) {
        self.t_support
    }

    pub fn contains(&self, x: &[f64], t: f64) -> bool {
        t >= self.t_support.0
            && t <= self.t_support.1
            && x.len() == self.x_box.len()
            && x.iter().zip(&self.x_box).all(|(v, (a, b))| v >= a && v <= b)
    }

    pub fn phase(&self, x: &[f64], t: f64) -> Result<f64> {
        (self.phase)(x, t)
    }

    pub fn amplitude(&self, x: &[f64], t: f64) -> Result<f64> {
        if !self.contains(x, t) {
            return Ok(0.0);
        }
        (self.amplitude)(x, t)
    }

    /// `B(x, t) exp(i S(x, t) / h)`.
    pub fn evaluate(&self, x: &[f64], t: f64, h: f64) -> Result<Complex64> {
        let b = self.amplitude(x, t)?;
        if b == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(Complex64::from_polar(b, self.phase(x, t)? / h))
    }
}

/// Initial amplitude `a` on `Lambda_0` and its transport `b` along the flow.
#[derive(Clone)]
pub struct Amplitude {
    a: InitialAmplitude,
    base_dim: usize,
}

impl fmt::Debug for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Amplitude")
            .field("base_dim", &self.base_dim)
            .finish_non_exhaustive()
    }
}

impl Amplitude {
    pub fn initial(&self, base: &[f64]) -> f64 {
        (self.a)(base)
    }

    /// `b(u, t)`; the parameters `(u, t)` carry the invariant measure, so
    /// `b` is constant along trajectories.
    pub fn transported(&self, params: &[f64]) -> f64 {
        (self.a)(&params[..self.base_dim])
    }
}

/// `det dX / du` at fixed `t` from the propagated base tangents.
pub fn projection_jacobian(traj: &Trajectories, params: &[f64]) -> Result<f64> {
    let (_, st, _) = traj.state(params, true)?;
    let n = st.z.dim();
    if st.tangents.len() != n {
        return Err(Error::Unsupported(format!(
            "x-projection needs {n} base parameters, the chart has {}",
            st.tangents.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| st.tangents[j].x[i]).determinant())
}

/// Transports `a` along `traj` after checking that the x-projection stays
/// regular on a `grid`-per-axis sample of the chart.
pub fn transport_amplitude(a: InitialAmplitude, traj: &Trajectories, grid: usize) -> Result<Amplitude> {
    let dom = traj.domain();
    let base_dim = dom.len() - 1;
    let grid = grid.max(2);
    let mut idx = vec![0usize; dom.len()];
    let mut sign = 0.0;
    loop {
        let u: Vec<f64> = idx
            .iter()
            .zip(&dom)
            .map(|(&k, &(lo, hi))| lo + (hi - lo) * k as f64 / (grid - 1) as f64)
            .collect();
        let j = projection_jacobian(traj, &u)?;
        if j.abs() < 1e-10 || (sign != 0.0 && j.signum() != sign) {
            return Err(Error::Caustic(format!(
                "x-projection degenerates near {u:?} (det {j:e})"
            )));
        }
        sign = j.signum();
        let mut d = 0;
        loop {
            if d == idx.len() {
                return Ok(Amplitude { a, base_dim });
            }
            idx[d] += 1;
            if idx[d] < grid {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// WKB chart of a flow-out: `S` is the space-time eikonal and
/// `B = b |det dX/du|^{-1/2}`, both pulled back to `(x, t)` by Newton.
pub fn wkb_from_flow_out(traj: Trajectories, amp: Amplitude, x_box: Vec<(f64, f64)>) -> Result<WkbChart> {
    if traj.base().eikonal(&mid(&traj.base().domain()))?.is_none() {
        return Err(Error::Unsupported("base chart has no eikonal".into()));
    }
    let dom = traj.domain();
    let t_support = dom[dom.len() - 1];
    let inv = Arc::new(Inverse {
        traj,
        last: Mutex::new(None),
        hit: Mutex::new(None),
    });
    let i2 = inv.clone();
    let phase: FieldFn = Arc::new(move |x, t| {
        let u = inv.locate(x, t)?;
        let (ub, _) = u.split_at(u.len() - 1);
        let s0 = inv.traj.base().eikonal(ub)?.unwrap_or(0.0);
        let (_, st, e) = inv.traj.state(&u, false)?;
        Ok(s0 + st.action - e * t)
    });
    let amplitude: FieldFn = Arc::new(move |x, t| {
        let u = i2.locate(x, t)?;
        let j = projection_jacobian(&i2.traj, &u)?;
        Ok(amp.transported(&u) / j.abs().sqrt())
    });
    WkbChart::new(phase, amplitude, x_box, t_support)
}

fn mid(dom: &[(f64, f64)]) -> Vec<f64> {
    dom.iter().map(|(a, b)| 0.5 * (a + b)).collect()
}

struct Inverse {
    traj: Trajectories,
    last: Mutex<Option<Vec<f64>>>,
    hit: Mutex<Option<(Vec<f64>, f64, Option<Vec<f64>>)>>,
}

impl Inverse {
    fn newton(&self, x: &[f64], t: f64, seed: &[f64], dom: &[(f64, f64)]) -> Option<Vec<f64>> {
        let mut u = seed.to_vec();
        u.push(t);
        let n = x.len();
        let scale = 1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut rn = f64::INFINITY;
        let mut stalls = 0;
        for _ in 0..30 {
            let (_, st, _) = self.traj.state(&u, true).ok()?;
            let r: Vec<f64> = st.z.x.iter().zip(x).map(|(a, b)| a - b).collect();
            let next = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if next < 1e-14 * scale || (next < 1e-10 * scale && next >= 0.5 * rn) {
                return Some(u);
            }
            if next > 0.5 * rn {
                stalls += 1;
                if stalls > 1 {
                    return None;
                }
            }
            rn = next;
            let j = DMatrix::from_fn(n, n, |i, k| st.tangents[k].x[i]);
            let d = j.lu().solve(&DVector::from_column_slice(&r))?;
            let mut moved = false;
            for k in 0..n {
                let (a, b) = dom[k];
                let v = (u[k] - d[k]).clamp(a, b);
                moved |= v != u[k];
                u[k] = v;
            }
            if !moved {
                return None;
            }
        }
        (rn < 1e-10 * scale).then_some(u)
    }

    fn locate(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        if let Ok(g) = self.hit.lock() {
            if let Some((hx, ht, u)) = g.as_ref() {
                if hx.as_slice() == x && *ht == t {
                    return u.clone().ok_or_else(|| uncovered(x, t));
                }
            }
        }
        let u = self.search(x, t);
        if let Ok(mut g) = self.hit.lock() {
            *g = Some((x.to_vec(), t, u.clone()));
        }
        u.ok_or_else(|| uncovered(x, t))
    }

    fn search(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        let dom = self.traj.base().domain();
        let inside = |u: &[f64]| u.iter().zip(&dom).all(|(v, (a, b))| *v >= a - 1e-9 && *v <= b + 1e-9);
        let last = self.last.lock().map(|g| g.clone()).unwrap_or(None);
        let mut seeds: Vec<Vec<f64>> = last.into_iter().collect();
        let g = 3;
        let mut idx = vec![0usize; dom.len()];
        'grid: loop {
            seeds.push(
                idx.iter()
                    .zip(&dom)
                    .map(|(&k, &(lo, hi))| lo + (hi - lo) * (k as f64 + 0.5) / g as f64)
                    .collect(),
            );
            let mut d = 0;
            loop {
                if d == idx.len() {
                    break 'grid;
                }
                idx[d] += 1;
                if idx[d] < g {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
        for s in seeds {
            if let Some(u) = self.newton(x, t, &s, &dom) {
                if inside(&u[..dom.len()]) {
                    if let Ok(mut g) = self.last.lock() {
                        *g = Some(u[..dom.len()].to_vec());
                    }
                    return Some(u);
                }
            }
        }
        None
    }
}

fn uncovered(x: &[f64], t: f64) -> Error {
    Error::ValidityDomain(format!("no chart point projects to (x, t) = ({x:?}, {t})"))
}

/// Coefficients of `e^{-iS/h} (i h d_t - H_h)(B e^{iS/h}) = c0 + i h c1 + h^2 c2`
/// for `H = |p|^2 / rho` with the symmetric quantization
/// `H_h = -(h^2/2)(rho^{-1} Delta + Delta rho^{-1})`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WkbResidual {
    /// Hamilton-Jacobi part `-B (d_t S + H(x, grad S))`.
    pub c0: f64,
    /// Transport part.
    pub c1: f64,
    pub c2: f64,
}

impl WkbResidual {
    pub fn at(&self, h: f64) -> Complex64 {
        Complex64::new(self.c0 + h * h * self.c2, h * self.c1)
    }
}

/// Finite-difference evaluation of [`WkbResidual`] with step `delta`.
pub fn wkb_residual<R>(chart: &WkbChart, rho: R, x: &[f64], t: f64, delta: f64) -> Result<WkbResidual>
where
    R: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let s = |y: &[f64], tt: f64| chart.phase(y, tt);
    let b = |y: &[f64], tt: f64| chart.amplitude(y, tt);
    let w = |y: &[f64], tt: f64| Ok(chart.amplitude(y, tt)? / rho(y));
    let jet = |f: &dyn Fn(&[f64], f64) -> Result<f64>| -> Result<(f64, Vec<f64>, f64, f64)> {
        let c = f(x, t)?;
        let mut grad = vec![0.0; n];
        let mut lap = 0.0;
        let mut y = x.to_vec();
        for i in 0..n {
            y[i] = x[i] + delta;
            let p = f(&y, t)?;
            y[i] = x[i] - delta;
            let m = f(&y, t)?;
            y[i] = x[i];
            grad[i] = (p - m) / (2.0 * delta);
            lap += (p - 2.0 * c + m) / (delta * delta);
        }
        let dt = (f(x, t + delta)? - f(x, t - delta)?) / (2.0 * delta);
        Ok((c, grad, lap, dt))
    };
    let (_, gs, ls, ts) = jet(&s)?;
    let (bv, gb, lb, tb) = jet(&b)?;
    let (wv, gw, lw, _) = jet(&w)?;
    let r = rho(x);
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(u, v)| u * v).sum::<f64>();
    let p2 = dot(&gs, &gs);
    Ok(WkbResidual {
        c0: -bv * (ts + p2 / r),
        c1: tb + 0.5 / r * (2.0 * dot(&gs, &gb) + bv * ls) + 0.5 * (2.0 * dot(&gs, &gw) + wv * ls),
        c2: 0.5 * (lb / r + lw),
    })
}
