//! Sub-charts obtained by freezing one parameter, either at a fixed value or
//! by solving `H(embed(u)) = E` for it.

use crate::error::{Error, Result};
use crate::manifolds::chart::{ManifoldChart, SharedChart};
use crate::numeric::roots::brent;
use crate::symplectic::hamiltonian::SharedHamiltonian;
use crate::symplectic::phase::{dot, PhasePoint};

fn insert(u: &[f64], index: usize, v: f64) -> Vec<f64> {
    let mut full = Vec::with_capacity(u.len() + 1);
    full.extend_from_slice(&u[..index]);
    full.push(v);
    full.extend_from_slice(&u[index..]);
    full
}

fn remove<T: Clone>(v: &[T], index: usize) -> Vec<T> {
    v.iter()
        .enumerate()
        .filter(|(i, _)| *i != index)
        .map(|(_, x)| x.clone())
        .collect()
}

/// `u_index = value`.
#[derive(Debug, Clone)]
pub struct FixedSlice {
    base: SharedChart,
    index: usize,
    value: f64,
}

impl FixedSlice {
    pub fn new(base: SharedChart, index: usize, value: f64) -> Result<Self> {
        if index >= base.dim() {
            return Err(Error::InvalidInput(format!(
                "slice index {index} out of range for a {}-parameter chart",
                base.dim()
            )));
        }
        Ok(FixedSlice { base, index, value })
    }
}

impl ManifoldChart for FixedSlice {
    fn param_names(&self) -> Vec<String> {
        remove(&self.base.param_names(), self.index)
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        remove(&self.base.domain(), self.index)
    }

    fn embed(&self, u: &[f64]) -> Result<PhasePoint> {
        self.base.embed(&insert(u, self.index, self.value))
    }

    fn eikonal(&self, u: &[f64]) -> Result<Option<f64>> {
        self.base.eikonal(&insert(u, self.index, self.value))
    }

    fn is_space_time(&self) -> bool {
        self.base.is_space_time()
    }

    fn tangents(&self, u: &[f64]) -> Result<Vec<PhasePoint>> {
        let t = self.base.tangents(&insert(u, self.index, self.value))?;
        Ok(remove(&t, self.index))
    }
}

/// `Lambda_0 cap {H = E}`, with parameter `index` solved for on `interval`.
///
/// When the equation has several roots the one nearest `seed` is taken.
#[derive(Debug, Clone)]
pub struct EnergySlice {
    base: SharedChart,
    h: SharedHamiltonian,
    energy: f64,
    index: usize,
    interval: (f64, f64),
    seed: f64,
    grid: usize,
}

/// Result of solving for the frozen parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceRoot {
    pub value: f64,
    /// `d/du_index H(embed(u))` at the root.
    pub slope: f64,
}

impl EnergySlice {
    pub fn new(
        base: SharedChart,
        h: SharedHamiltonian,
        energy: f64,
        index: usize,
        interval: (f64, f64),
    ) -> Result<Self> {
        if index >= base.dim() {
            return Err(Error::InvalidInput(format!(
                "solve index {index} out of range for a {}-parameter chart",
                base.dim()
            )));
        }
        if !(interval.0 < interval.1) {
            return Err(Error::InvalidInput(format!("empty solve interval {interval:?}")));
        }
        Ok(EnergySlice {
            base,
            h,
            energy,
            index,
            interval,
            seed: 0.5 * (interval.0 + interval.1),
            grid: 64,
        })
    }

    pub fn with_seed(mut self, seed: f64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid.max(4);
        self
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn hamiltonian(&self) -> &SharedHamiltonian {
        &self.h
    }

    fn residual(&self, u: &[f64], s: f64) -> f64 {
        match self.base.embed(&insert(u, self.index, s)) {
            Ok(z) if self.h.check_domain(&z.x, &z.p).is_ok() => self.h.value(&z.x, &z.p) - self.energy,
            _ => f64::NAN,
        }
    }

    /// Gradient of `H(embed(.))` in all base parameters at the full point.
    fn energy_gradient(&self, full: &[f64]) -> Result<(Vec<f64>, f64)> {
        let z = self.base.embed(full)?;
        let (gx, gp) = self.h.gradient(&z.x, &z.p);
        let scale = 1.0 + (dot(&gx, &gx) + dot(&gp, &gp)).sqrt();
        let grad = self
            .base
            .tangents(full)?
            .iter()
            .map(|t| dot(&gx, &t.x) + dot(&gp, &t.p))
            .collect();
        Ok((grad, scale))
    }

    fn newton_polish(&self, u: &[f64], mut s: f64) -> Result<f64> {
        for _ in 0..8 {
            let full = insert(u, self.index, s);
            let (g, _) = self.energy_gradient(&full)?;
            let r = self.residual(u, s);
            let d = g[self.index];
            if !r.is_finite() || d == 0.0 {
                break;
            }
            let next = s - r / d;
            if !(self.interval.0..=self.interval.1).contains(&next) {
                break;
            }
            let done = (next - s).abs() <= 1e-15 * (1.0 + s.abs());
            s = next;
            if done {
                break;
            }
        }
        Ok(s)
    }

    fn golden_min(&self, u: &[f64], mut a: f64, mut b: f64) -> f64 {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |s: f64| self.residual(u, s).abs();
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        0.5 * (a + b)
    }

    /// Solves for the frozen parameter at the reduced parameters `u`.
    pub fn solve(&self, u: &[f64]) -> Result<SliceRoot> {
        let (lo, hi) = self.interval;
        let n = self.grid;
        let nodes: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let vals: Vec<f64> = nodes.iter().map(|&s| self.residual(u, s)).collect();
        let tol_e = 1e-9 * (1.0 + self.energy.abs());
        let mut roots = Vec::new();
        for k in 0..n {
            let (a, b) = (vals[k], vals[k + 1]);
            if a == 0.0 {
                roots.push(nodes[k]);
            } else if a.is_finite() && b.is_finite() && a * b < 0.0 {
                if let Some(r) = brent(|s| self.residual(u, s), nodes[k], nodes[k + 1], 1e-15, 200) {
                    roots.push(r);
                }
            }
        }
        if vals[n] == 0.0 {
            roots.push(nodes[n]);
        }
        // Tangential contacts do not change sign.
        for k in 1..n {
            let (a, b, c) = (vals[k - 1].abs(), vals[k].abs(), vals[k + 1].abs());
            if b <= a && b <= c && b > 0.0 && (vals[k - 1] * vals[k + 1] > 0.0) {
                let s = self.golden_min(u, nodes[k - 1], nodes[k + 1]);
                if self.residual(u, s).abs() <= tol_e {
                    roots.push(s);
                }
            }
        }
        let Some(&best) = roots
            .iter()
            .min_by(|a, b| (*a - self.seed).abs().total_cmp(&(*b - self.seed).abs()))
        else {
            return Err(Error::NoIntersection(format!(
                "H = {} not attained for parameter {} in {:?} at {:?}",
                self.energy, self.index, self.interval, u
            )));
        };
        let s = self.newton_polish(u, best)?;
        let full = insert(u, self.index, s);
        if self.residual(u, s).abs() > 1e-8 * (1.0 + self.energy.abs()) {
            return Err(Error::NoIntersection(format!(
                "energy equation did not converge at {full:?}"
            )));
        }
        let (grad, scale) = self.energy_gradient(&full)?;
        let thr = 1e-6 * scale;
        let slope = grad[self.index];
        if slope.abs() <= thr {
            if grad.iter().all(|g| g.abs() <= thr) {
                return Err(Error::GlancingDetected { params: full });
            }
            return Err(Error::ChartBreakdown {
                params: full,
                reason: format!("energy surface tangent to the solved parameter direction (slope {slope:e})"),
            });
        }
        Ok(SliceRoot { value: s, slope })
    }

    pub fn full_params(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(insert(u, self.index, self.solve(u)?.value))
    }
}

impl ManifoldChart for EnergySlice {
    fn param_names(&self) -> Vec<String> {
        remove(&self.base.param_names(), self.index)
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        remove(&self.base.domain(), self.index)
    }

    fn embed(&self, u: &[f64]) -> Result<PhasePoint> {
        self.base.embed(&self.full_params(u)?)
    }

    fn eikonal(&self, u: &[f64]) -> Result<Option<f64>> {
        self.base.eikonal(&self.full_params(u)?)
    }
}
