use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::symplectic::phase::{symplectic_product, PhasePoint};

/// A parametrised (immersed) Lagrangian chart.
///
/// Space-time charts embed into `T*R^{n+1}` with the trailing `(t, -E)` slot
/// convention of [`PhasePoint`].
pub trait ManifoldChart: Send + Sync + fmt::Debug {
    fn param_names(&self) -> Vec<String>;

    fn domain(&self) -> Vec<(f64, f64)>;

    fn embed(&self, u: &[f64]) -> Result<PhasePoint>;

    /// Primitive of the canonical 1-form on the chart, when known.
    fn eikonal(&self, _u: &[f64]) -> Result<Option<f64>> {
        Ok(None)
    }

    fn is_space_time(&self) -> bool {
        false
    }

    /// Tangent vectors `d embed / d u_j`; central differences by default.
    fn tangents(&self, u: &[f64]) -> Result<Vec<PhasePoint>> {
        fd_tangents(self, u, 1e-5)
    }

    fn dim(&self) -> usize {
        self.param_names().len()
    }
}

pub type SharedChart = Arc<dyn ManifoldChart>;

pub(crate) fn fd_tangents<C: ManifoldChart + ?Sized>(chart: &C, u: &[f64], step: f64) -> Result<Vec<PhasePoint>> {
    let mut work = u.to_vec();
    (0..u.len())
        .map(|j| {
            let orig = work[j];
            let h = step * (1.0 + orig.abs());
            work[j] = orig + h;
            let a = chart.embed(&work)?;
            work[j] = orig - h;
            let b = chart.embed(&work)?;
            work[j] = orig;
            Ok(a.sub(&b).scale(1.0 / (2.0 * h)))
        })
        .collect()
}

/// Deterministic sample of parameter points in the chart's domain box.
pub fn sample_params(chart: &dyn ManifoldChart, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = chart.domain();
    (0..samples)
        .map(|_| {
            dom.iter()
                .map(|&(a, b)| if a == b { a } else { rng.gen_range(a..b) })
                .collect()
        })
        .collect()
}

/// Largest `|omega(d_u embed, d_v embed)|` over sampled parameter pairs.
///
/// For space-time charts the product is `dp ^ dx - dE ^ dt`.
pub fn lagrangian_residual(chart: &dyn ManifoldChart, samples: usize) -> Result<f64> {
    lagrangian_residual_seeded(chart, samples, 0x5eed)
}

pub fn lagrangian_residual_seeded(chart: &dyn ManifoldChart, samples: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for u in sample_params(chart, samples, seed) {
        let t = fd_tangents(chart, &u, 1e-5).map_err(|e| e.at_params(&u))?;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                worst = worst.max(symplectic_product(&t[i], &t[j]).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest `|dS(d_u) - <P, d_u X>|` over samples, for charts with an eikonal.
pub fn eikonal_residual(chart: &dyn ManifoldChart, samples: usize) -> Result<Option<f64>> {
    let dom = chart.domain();
    let mid: Vec<f64> = dom.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    if chart.eikonal(&mid)?.is_none() {
        return Ok(None);
    }
    let mut worst = 0.0f64;
    for u in sample_params(chart, samples, 0xe1c0) {
        let z = chart.embed(&u)?;
        let t = chart.tangents(&u)?;
        let mut w = u.clone();
        for (j, tj) in t.iter().enumerate() {
            let h = 1e-5 * (1.0 + u[j].abs());
            w[j] = u[j] + h;
            let sp = chart.eikonal(&w)?.unwrap_or(f64::NAN);
            w[j] = u[j] - h;
            let sm = chart.eikonal(&w)?.unwrap_or(f64::NAN);
            w[j] = u[j];
            let ds = (sp - sm) / (2.0 * h);
            let pdx: f64 = z.p.iter().zip(&tj.x).map(|(p, dx)| p * dx).sum();
            worst = worst.max((ds - pdx).abs());
        }
    }
    Ok(Some(worst))
}

/// CSV dump over a tensor grid with `counts[j]` nodes per parameter.
///
/// Header: `param1,...,paramk,X1..Xn,P1..Pn`, followed by `t,E` for
/// space-time charts and `S` when an eikonal is available.
pub fn dump_csv(chart: &dyn ManifoldChart, counts: &[usize]) -> Result<String> {
    let names = chart.param_names();
    let dom = chart.domain();
    let axes: Vec<Vec<f64>> = dom
        .iter()
        .zip(counts)
        .map(|(&(a, b), &c)| {
            if c <= 1 {
                vec![0.5 * (a + b)]
            } else {
                (0..c).map(|k| a + (b - a) * k as f64 / (c - 1) as f64).collect()
            }
        })
        .collect();
    let mut rows = Vec::new();
    let mut idx = vec![0usize; axes.len()];
    let total: usize = axes.iter().map(Vec::len).product();
    let mut header_done = false;
    let mut out = String::new();
    for _ in 0..total {
        let u: Vec<f64> = idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
        let z = chart.embed(&u).map_err(|e| e.at_params(&u))?;
        let s = chart.eikonal(&u)?;
        let st = chart.is_space_time();
        let n = if st { z.dim() - 1 } else { z.dim() };
        if !header_done {
            let mut h: Vec<String> = names.clone();
            h.extend((1..=n).map(|i| format!("X{i}")));
            h.extend((1..=n).map(|i| format!("P{i}")));
            if st {
                h.push("t".into());
                h.push("E".into());
            }
            if s.is_some() {
                h.push("S".into());
            }
            out.push_str(&h.join(","));
            out.push('\n');
            header_done = true;
        }
        let mut row: Vec<f64> = u.clone();
        row.extend(&z.x[..n]);
        row.extend(&z.p[..n]);
        if st {
            row.push(z.x[n]);
            row.push(-z.p[n]);
        }
        if let Some(s) = s {
            row.push(s);
        }
        rows.push(row);
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    for r in rows {
        out.push_str(&r.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}
