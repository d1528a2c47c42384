//! Transition of `loc Lambda_+^E` through a glancing extremum of `H|Lambda_0`:
//! regime classification, the section curve and its cusps.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifolds::chart::SharedChart;
use crate::numeric::diff::jacobian;
use crate::numeric::roots::brent;
use crate::symplectic::flow::{flow_state, flow_to_event, hamilton_vector_field};
use crate::symplectic::hamiltonian::SharedHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Empty,
    DegenerateTrajectory,
    InfinityCurve,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Empty => "empty",
            Regime::DegenerateTrajectory => "degenerate-trajectory",
            Regime::InfinityCurve => "infinity-curve",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy)]
pub struct TransitionConfig {
    /// Radius of the parameter disc around the glancing point.
    pub window: f64,
    /// The section is `{x_index = value}`; the other coordinate is reported.
    pub section_index: usize,
    pub section_value: f64,
    pub samples: usize,
    pub t_limit: f64,
    pub tol: f64,
    /// `|E - E_0|` below which the regime is degenerate.
    pub degenerate_tol: f64,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        TransitionConfig {
            window: 0.5,
            section_index: 0,
            section_value: 0.0,
            samples: 720,
            t_limit: 10.0,
            tol: 1e-12,
            degenerate_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectionPoint {
    /// Direction of the level point seen from the glancing point.
    pub angle: f64,
    /// Flow time from `Lambda_0` to the section (either sign).
    pub t: f64,
    pub y: f64,
    pub p_y: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cusp {
    pub angle: f64,
    pub y: f64,
    pub phase: f64,
    /// `|d phase / ds|` at the cusp, `s` the arc length of the `(y, p_y)` curve.
    pub phase_slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionSample {
    pub energy: f64,
    pub e0: f64,
    pub extremum: Extremum,
    /// Signed proxy `+-(E - E_0)`, positive exactly when the level set is a curve.
    pub epsilon_proxy: f64,
    /// Mean parameter radius of `Lambda_0 cap Sigma_E` (infinity-curve only).
    pub level_radius: Option<f64>,
    pub regime: Regime,
    pub points: Vec<SectionPoint>,
    pub self_intersections: usize,
    pub cusps: Vec<Cusp>,
}

/// Glancing point `u0` of `H o embed` with energy `E_0` and its type.
#[derive(Debug, Clone)]
pub struct TransitionProblem {
    h: SharedHamiltonian,
    chart: SharedChart,
    u0: Vec<f64>,
    e0: f64,
    extremum: Extremum,
    config: TransitionConfig,
}

fn restricted(h: &SharedHamiltonian, chart: &SharedChart, u: &[f64]) -> Result<f64> {
    let z = chart.embed(u)?;
    h.check_domain(&z.x, &z.p)?;
    Ok(h.value(&z.x, &z.p))
}

impl TransitionProblem {
    pub fn new(h: SharedHamiltonian, chart: SharedChart, u0: Vec<f64>, config: TransitionConfig) -> Result<Self> {
        if chart.dim() != 2 || u0.len() != 2 {
            return Err(Error::Unsupported(
                "transition sampling needs a two-parameter Lambda_0".into(),
            ));
        }
        if !(config.window > 0.0 && config.samples >= 8 && config.tol > 0.0 && config.t_limit > 0.0) {
            return Err(Error::InvalidInput(format!("bad transition settings {config:?}")));
        }
        let e0 = restricted(&h, &chart, &u0)?;
        let f = |u: &[f64]| restricted(&h, &chart, u).unwrap_or(f64::NAN);
        let grad = crate::numeric::diff::gradient(f, &u0, 1e-6);
        let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !(gn <= 1e-6) {
            return Err(Error::NotGlancing(format!("|grad H|_Lambda0| = {gn:e} at {u0:?}")));
        }
        let hess = jacobian(|u| crate::numeric::diff::gradient(f, u, 1e-5), &u0, 1e-4);
        let sym = (&hess + hess.transpose()) * 0.5;
        let ev = sym.symmetric_eigenvalues();
        let (lo, hi) = (ev.min(), ev.max());
        let floor = 1e-5 * lo.abs().max(hi.abs()).max(1.0);
        let extremum = if hi < -floor {
            Extremum::Max
        } else if lo > floor {
            Extremum::Min
        } else {
            return Err(Error::NotApplicable(format!(
                "glancing point is not a non-degenerate extremum (Hessian eigenvalues {lo:e}, {hi:e})"
            )));
        };
        Ok(TransitionProblem {
            h,
            chart,
            u0,
            e0,
            extremum,
            config,
        })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn extremum(&self) -> Extremum {
        self.extremum
    }

    pub fn epsilon_proxy(&self, e: f64) -> f64 {
        match self.extremum {
            Extremum::Max => self.e0 - e,
            Extremum::Min => e - self.e0,
        }
    }

    /// Radius of the level set `H|Lambda_0 = E` in direction `angle`, if it
    /// meets the window.
    fn level_radius(&self, e: f64, angle: f64) -> Result<Option<f64>> {
        let dir = [angle.cos(), angle.sin()];
        let f = |s: f64| {
            let u = [self.u0[0] + s * dir[0], self.u0[1] + s * dir[1]];
            restricted(&self.h, &self.chart, &u).map(|v| v - e)
        };
        let cells = 64;
        let r = self.config.window;
        let mut a = 0.0;
        let mut fa = f(a)?;
        for k in 1..=cells {
            let b = r * k as f64 / cells as f64;
            let fb = f(b)?;
            if fa == 0.0 && a > 0.0 {
                return Ok(Some(a));
            }
            if fa * fb < 0.0 {
                let g = |s: f64| f(s).unwrap_or(f64::NAN);
                return Ok(brent(g, a, b, 1e-15, 200));
            }
            a = b;
            fa = fb;
        }
        Ok(None)
    }

    fn flow_to_section(&self, u: &[f64]) -> Result<SectionPoint> {
        let cfg = &self.config;
        let z0 = self.chart.embed(u)?;
        let (ix, iy) = (cfg.section_index, 1 - cfg.section_index);
        let g = |z: &crate::symplectic::phase::PhasePoint| z.x[ix] - cfg.section_value;
        let s0 = self.chart.eikonal(u)?.unwrap_or(0.0);
        let (t, st) = if g(&z0) == 0.0 {
            (0.0, flow_state(self.h.as_ref(), &z0, &[], 0.0, cfg.tol)?)
        } else {
            let v = hamilton_vector_field(self.h.as_ref(), &z0)?;
            let first = if g(&z0) * v.x[ix] > 0.0 {
                -cfg.t_limit
            } else {
                cfg.t_limit
            };
            let hit = match flow_to_event(self.h.as_ref(), &z0, first, cfg.tol, g)? {
                Some(v) => Some(v),
                None => flow_to_event(self.h.as_ref(), &z0, -first, cfg.tol, g)?,
            };
            hit.ok_or_else(|| Error::ChartBreakdown {
                params: u.to_vec(),
                reason: format!("trajectory misses the section within |t| <= {}", cfg.t_limit),
            })?
        };
        Ok(SectionPoint {
            angle: f64::NAN,
            t,
            y: st.z.x[iy],
            p_y: st.z.p[iy],
            phase: s0 + st.action,
        })
    }

    /// Section point of the level curve in direction `angle`.
    pub fn section_point(&self, e: f64, angle: f64) -> Result<SectionPoint> {
        let r = self.level_radius(e, angle)?.ok_or_else(|| {
            Error::ValidityDomain(format!("level set H = {e} misses the window in direction {angle}"))
        })?;
        let u = [self.u0[0] + r * angle.cos(), self.u0[1] + r * angle.sin()];
        let mut p = self.flow_to_section(&u)?;
        p.angle = angle;
        Ok(p)
    }

    pub fn sample(&self, e: f64) -> Result<TransitionSample> {
        let cfg = self.config;
        let eps = self.epsilon_proxy(e);
        let mut out = TransitionSample {
            energy: e,
            e0: self.e0,
            extremum: self.extremum,
            epsilon_proxy: eps,
            level_radius: None,
            regime: Regime::Empty,
            points: vec![],
            self_intersections: 0,
            cusps: vec![],
        };
        if (e - self.e0).abs() <= cfg.degenerate_tol {
            out.regime = Regime::DegenerateTrajectory;
            let mut p = self.flow_to_section(&self.u0)?;
            p.angle = 0.0;
            out.points.push(p);
            return Ok(out);
        }
        let angles: Vec<f64> = (0..cfg.samples)
            .map(|k| 2.0 * PI * (k as f64 + 0.5) / cfg.samples as f64)
            .collect();
        let mut radii = Vec::with_capacity(angles.len());
        for &a in &angles {
            radii.push(self.level_radius(e, a)?);
        }
        let found = radii.iter().filter(|r| r.is_some()).count();
        if found == 0 {
            let inside = restricted(&self.h, &self.chart, &self.u0)? - e;
            let edge = restricted(&self.h, &self.chart, &[self.u0[0] + cfg.window, self.u0[1]])? - e;
            if inside * edge > 0.0 && eps > 0.0 {
                return Err(Error::ValidityDomain(format!(
                    "level set H = {e} lies outside the window {}",
                    cfg.window
                )));
            }
            return Ok(out);
        }
        if found < radii.len() {
            return Err(Error::ValidityDomain(format!(
                "level set H = {e} leaves the window {}",
                cfg.window
            )));
        }
        out.regime = Regime::InfinityCurve;
        out.level_radius = Some(radii.iter().flatten().sum::<f64>() / found as f64);
        for (&a, r) in angles.iter().zip(&radii) {
            let r = r.expect("all radii found");
            let u = [self.u0[0] + r * a.cos(), self.u0[1] + r * a.sin()];
            let mut p = self.flow_to_section(&u)?;
            p.angle = a;
            out.points.push(p);
        }
        let curve: Vec<[f64; 2]> = out.points.iter().map(|p| [p.y, p.p_y]).collect();
        out.self_intersections = self_intersections(&curve);
        out.cusps = self.cusps(e, &out.points)?;
        Ok(out)
    }

    /// Turning points of `y` along the closed section curve, refined by Brent
    /// on `dy/d angle`, with the arc-length slope of the phase there.
    fn cusps(&self, e: f64, pts: &[SectionPoint]) -> Result<Vec<Cusp>> {
        let n = pts.len();
        let step = 2.0 * PI / n as f64;
        let d = 1e-6;
        let dy = |a: f64| -> f64 {
            match (self.section_point(e, a + d), self.section_point(e, a - d)) {
                (Ok(p), Ok(m)) => (p.y - m.y) / (2.0 * d),
                _ => f64::NAN,
            }
        };
        let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
        let mut out = Vec::new();
        for k in turning_indices(&ys) {
            let b = &pts[k];
            let lo = b.angle - step;
            let hi = b.angle + step;
            let Some(ac) = brent(dy, lo, hi, 1e-13, 200) else {
                continue;
            };
            let p = self.section_point(e, ac)?;
            let (pp, pm) = (self.section_point(e, ac + d)?, self.section_point(e, ac - d)?);
            let ds = ((pp.y - pm.y).powi(2) + (pp.p_y - pm.p_y).powi(2)).sqrt();
            out.push(Cusp {
                angle: ac,
                y: p.y,
                phase: p.phase,
                phase_slope: (pp.phase - pm.phase).abs() / ds,
            });
        }
        Ok(out)
    }

    /// `max |p_y - d phase / dy|` at the sample points where `|dy/d angle|`
    /// exceeds a tenth of its maximum, by central differences of step `d`.
    pub fn phase_derivative_residual(&self, e: f64, sample: &TransitionSample, d: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        let speeds: Vec<f64> = sample
            .points
            .iter()
            .map(|p| -> Result<f64> {
                let a = self.section_point(e, p.angle + d)?;
                let b = self.section_point(e, p.angle - d)?;
                Ok(((a.y - b.y) / (2.0 * d)).abs())
            })
            .collect::<Result<_>>()?;
        let vmax = speeds.iter().cloned().fold(0.0, f64::max);
        for (p, v) in sample.points.iter().zip(&speeds) {
            if *v < 0.1 * vmax {
                continue;
            }
            let a = self.section_point(e, p.angle + d)?;
            let b = self.section_point(e, p.angle - d)?;
            let slope = (a.phase - b.phase) / (a.y - b.y);
            worst = worst.max((slope - p.p_y).abs());
        }
        Ok(worst)
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Proper crossings between non-adjacent edges of the closed polyline.
pub fn self_intersections(curve: &[[f64; 2]]) -> usize {
    let n = curve.len();
    if n < 4 {
        return 0;
    }
    let mut count = 0;
    for i in 0..n {
        let (a, b) = (curve[i], curve[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (curve[j], curve[(j + 1) % n]);
            let (o1, o2) = (orient(a, b, c), orient(a, b, d));
            let (o3, o4) = (orient(c, d, a), orient(c, d, b));
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                count += 1;
            }
        }
    }
    count
}

/// Indices where the first coordinate of the closed curve turns. Exact ties
/// between neighbours are skipped, so a turn falling midway between two
/// samples is reported once.
pub fn turning_points(curve: &[[f64; 2]]) -> Vec<usize> {
    turning_indices(&curve.iter().map(|p| p[0]).collect::<Vec<_>>())
}

fn turning_indices(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    let diffs: Vec<(usize, f64)> = (0..n)
        .map(|k| (k, v[(k + 1) % n] - v[k]))
        .filter(|(_, d)| *d != 0.0)
        .collect();
    let m = diffs.len();
    (0..m)
        .filter(|&i| diffs[(i + m - 1) % m].1 * diffs[i].1 < 0.0)
        .map(|i| diffs[i].0)
        .collect()
}

/// `fig1` `(y, p_y)` and `fig2` `(y, phase)` tables; non-curve regimes give
/// header-only tables with a regime note.
pub fn figure_data(sample: &TransitionSample) -> (String, String) {
    let note = format!(
        "# regime: {}, E = {}, epsilon_proxy = {}\n",
        sample.regime, sample.energy, sample.epsilon_proxy
    );
    let mut f1 = note.clone() + "y,p_y\n";
    let mut f2 = note + "y,phase\n";
    if sample.regime == Regime::InfinityCurve {
        for p in sample.points.iter().chain(sample.points.first()) {
            f1.push_str(&format!("{:.12e},{:.12e}\n", p.y, p.p_y));
            f2.push_str(&format!("{:.12e},{:.12e}\n", p.y, p.phase));
        }
    }
    (f1, f2)
}
