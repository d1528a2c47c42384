//! Flow-outs of a chart by a Hamiltonian: `Trajectories` in `T*R^n` and the
//! space-time chart `FlowOutChart` in `T*R^{n+1}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifolds::chart::{ManifoldChart, SharedChart};
use crate::manifolds::slices::EnergySlice;
use crate::symplectic::flow::{flow_state, hamilton_vector_field, FlowState};
use crate::symplectic::hamiltonian::SharedHamiltonian;
use crate::symplectic::phase::{dot, PhasePoint};

pub const DEFAULT_FLOW_TOL: f64 = 1e-12;

/// `(u, t) -> g^t(embed(u))`; the eikonal is `S_0 + int p dx`.
#[derive(Debug, Clone)]
pub struct Trajectories {
    base: SharedChart,
    h: SharedHamiltonian,
    t_range: (f64, f64),
    tol: f64,
}

impl Trajectories {
    pub fn new(base: SharedChart, h: SharedHamiltonian, t_range: (f64, f64), tol: f64) -> Result<Self> {
        if base.is_space_time() {
            return Err(Error::InvalidInput("cannot flow a space-time chart".into()));
        }
        if !(tol > 0.0) || !(t_range.0 <= t_range.1) {
            return Err(Error::InvalidInput(format!(
                "bad flow settings: t in {t_range:?}, tol {tol}"
            )));
        }
        Ok(Trajectories { base, h, t_range, tol })
    }

    pub fn base(&self) -> &SharedChart {
        &self.base
    }

    pub fn hamiltonian(&self) -> &SharedHamiltonian {
        &self.h
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn split<'a>(&self, u: &'a [f64]) -> Result<(&'a [f64], f64)> {
        if u.len() != self.base.dim() + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} parameters, got {}",
                self.base.dim() + 1,
                u.len()
            )));
        }
        let (ub, t) = u.split_at(u.len() - 1);
        Ok((ub, t[0]))
    }

    /// Initial point, the flowed state (with propagated base tangents when
    /// requested) and the energy.
    pub fn state(&self, u: &[f64], with_tangents: bool) -> Result<(PhasePoint, FlowState, f64)> {
        let (ub, t) = self.split(u)?;
        let run = || -> Result<(PhasePoint, FlowState, f64)> {
            let z0 = self.base.embed(ub)?;
            self.h.check_domain(&z0.x, &z0.p)?;
            let e = self.h.value(&z0.x, &z0.p);
            let tan = if with_tangents { self.base.tangents(ub)? } else { vec![] };
            let st = flow_state(self.h.as_ref(), &z0, &tan, t, self.tol)?;
            Ok((z0, st, e))
        };
        run().map_err(|e| e.at_params(u))
    }

    /// `S_0 + int p dx` along the trajectory.
    pub fn reduced_eikonal(&self, u: &[f64]) -> Result<Option<f64>> {
        let (ub, _) = self.split(u)?;
        let Some(s0) = self.base.eikonal(ub)? else {
            return Ok(None);
        };
        let (_, st, _) = self.state(u, false)?;
        Ok(Some(s0 + st.action))
    }
}

impl ManifoldChart for Trajectories {
    fn param_names(&self) -> Vec<String> {
        let mut v = self.base.param_names();
        v.push("t".into());
        v
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        let mut d = self.base.domain();
        d.push(self.t_range);
        d
    }

    fn embed(&self, u: &[f64]) -> Result<PhasePoint> {
        Ok(self.state(u, false)?.1.z)
    }

    fn eikonal(&self, u: &[f64]) -> Result<Option<f64>> {
        self.reduced_eikonal(u)
    }

    /// Linearised flow of the base tangents plus `v_H`.
    fn tangents(&self, u: &[f64]) -> Result<Vec<PhasePoint>> {
        let (_, st, _) = self.state(u, true)?;
        let mut out = st.tangents;
        out.push(hamilton_vector_field(self.h.as_ref(), &st.z).map_err(|e| e.at_params(u))?);
        Ok(out)
    }
}

/// Space-time flow-out `(u, t) -> (X, t; P, -H(embed(u)))`.
///
/// The eikonal is the space-time action `S_0 + int (p x' - H) dt`, which is
/// constant in `t` for Hamiltonians homogeneous of degree one in `p`.
#[derive(Debug, Clone)]
pub struct FlowOutChart {
    traj: Trajectories,
}

impl FlowOutChart {
    pub fn trajectories(&self) -> &Trajectories {
        &self.traj
    }

    /// `S_0 + int p dx`, without the `-E t` term.
    pub fn reduced_eikonal(&self, u: &[f64]) -> Result<Option<f64>> {
        self.traj.reduced_eikonal(u)
    }

    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        let z0 = self.traj.base.embed(&u[..u.len() - 1])?;
        Ok(self.traj.h.value(&z0.x, &z0.p))
    }
}

impl ManifoldChart for FlowOutChart {
    fn param_names(&self) -> Vec<String> {
        self.traj.param_names()
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        self.traj.domain()
    }

    fn embed(&self, u: &[f64]) -> Result<PhasePoint> {
        let (_, st, e) = self.traj.state(u, false)?;
        let t = u[u.len() - 1];
        let mut z = st.z;
        z.x.push(t);
        z.p.push(-e);
        Ok(z)
    }

    fn eikonal(&self, u: &[f64]) -> Result<Option<f64>> {
        let t = u[u.len() - 1];
        let (ub, _) = self.traj.split(u)?;
        let Some(s0) = self.traj.base.eikonal(ub)? else {
            return Ok(None);
        };
        let (_, st, e) = self.traj.state(u, false)?;
        Ok(Some(s0 + st.action - e * t))
    }

    fn is_space_time(&self) -> bool {
        true
    }

    fn tangents(&self, u: &[f64]) -> Result<Vec<PhasePoint>> {
        let (ub, _) = self.traj.split(u)?;
        let (z0, st, _) = self.traj.state(u, true)?;
        let (gx, gp) = self.traj.h.gradient(&z0.x, &z0.p);
        let base_t = self.traj.base.tangents(ub)?;
        let mut out: Vec<PhasePoint> = st
            .tangents
            .into_iter()
            .zip(&base_t)
            .map(|(mut v, b)| {
                let de = dot(&gx, &b.x) + dot(&gp, &b.p);
                v.x.push(0.0);
                v.p.push(-de);
                v
            })
            .collect();
        let mut vh = hamilton_vector_field(self.traj.h.as_ref(), &st.z).map_err(|e| e.at_params(u))?;
        vh.x.push(1.0);
        vh.p.push(0.0);
        out.push(vh);
        Ok(out)
    }
}

fn probe_grid(dom: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![]];
    for &(a, b) in dom {
        let axis: Vec<f64> = if per_axis <= 1 || a == b {
            vec![0.5 * (a + b)]
        } else {
            (0..per_axis)
                .map(|k| a + (b - a) * k as f64 / (per_axis - 1) as f64)
                .collect()
        };
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    pts
}

/// Space-time flow-out of `lambda0` on `t in [0, t_max]`.
///
/// The trajectories through a coarse probe grid are integrated up front, so
/// integration failures surface here with the offending parameters.
pub fn flow_out(lambda0: SharedChart, h: SharedHamiltonian, t_max: f64, tol: f64) -> Result<FlowOutChart> {
    let traj = Trajectories::new(lambda0, h, (0.0, t_max), tol)?;
    let chart = FlowOutChart { traj };
    for u in probe_grid(&chart.domain(), 3) {
        chart.embed(&u)?;
    }
    Ok(chart)
}

/// Flow-out of `lambda0 cap {H = E}` in `T*R^n`, with parameter `solve_index`
/// of `lambda0` eliminated on `interval`.
pub fn flow_out_energy(
    lambda0: SharedChart,
    h: SharedHamiltonian,
    energy: f64,
    solve_index: usize,
    interval: (f64, f64),
    t_max: f64,
    tol: f64,
) -> Result<Trajectories> {
    let slice = EnergySlice::new(lambda0, h.clone(), energy, solve_index, interval)?;
    for u in probe_grid(&slice.domain(), 7) {
        slice.solve(&u)?;
    }
    Trajectories::new(Arc::new(slice), h, (0.0, t_max), tol)
}

/// `max |<X_t, P_a> - <P_t, X_a>|` over samples of a chart whose last
/// parameter is `t`, with `a` the parameter at `angle_index`.
pub fn symmetry_relation_residual(chart: &dyn ManifoldChart, angle_index: usize, samples: usize) -> Result<f64> {
    let k = chart.dim();
    if angle_index + 1 >= k {
        return Err(Error::InvalidInput(format!(
            "angle index {angle_index} must precede the time parameter"
        )));
    }
    let mut worst = 0.0f64;
    for u in crate::manifolds::chart::sample_params(chart, samples, 0x5e11) {
        let tan = crate::manifolds::chart::fd_tangents(chart, &u, 1e-5).map_err(|e| e.at_params(&u))?;
        let (dt, da) = (&tan[k - 1], &tan[angle_index]);
        let r = dot(&dt.x, &da.p) - dot(&dt.p, &da.x);
        worst = worst.max(r.abs());
    }
    Ok(worst)
}
