//! Generating families built on the Bessel cylinder with a Lagrange
//! multiplier `lambda`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::genfam::family::{invariant_density, GeneratingFamily};
use crate::glancing::cylinder::{restricted_energy, restricted_gradient};
use crate::manifolds::bessel::BesselCylinder;
use crate::manifolds::flowout::Trajectories;
use crate::manifolds::sphere::SphereFrame;
use crate::symplectic::flow::hamilton_vector_field;
use crate::symplectic::hamiltonian::SharedHamiltonian;
use crate::symplectic::phase::{dot, norm, PhasePoint};

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u - v).collect()
}

fn angle_names(frame: &SphereFrame) -> Vec<String> {
    match frame.angles() {
        0 => vec![],
        1 => vec!["psi".into()],
        k => (1..=k).map(|i| format!("psi{i}")).collect(),
    }
}

/// `Phi_0 = phi + lambda <omega(psi), x - phi omega(psi)>`,
/// `theta = (lambda, phi, psi)`.
#[derive(Debug, Clone, Copy)]
pub struct Phi0 {
    frame: SphereFrame,
}

impl Phi0 {
    pub fn new(n: usize) -> Self {
        Phi0 {
            frame: SphereFrame::new(n),
        }
    }
}

impl GeneratingFamily for Phi0 {
    fn n_theta(&self) -> usize {
        self.frame.dim() + 1
    }

    fn dim_x(&self) -> usize {
        self.frame.dim()
    }

    fn theta_names(&self) -> Vec<String> {
        let mut v = vec!["lambda".to_string(), "phi".to_string()];
        v.extend(angle_names(&self.frame));
        v
    }

    fn value(&self, th: &[f64], x: &[f64]) -> Result<f64> {
        let (lam, phi, psi) = (th[0], th[1], &th[2..]);
        let w = self.frame.omega(psi);
        Ok((1.0 - lam) * phi + lam * dot(&w, x))
    }

    fn grad_theta(&self, th: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let (lam, phi, psi) = (th[0], th[1], &th[2..]);
        let w = self.frame.omega(psi);
        let mut g = vec![dot(&w, x) - phi, 1.0 - lam];
        for d in self.frame.d_omega(psi) {
            g.push(lam * dot(&d, x));
        }
        Ok(g)
    }

    fn grad_x(&self, th: &[f64], _x: &[f64]) -> Result<Vec<f64>> {
        let w = self.frame.omega(&th[2..]);
        Ok(w.iter().map(|v| th[0] * v).collect())
    }

    fn canonicalize(&self, th: &mut [f64]) {
        self.frame.canonicalize(&mut th[2..]);
    }

    fn default_seeds(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let r = norm(x);
        let mut seeds = Vec::new();
        for phi in [-r, r] {
            for psi in angle_seeds(&self.frame) {
                let mut s = vec![1.0, phi];
                s.extend(psi);
                seeds.push(s);
            }
        }
        seeds
    }
}

fn angle_seeds(frame: &SphereFrame) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    match frame.dim() {
        1 => vec![vec![]],
        2 => (0..8).map(|k| vec![k as f64 * PI / 4.0]).collect(),
        _ => {
            let mut v = Vec::new();
            for i in 0..4 {
                for k in 0..8 {
                    v.push(vec![(i as f64 + 0.5) * PI / 4.0, k as f64 * PI / 4.0]);
                }
            }
            v
        }
    }
}

/// Trajectory `(X, P)(phi, psi, t)` from the Bessel cylinder with its first
/// derivatives in `(phi, psi..., t)`.
#[derive(Debug, Clone)]
pub struct TrajectoryJet {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `(d X, d P)` per parameter, `t` last.
    pub d: Vec<PhasePoint>,
    pub energy: f64,
}

impl TrajectoryJet {
    /// `det(P, P_psi_1, ..., P_psi_{n-1})`.
    pub fn det_p_ppsi(&self) -> f64 {
        let n = self.p.len();
        let m = DMatrix::from_fn(n, n, |i, j| if j == 0 { self.p[i] } else { self.d[j].p[i] });
        m.determinant()
    }
}

/// Shared flow machinery for `Phi` and `Phi_+^E`.
#[derive(Debug, Clone)]
pub struct BesselFlow {
    traj: Trajectories,
    frame: SphereFrame,
    h: SharedHamiltonian,
}

impl BesselFlow {
    /// `H` must be homogeneous of degree one in `p`.
    pub fn new(h: SharedHamiltonian, n: usize, tol: f64) -> Result<Self> {
        if h.homogeneity() != Some(1.0) {
            return Err(Error::Precondition(format!(
                "{} must be declared homogeneous of degree 1 in p",
                h.name()
            )));
        }
        let base = Arc::new(BesselCylinder::new(n));
        Ok(BesselFlow {
            traj: Trajectories::new(base, h.clone(), (0.0, 1.0), tol)?,
            frame: SphereFrame::new(n),
            h,
        })
    }

    pub fn n(&self) -> usize {
        self.frame.dim()
    }

    pub fn hamiltonian(&self) -> &SharedHamiltonian {
        &self.h
    }

    pub fn jet(&self, phi: f64, psi: &[f64], t: f64) -> Result<TrajectoryJet> {
        let mut u = vec![phi];
        u.extend_from_slice(psi);
        u.push(t);
        let (_, st, e) = self.traj.state(&u, true)?;
        let mut d = st.tangents;
        d.push(hamilton_vector_field(self.h.as_ref(), &st.z)?);
        Ok(TrajectoryJet {
            x: st.z.x,
            p: st.z.p,
            d,
            energy: e,
        })
    }

    fn checked_jet(&self, phi: f64, psi: &[f64], t: f64) -> Result<TrajectoryJet> {
        let jet = self.jet(phi, psi, t)?;
        let det = jet.det_p_ppsi();
        if det.abs() <= 1e-9 || !det.is_finite() {
            let mut params = vec![phi];
            params.extend_from_slice(psi);
            params.push(t);
            return Err(Error::ChartBreakdown {
                params,
                reason: format!("det(P, P_psi) = {det:e}"),
            });
        }
        Ok(jet)
    }

    /// `d_theta Phi` for `theta = (lambda, phi, psi)` and
    /// `d_t Phi = lambda (<P_t, x - X> - <P, X_t>)`.
    fn gradients(&self, lam: f64, jet: &TrajectoryJet, x: &[f64]) -> (Vec<f64>, f64) {
        let r = diff(x, &jet.x);
        let k = jet.d.len();
        let mut g = vec![dot(&jet.p, &r)];
        for (j, dj) in jet.d[..k - 1].iter().enumerate() {
            let c = lam * (dot(&dj.p, &r) - dot(&jet.p, &dj.x));
            g.push(if j == 0 { 1.0 + c } else { c });
        }
        let dt = &jet.d[k - 1];
        (g, lam * (dot(&dt.p, &r) - dot(&jet.p, &dt.x)))
    }
}

/// `Phi(theta, x, t) = phi + lambda <P, x - X>`, `theta = (lambda, phi, psi)`,
/// on the space-time base `(x, t)`.
#[derive(Debug, Clone)]
pub struct FlowPhi {
    flow: BesselFlow,
}

impl FlowPhi {
    pub fn new(h: SharedHamiltonian, n: usize, tol: f64) -> Result<Self> {
        Ok(FlowPhi {
            flow: BesselFlow::new(h, n, tol)?,
        })
    }

    pub fn flow(&self) -> &BesselFlow {
        &self.flow
    }

    /// `d_t Phi + H(x, d_x Phi)` at `lambda = 1`, `x = X(phi, psi, t)`.
    pub fn hamilton_jacobi_residual(&self, phi: f64, psi: &[f64], t: f64) -> Result<f64> {
        let jet = self.flow.jet(phi, psi, t)?;
        let mut th = vec![1.0, phi];
        th.extend_from_slice(psi);
        let mut x = jet.x.clone();
        x.push(t);
        let g = self.grad_x(&th, &x)?;
        let n = self.flow.n();
        Ok(g[n] + self.flow.h.value(&x[..n], &g[..n]))
    }

    /// Critical point over `(phi, psi, t)`: `theta = (1, phi, psi)`,
    /// base point `(X, t)`.
    pub fn critical_point(&self, phi: f64, psi: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let jet = self.flow.jet(phi, psi, t)?;
        let mut th = vec![1.0, phi];
        th.extend_from_slice(psi);
        let mut x = jet.x;
        x.push(t);
        Ok((th, x))
    }

    /// `(F[Phi, dy], det(P, P_psi))` with `y = (phi, psi, t)` read from the
    /// family coordinates.
    pub fn density_on_chart(&self, phi: f64, psi: &[f64], t: f64) -> Result<(f64, f64)> {
        let (th, x) = self.critical_point(phi, psi, t)?;
        let f = invariant_density(self, prop_coordinates, &th, &x)?;
        let det = self.flow.jet(phi, psi, t)?.det_p_ppsi();
        Ok((f, det))
    }
}

/// `y = (phi, psi..., t)` as functions of `(theta, x)`.
pub fn prop_coordinates(th: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let mut y = th[1..].to_vec();
    y.push(x[x.len() - 1]);
    Ok(y)
}

impl GeneratingFamily for FlowPhi {
    fn n_theta(&self) -> usize {
        self.flow.n() + 1
    }

    fn dim_x(&self) -> usize {
        self.flow.n() + 1
    }

    fn theta_names(&self) -> Vec<String> {
        let mut v = vec!["lambda".to_string(), "phi".to_string()];
        v.extend(angle_names(&self.flow.frame));
        v
    }

    fn value(&self, th: &[f64], x: &[f64]) -> Result<f64> {
        let n = self.flow.n();
        let jet = self.flow.checked_jet(th[1], &th[2..], x[n])?;
        Ok(th[1] + th[0] * dot(&jet.p, &diff(&x[..n], &jet.x)))
    }

    fn grad_theta(&self, th: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let n = self.flow.n();
        let jet = self.flow.checked_jet(th[1], &th[2..], x[n])?;
        Ok(self.flow.gradients(th[0], &jet, &x[..n]).0)
    }

    fn grad_x(&self, th: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let n = self.flow.n();
        let jet = self.flow.checked_jet(th[1], &th[2..], x[n])?;
        let mut g: Vec<f64> = jet.p.iter().map(|v| th[0] * v).collect();
        g.push(self.flow.gradients(th[0], &jet, &x[..n]).1);
        Ok(g)
    }

    fn canonicalize(&self, th: &mut [f64]) {
        self.flow.frame.canonicalize(&mut th[2..]);
    }

    fn default_seeds(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.flow.n();
        let r = norm(&x[..n]);
        let mut seeds = Vec::new();
        for phi in [-r, 0.0, r] {
            for psi in angle_seeds(&self.flow.frame) {
                let mut s = vec![1.0, phi];
                s.extend(psi);
                seeds.push(s);
            }
        }
        seeds
    }
}

/// `Phi_+^E(theta_+, x) = Phi(lambda, phi, psi, x, t) + E t`,
/// `theta_+ = (lambda, phi, psi, t)`, near the trajectory from a non-glancing
/// point `z_0` with `E = H(z_0)`.
#[derive(Debug, Clone)]
pub struct PhiPlus {
    flow: BesselFlow,
    energy: f64,
    z0_params: Vec<f64>,
    t_range: (f64, f64),
}

impl PhiPlus {
    pub fn new(h: SharedHamiltonian, z0_params: &[f64], t_range: (f64, f64), tol: f64) -> Result<Self> {
        let n = z0_params.len();
        let flow = BesselFlow::new(h, n, tol)?;
        let g = restricted_gradient(flow.h.as_ref(), z0_params);
        let z0 = crate::manifolds::bessel::bessel_point(z0_params[0], &z0_params[1..]);
        let (gx, gp) = flow.h.gradient(&z0.x, &z0.p);
        let scale = 1.0 + (dot(&gx, &gx) + dot(&gp, &gp)).sqrt();
        if norm(&g) <= 1e-6 * scale {
            return Err(Error::Precondition(format!(
                "z0 = {z0_params:?} is a glancing point; use the normal-form construction"
            )));
        }
        Ok(PhiPlus {
            energy: restricted_energy(flow.h.as_ref(), z0_params),
            flow,
            z0_params: z0_params.to_vec(),
            t_range,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn flow(&self) -> &BesselFlow {
        &self.flow
    }
}

impl GeneratingFamily for PhiPlus {
    fn n_theta(&self) -> usize {
        self.flow.n() + 2
    }

    fn dim_x(&self) -> usize {
        self.flow.n()
    }

    fn theta_names(&self) -> Vec<String> {
        let mut v = vec!["lambda".to_string(), "phi".to_string()];
        v.extend(angle_names(&self.flow.frame));
        v.push("t".into());
        v
    }

    fn value(&self, th: &[f64], x: &[f64]) -> Result<f64> {
        let k = th.len();
        let t = th[k - 1];
        let jet = self.flow.checked_jet(th[1], &th[2..k - 1], t)?;
        Ok(th[1] + th[0] * dot(&jet.p, &diff(x, &jet.x)) + self.energy * t)
    }

    fn grad_theta(&self, th: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let k = th.len();
        let jet = self.flow.checked_jet(th[1], &th[2..k - 1], th[k - 1])?;
        let (mut g, gt) = self.flow.gradients(th[0], &jet, x);
        g.push(gt + self.energy);
        Ok(g)
    }

    fn grad_x(&self, th: &[f64], _x: &[f64]) -> Result<Vec<f64>> {
        let k = th.len();
        let jet = self.flow.checked_jet(th[1], &th[2..k - 1], th[k - 1])?;
        Ok(jet.p.iter().map(|v| th[0] * v).collect())
    }

    fn canonicalize(&self, th: &mut [f64]) {
        let k = th.len();
        self.flow.frame.canonicalize(&mut th[2..k - 1]);
    }

    fn default_seeds(&self, _x: &[f64]) -> Vec<Vec<f64>> {
        let (a, b) = self.t_range;
        let mut seeds = Vec::new();
        for k in 0..=4 {
            let mut s = vec![1.0];
            s.extend_from_slice(&self.z0_params);
            s.push(a + (b - a) * k as f64 / 4.0);
            seeds.push(s);
        }
        seeds
    }
}

/// `S(x) = sign |x|`, an `N = 0` family for the Bessel cylinder off its axis.
#[derive(Debug, Clone, Copy)]
pub struct ReducedBesselPhase {
    pub n: usize,
    pub sign: f64,
}

impl GeneratingFamily for ReducedBesselPhase {
    fn n_theta(&self) -> usize {
        0
    }

    fn dim_x(&self) -> usize {
        self.n
    }

    fn theta_names(&self) -> Vec<String> {
        vec![]
    }

    fn value(&self, _th: &[f64], x: &[f64]) -> Result<f64> {
        Ok(self.sign * norm(x))
    }

    fn grad_theta(&self, _th: &[f64], _x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![])
    }

    fn grad_x(&self, _th: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::Domain {
                reason: "the reduced phase is singular on the axis".into(),
                at: x.to_vec(),
            });
        }
        Ok(x.iter().map(|v| self.sign * v / r).collect())
    }

    fn default_seeds(&self, _x: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![]]
    }
}
