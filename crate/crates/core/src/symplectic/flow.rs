//! Hamiltonian vector fields and their flows.
//!
//! The integrator is an adaptive embedded Runge–Kutta pair. Symplecticity is
//! checked by tests, not built into the scheme.

use crate::error::{Error, Result};
use crate::numeric::ode::{self, OdeSystem, Tolerance};
use crate::symplectic::hamiltonian::Hamiltonian;
use crate::symplectic::phase::{dot, PhasePoint};

/// `v_H(z) = (dH/dp, -dH/dx)`.
pub fn hamilton_vector_field(h: &dyn Hamiltonian, z: &PhasePoint) -> Result<PhasePoint> {
    h.check_domain(&z.x, &z.p)?;
    let (gx, gp) = h.gradient(&z.x, &z.p);
    let v = PhasePoint {
        x: gp,
        p: gx.into_iter().map(|g| -g).collect(),
    };
    if !v.is_finite() {
        return Err(Error::Evaluation {
            what: format!("Hamilton vector field of {}", h.name()),
            at: z.to_vec(),
        });
    }
    Ok(v)
}

/// State layout: `[x (n), p (n), action (1), tangent_1 (2n), ...]`.
///
/// The action slot accumulates `int <p, dH/dp> dt`, i.e. `int p dx` along the
/// trajectory.
struct HamiltonSystem<'a> {
    h: &'a dyn Hamiltonian,
    n: usize,
    tangents: usize,
}

impl OdeSystem for HamiltonSystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.n;
        let (x, p) = (&y[..n], &y[n..2 * n]);
        self.h.check_domain(x, p)?;
        let (gx, gp) = self.h.gradient(x, p);
        for i in 0..n {
            dy[i] = gp[i];
            dy[n + i] = -gx[i];
        }
        dy[2 * n] = dot(p, &gp);
        if self.tangents > 0 {
            let hm = self.h.hessian(x, p);
            let base = 2 * n + 1;
            for k in 0..self.tangents {
                let off = base + k * 2 * n;
                let v = &y[off..off + 2 * n];
                // d/dt (dx, dp) = (H_px dx + H_pp dp, -H_xx dx - H_xp dp)
                for i in 0..n {
                    let mut ax = 0.0;
                    let mut ap = 0.0;
                    for j in 0..2 * n {
                        ax += hm[(n + i, j)] * v[j];
                        ap += hm[(i, j)] * v[j];
                    }
                    dy[off + i] = ax;
                    dy[off + n + i] = -ap;
                }
            }
        }
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                what: format!("Hamilton equations of {}", self.h.name()),
                at: y[..2 * n].to_vec(),
            });
        }
        Ok(())
    }
}

/// Endpoint of a trajectory together with the accumulated `int p dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub z: PhasePoint,
    pub action: f64,
    pub tangents: Vec<PhasePoint>,
}

fn pack(z0: &PhasePoint, tangents: &[PhasePoint]) -> Vec<f64> {
    let mut y = z0.to_vec();
    y.push(0.0);
    for t in tangents {
        y.extend(t.to_vec());
    }
    y
}

fn unpack(y: &[f64], n: usize, k: usize) -> FlowState {
    let z = PhasePoint::from_slice(&y[..2 * n]);
    let base = 2 * n + 1;
    let tangents = (0..k)
        .map(|j| PhasePoint::from_slice(&y[base + 2 * n * j..base + 2 * n * (j + 1)]))
        .collect();
    FlowState {
        z,
        action: y[2 * n],
        tangents,
    }
}

/// Flow `g^t(z0)`, negative `t` allowed; `flow(h, z0, 0, _) == z0` exactly.
pub fn flow(h: &dyn Hamiltonian, z0: &PhasePoint, t: f64, tol: f64) -> Result<PhasePoint> {
    Ok(flow_state(h, z0, &[], t, tol)?.z)
}

/// Flow with the action integral and the linearised flow applied to `tangents`.
pub fn flow_state(
    h: &dyn Hamiltonian,
    z0: &PhasePoint,
    tangents: &[PhasePoint],
    t: f64,
    tol: f64,
) -> Result<FlowState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let n = z0.dim();
    h.check_domain(&z0.x, &z0.p)?;
    if t == 0.0 {
        return Ok(FlowState {
            z: z0.clone(),
            action: 0.0,
            tangents: tangents.to_vec(),
        });
    }
    let sys = HamiltonSystem {
        h,
        n,
        tangents: tangents.len(),
    };
    let y = ode::integrate(&sys, 0.0, &pack(z0, tangents), t, &Tolerance::new(tol))?;
    Ok(unpack(&y, n, tangents.len()))
}

/// Integrates until `event(z)` changes sign, searching in the direction of
/// `t_limit` (which may be negative). Returns the crossing time and state.
pub fn flow_to_event<G>(
    h: &dyn Hamiltonian,
    z0: &PhasePoint,
    t_limit: f64,
    tol: f64,
    event: G,
) -> Result<Option<(f64, FlowState)>>
where
    G: Fn(&PhasePoint) -> f64,
{
    let n = z0.dim();
    h.check_domain(&z0.x, &z0.p)?;
    let sys = HamiltonSystem { h, n, tangents: 0 };
    let hit = ode::integrate_to_event(&sys, 0.0, &pack(z0, &[]), t_limit, &Tolerance::new(tol), |_, y| {
        event(&PhasePoint::from_slice(&y[..2 * n]))
    })?;
    Ok(hit.map(|(t, y)| (t, unpack(&y, n, 0))))
}

/// Largest `|H(g^s z0) - H(z0)|` over the continuous output on `[0, t]`.
pub fn energy_drift(h: &dyn Hamiltonian, z0: &PhasePoint, t: f64, tol: f64) -> Result<f64> {
    let n = z0.dim();
    let e0 = h.value(&z0.x, &z0.p);
    let sys = HamiltonSystem { h, n, tangents: 0 };
    let mut worst = 0.0f64;
    ode::integrate_observed(&sys, 0.0, &pack(z0, &[]), t, &Tolerance::new(tol), |step| {
        for k in 1..=4 {
            let s = step.t0 + step.h * k as f64 / 4.0;
            let y = step.dense(s);
            worst = worst.max((h.value(&y[..n], &y[n..2 * n]) - e0).abs());
        }
        Ok(true)
    })?;
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{position_names, Polynomial};
    use crate::symplectic::hamiltonian::{from_registry, Conformal};

    fn pt(x: &[f64], p: &[f64]) -> PhasePoint {
        PhasePoint::new(x.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn vector_field_examples() {
        let pn = from_registry("pn", 2, None).unwrap();
        let v = hamilton_vector_field(pn.as_ref(), &pt(&[0.0, 0.0], &[0.0, 1.0])).unwrap();
        assert_eq!(v, pt(&[0.0, 1.0], &[0.0, 0.0]));

        let free = from_registry("free", 2, None).unwrap();
        let v = hamilton_vector_field(free.as_ref(), &pt(&[1.0, 0.0], &[0.0, 0.0])).unwrap();
        assert_eq!(v, pt(&[0.0, 0.0], &[0.0, 0.0]));

        let rho = Polynomial::parse("1+x^2+y^2", &position_names(2)).unwrap();
        let c1 = Conformal::new("conformal1", 1.0, rho).unwrap();
        let v = hamilton_vector_field(&c1, &pt(&[0.0, 0.0], &[1.0, 0.0])).unwrap();
        assert_eq!(v, pt(&[1.0, 0.0], &[0.0, 0.0]));
    }

    #[test]
    fn straight_line_flows() {
        let pn = from_registry("pn", 2, None).unwrap();
        let z = flow(pn.as_ref(), &pt(&[0.0, 0.0], &[0.0, 1.0]), 3.0, 1e-10).unwrap();
        assert!(z.distance(&pt(&[0.0, 3.0], &[0.0, 1.0])) < 1e-12);

        let free = from_registry("free", 2, None).unwrap();
        let z = flow(free.as_ref(), &pt(&[1.0, 0.0], &[1.0, 0.0]), 1.0, 1e-10).unwrap();
        assert!(z.distance(&pt(&[3.0, 0.0], &[1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let free = from_registry("free", 2, None).unwrap();
        let z0 = pt(&[0.1, 0.2], &[0.3, 0.4]);
        assert_eq!(flow(free.as_ref(), &z0, 0.0, 1e-10).unwrap(), z0);
    }

    #[test]
    fn singular_start_is_a_domain_error() {
        let c1 = from_registry("conformal1", 2, None).unwrap();
        let r = flow(c1.as_ref(), &pt(&[0.0, 0.0], &[0.0, 0.0]), 1.0, 1e-10);
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn action_of_free_flow() {
        // int p dx = int 2 p^2 dt = 2 E t
        let free = from_registry("free", 2, None).unwrap();
        let st = flow_state(free.as_ref(), &pt(&[0.0, 0.0], &[0.6, 0.8]), &[], 1.5, 1e-12).unwrap();
        assert!((st.action - 3.0).abs() < 1e-12);
    }

    #[test]
    fn event_location() {
        let free = from_registry("free", 2, None).unwrap();
        let (t, st) = flow_to_event(free.as_ref(), &pt(&[-1.0, 0.0], &[1.0, 0.5]), 10.0, 1e-12, |z| z.x[0])
            .unwrap()
            .unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        assert!((st.z.x[1] - 0.5).abs() < 1e-12);
        let back = flow_to_event(free.as_ref(), &pt(&[1.0, 0.0], &[1.0, 0.5]), -10.0, 1e-12, |z| z.x[0])
            .unwrap()
            .unwrap();
        assert!((back.0 + 0.5).abs() < 1e-12);
    }
}
