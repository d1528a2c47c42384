//! The cusp normal form `S = -(tau^3/3 + xi^2 tau)` and the canonical map of
//! the worked example `H = p_y`, `S_0 = x^2 y + y^3/3`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::numeric::diff::jacobian;

/// `(p_xi, p_eta, eps, xi, eta, tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalCoordinates {
    pub p_xi: f64,
    pub p_eta: f64,
    pub eps: f64,
    pub xi: f64,
    pub eta: f64,
    pub tau: f64,
}

impl NormalCoordinates {
    pub fn to_array(&self) -> [f64; 6] {
        [self.p_xi, self.p_eta, self.eps, self.xi, self.eta, self.tau]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        NormalCoordinates {
            p_xi: v[0],
            p_eta: v[1],
            eps: v[2],
            xi: v[3],
            eta: v[4],
            tau: v[5],
        }
    }

    /// Largest defect in `p_xi = -2 xi tau`, `p_eta = 0`, `eps = tau^2 + xi^2`.
    pub fn manifold_defect(&self) -> f64 {
        [
            self.p_xi + 2.0 * self.xi * self.tau,
            self.p_eta,
            self.eps - (self.xi * self.xi + self.tau * self.tau),
        ]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn normal_form_phase(xi: f64, tau: f64) -> f64 {
    -(tau.powi(3) / 3.0 + xi * xi * tau)
}

/// The point of the normal-form manifold over `(xi, eta, tau)` and `S` there.
pub fn normal_form_manifold(xi: f64, eta: f64, tau: f64) -> (NormalCoordinates, f64) {
    (
        NormalCoordinates {
            p_xi: -2.0 * xi * tau,
            p_eta: 0.0,
            eps: xi * xi + tau * tau,
            xi,
            eta,
            tau,
        },
        normal_form_phase(xi, tau),
    )
}

/// `S(x, y, t) = x^2 (y - t) + (y - t)^3 / 3`.
pub fn example_phase(x: f64, y: f64, t: f64) -> f64 {
    let s = y - t;
    x * x * s + s.powi(3) / 3.0
}

/// `(p_x, p_y, E, x, y, t)` on the example manifold
/// `{p_x = S_x, p_y = S_y, E = -S_t}`.
pub fn example_manifold_point(x: f64, y: f64, t: f64) -> [f64; 6] {
    let s = y - t;
    let py = x * x + s * s;
    [2.0 * x * s, py, py, x, y, t]
}

/// `p_xi = p_x, p_eta = p_y - E, eps = E, xi = x, eta = y - T, tau = t - y`.
pub fn example_canonical_map(z: [f64; 6], big_t: f64) -> NormalCoordinates {
    let [px, py, e, x, y, t] = z;
    NormalCoordinates {
        p_xi: px,
        p_eta: py - e,
        eps: e,
        xi: x,
        eta: y - big_t,
        tau: t - y,
    }
}

/// `Omega` for `dp_1^dq_1 + dp_2^dq_2 - dp_3^dq_3` in the ordering
/// `(p_1, p_2, p_3, q_1, q_2, q_3)`.
pub fn space_time_form() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6, 6);
    for (i, s) in [1.0, 1.0, -1.0].into_iter().enumerate() {
        m[(i, i + 3)] = s;
        m[(i + 3, i)] = -s;
    }
    m
}

/// Finite-difference Jacobian of the example map at `z`.
pub fn example_map_jacobian(z: [f64; 6], big_t: f64) -> DMatrix<f64> {
    jacobian(
        |v| {
            let a = [v[0], v[1], v[2], v[3], v[4], v[5]];
            example_canonical_map(a, big_t).to_array().to_vec()
        },
        &z,
        1e-6,
    )
}

/// `max |J^T Omega J - Omega|` for the example map.
pub fn example_symplectic_defect(z: [f64; 6], big_t: f64) -> f64 {
    let j = example_map_jacobian(z, big_t);
    let om = space_time_form();
    (j.transpose() * &om * j - om).abs().max()
}

/// `pi_t(p_x, p_y, E, x, y, t) = (x, y, t)`.
pub fn pi_t(z: [f64; 6]) -> [f64; 3] {
    [z[3], z[4], z[5]]
}

/// `pi_E(p_x, p_y, E, x, y, t) = (x, y, E)`.
pub fn pi_e(z: [f64; 6]) -> [f64; 3] {
    [z[3], z[4], z[2]]
}

/// The section `eta = const` of the normal-form manifold at level `eps > 0`:
/// `(xi, p_xi, Phi)` with the reduced phase `Phi = S + eps tau`, sampled on
/// `n` angles `theta_k = 2 pi (k + 1/2) / n`.
pub fn normal_form_section(eps: f64, n: usize) -> Vec<[f64; 3]> {
    let r = eps.max(0.0).sqrt();
    (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let (xi, tau) = (r * th.cos(), r * th.sin());
            let (nc, s) = normal_form_manifold(xi, 0.0, tau);
            [xi, nc.p_xi, s + eps * tau]
        })
        .collect()
}
