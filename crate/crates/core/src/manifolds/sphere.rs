//! Unit-sphere charts `psi -> omega(psi)` with a direct orthonormal completion.

use std::f64::consts::PI;

/// Sphere parametrisation for `n = 1, 2, 3`.
///
/// * `n = 1`: no angles, `omega = (+1)`;
/// * `n = 2`: `omega = (cos psi, sin psi)`, `omega_perp = (-sin psi, cos psi)`;
/// * `n = 3`: spherical angles `(polar, azimuth)` with frame
///   `(e_r, e_polar, e_azimuth)`, which is right-handed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereFrame {
    n: usize,
}

impl SphereFrame {
    pub fn new(n: usize) -> Self {
        assert!((1..=3).contains(&n), "sphere frames exist for n in 1..=3");
        SphereFrame { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn angles(&self) -> usize {
        self.n - 1
    }

    pub fn omega(&self, psi: &[f64]) -> Vec<f64> {
        match self.n {
            1 => vec![1.0],
            2 => vec![psi[0].cos(), psi[0].sin()],
            _ => {
                let (t, a) = (psi[0], psi[1]);
                vec![t.sin() * a.cos(), t.sin() * a.sin(), t.cos()]
            }
        }
    }

    /// Orthonormal completion `(omega_1, ..., omega_{n-1})`.
    pub fn perp(&self, psi: &[f64]) -> Vec<Vec<f64>> {
        match self.n {
            1 => vec![],
            2 => vec![vec![-psi[0].sin(), psi[0].cos()]],
            _ => {
                let (t, a) = (psi[0], psi[1]);
                vec![
                    vec![t.cos() * a.cos(), t.cos() * a.sin(), -t.sin()],
                    vec![-a.sin(), a.cos(), 0.0],
                ]
            }
        }
    }

    /// Coordinate derivatives `d omega / d psi_j`.
    ///
    /// For `n = 2` this is `omega_perp`; for `n = 3` the azimuthal derivative
    /// carries the factor `sin(polar)`.
    pub fn d_omega(&self, psi: &[f64]) -> Vec<Vec<f64>> {
        let mut frame = self.perp(psi);
        if self.n == 3 {
            let s = psi[0].sin();
            frame[1].iter_mut().for_each(|v| *v *= s);
        }
        frame
    }

    /// Canonical angles: `psi` in `[0, 2 pi)` for `n = 2`; polar angle in
    /// `[0, pi]` and azimuth in `[0, 2 pi)` for `n = 3`.
    pub fn canonicalize(&self, psi: &mut [f64]) {
        match self.n {
            2 => psi[0] = wrap_angle(psi[0]),
            3 => {
                let mut t = wrap_angle(psi[0]);
                let mut a = psi[1];
                if t > PI {
                    t = 2.0 * PI - t;
                    a += PI;
                }
                psi[0] = t;
                psi[1] = wrap_angle(a);
            }
            _ => {}
        }
    }

    /// Default parameter box for the angles.
    pub fn angle_box(&self) -> Vec<(f64, f64)> {
        match self.n {
            1 => vec![],
            2 => vec![(0.0, 2.0 * PI)],
            _ => vec![(0.0, PI), (0.0, 2.0 * PI)],
        }
    }
}

/// Wraps an azimuthal angle into `[0, 2 pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}
