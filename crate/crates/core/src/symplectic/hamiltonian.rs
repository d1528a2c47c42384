use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::diff;
use crate::poly::Polynomial;
use crate::symplectic::phase::{dot, norm, PhasePoint};

/// Minimum admissible `|p|` for Hamiltonians that are singular at `p = 0`.
pub const MOMENTUM_FLOOR: f64 = 1e-10;

/// A smooth function `H(x, p)` on `T*R^n` with derivative oracles.
///
/// Gradients and Hessians default to central finite differences; concrete
/// models override them with closed forms.
pub trait Hamiltonian: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn value(&self, x: &[f64], p: &[f64]) -> f64;

    /// `(dH/dx, dH/dp)`.
    fn gradient(&self, x: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        let z: Vec<f64> = x.iter().chain(p).copied().collect();
        let h = diff::first_step(norm(&z));
        let g = diff::gradient(|v| self.value(&v[..n], &v[n..]), &z, h);
        (g[..n].to_vec(), g[n..].to_vec())
    }

    /// Hessian in the flat `(x, p)` layout.
    fn hessian(&self, x: &[f64], p: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let z: Vec<f64> = x.iter().chain(p).copied().collect();
        let h = 1e-5 * (1.0 + norm(&z));
        diff::hessian_from_gradient(
            |v| {
                let (gx, gp) = self.gradient(&v[..n], &v[n..]);
                gx.into_iter().chain(gp).collect()
            },
            &z,
            h,
        )
    }

    /// Declared degree of positive homogeneity in `p`, if any.
    fn homogeneity(&self) -> Option<f64> {
        None
    }

    /// Rejects points where the model is not smooth.
    fn check_domain(&self, _x: &[f64], _p: &[f64]) -> Result<()> {
        Ok(())
    }

    fn has_analytic_gradient(&self) -> bool {
        false
    }
}

pub type SharedHamiltonian = Arc<dyn Hamiltonian>;

/// `H(z)` for a phase point.
pub fn energy(h: &dyn Hamiltonian, z: &PhasePoint) -> f64 {
    h.value(&z.x, &z.p)
}

/// `H = p_k` (zero-based momentum index `k`).
#[derive(Debug, Clone)]
pub struct MomentumComponent {
    name: String,
    index: usize,
}

impl MomentumComponent {
    pub fn new(name: impl Into<String>, index: usize) -> Self {
        MomentumComponent {
            name: name.into(),
            index,
        }
    }
}

impl Hamiltonian for MomentumComponent {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, _x: &[f64], p: &[f64]) -> f64 {
        p[self.index]
    }

    fn gradient(&self, x: &[f64], _p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut gp = vec![0.0; x.len()];
        gp[self.index] = 1.0;
        (vec![0.0; x.len()], gp)
    }

    fn hessian(&self, x: &[f64], _p: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(2 * x.len(), 2 * x.len())
    }

    fn homogeneity(&self) -> Option<f64> {
        Some(1.0)
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }
}

/// Conformal metric Hamiltonian `H = |p|^m / rho(x)`.
///
/// `m = 2` with `rho = 1` is the free Hamiltonian `p^2`.
#[derive(Debug, Clone)]
pub struct Conformal {
    name: String,
    power: f64,
    rho: Polynomial,
    grad_rho: Vec<Polynomial>,
    hess_rho: Vec<Vec<Polynomial>>,
}

impl Conformal {
    pub fn new(name: impl Into<String>, power: f64, rho: Polynomial) -> Result<Self> {
        if !(power > 0.0) {
            return Err(Error::InvalidInput(format!(
                "homogeneity degree must be positive, got {power}"
            )));
        }
        let grad_rho = rho.gradient();
        let hess_rho = grad_rho.iter().map(Polynomial::gradient).collect();
        Ok(Conformal {
            name: name.into(),
            power,
            rho,
            grad_rho,
            hess_rho,
        })
    }

    pub fn rho(&self) -> &Polynomial {
        &self.rho
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    fn rho_jet(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.rho.eval(x), self.grad_rho.iter().map(|g| g.eval(x)).collect())
    }
}

impl Hamiltonian for Conformal {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, x: &[f64], p: &[f64]) -> f64 {
        norm(p).powf(self.power) / self.rho.eval(x)
    }

    fn gradient(&self, x: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.power;
        let (r, dr) = self.rho_jet(x);
        let a = norm(p);
        let am = a.powf(m);
        let gx = dr.iter().map(|d| -am * d / (r * r)).collect();
        let coef = if a == 0.0 { 0.0 } else { m * a.powf(m - 2.0) / r };
        let gp = p.iter().map(|v| coef * v).collect();
        (gx, gp)
    }

    fn hessian(&self, x: &[f64], p: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let m = self.power;
        let (r, dr) = self.rho_jet(x);
        let a = norm(p);
        let am = a.powf(m);
        let amm2 = if a == 0.0 { 0.0 } else { a.powf(m - 2.0) };
        let mut hm = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let d2 = self.hess_rho[i][j].eval(x);
                hm[(i, j)] = -am * (d2 / (r * r) - 2.0 * dr[i] * dr[j] / (r * r * r));
                let xp = -m * amm2 * p[j] * dr[i] / (r * r);
                hm[(i, n + j)] = xp;
                hm[(n + j, i)] = xp;
                let delta = if i == j { 1.0 } else { 0.0 };
                let proj = if a == 0.0 { 0.0 } else { p[i] * p[j] / (a * a) };
                hm[(n + i, n + j)] = m * amm2 / r * (delta + (m - 2.0) * proj);
            }
        }
        hm
    }

    fn homogeneity(&self) -> Option<f64> {
        Some(self.power)
    }

    fn check_domain(&self, x: &[f64], p: &[f64]) -> Result<()> {
        if self.power < 2.0 && norm(p) < MOMENTUM_FLOOR {
            return Err(Error::Domain {
                reason: format!("|p| < {MOMENTUM_FLOOR:e} for |p|^{} Hamiltonian", self.power),
                at: x.iter().chain(p).copied().collect(),
            });
        }
        let r = self.rho.eval(x);
        if !(r > 0.0) {
            return Err(Error::Domain {
                reason: format!("conformal factor rho = {r} is not positive"),
                at: x.iter().chain(p).copied().collect(),
            });
        }
        Ok(())
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }
}

type ValueFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// Closure-backed Hamiltonian; the gradient is optional.
pub struct FnHamiltonian {
    name: String,
    value: Box<ValueFn>,
    gradient: Option<Box<GradFn>>,
    degree: Option<f64>,
}

impl fmt::Debug for FnHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnHamiltonian")
            .field("name", &self.name)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("degree", &self.degree)
            .finish()
    }
}

impl FnHamiltonian {
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        FnHamiltonian {
            name: name.into(),
            value: Box::new(value),
            gradient: None,
            degree: None,
        }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        self.gradient = Some(Box::new(g));
        self
    }

    pub fn with_homogeneity(mut self, m: f64) -> Self {
        self.degree = Some(m);
        self
    }
}

impl Hamiltonian for FnHamiltonian {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, x: &[f64], p: &[f64]) -> f64 {
        (self.value)(x, p)
    }

    fn gradient(&self, x: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match &self.gradient {
            Some(g) => g(x, p),
            None => {
                let n = x.len();
                let z: Vec<f64> = x.iter().chain(p).copied().collect();
                let h = diff::first_step(norm(&z));
                let g = diff::gradient(|v| (self.value)(&v[..n], &v[n..]), &z, h);
                (g[..n].to_vec(), g[n..].to_vec())
            }
        }
    }

    fn homogeneity(&self) -> Option<f64> {
        self.degree
    }

    fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

/// Names accepted by [`from_registry`].
pub const REGISTRY: [&str; 5] = ["pn", "free", "py", "conformal1", "conformal2"];

/// Built-in Hamiltonians on `T*R^n`.
///
/// `rho` is required by the conformal models and defaults to `1`.
pub fn from_registry(name: &str, n: usize, rho: Option<Polynomial>) -> Result<SharedHamiltonian> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidInput(format!("dimension {n} not in 1..=3")));
    }
    let rho = match rho {
        Some(r) if r.nvars() != n => {
            return Err(Error::InvalidInput(format!(
                "rho has {} variables, expected {n}",
                r.nvars()
            )))
        }
        Some(r) => r,
        None => Polynomial::constant(n, 1.0),
    };
    Ok(match name {
        "pn" => Arc::new(MomentumComponent::new("pn", n - 1)),
        "py" => {
            if n < 2 {
                return Err(Error::InvalidInput("py needs n >= 2".into()));
            }
            Arc::new(MomentumComponent::new("py", 1))
        }
        "free" => Arc::new(Conformal::new("free", 2.0, Polynomial::constant(n, 1.0))?),
        "conformal1" => Arc::new(Conformal::new("conformal1", 1.0, rho)?),
        "conformal2" => Arc::new(Conformal::new("conformal2", 2.0, rho)?),
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown Hamiltonian `{other}` (known: {})",
                REGISTRY.join(", ")
            )))
        }
    })
}

/// Relative residual of the Euler identity `<p, dH/dp> = m H` at `(x, p)`.
pub fn euler_residual(h: &dyn Hamiltonian, x: &[f64], p: &[f64]) -> Option<f64> {
    let m = h.homogeneity()?;
    let (_, gp) = h.gradient(x, p);
    let lhs = dot(p, &gp);
    let rhs = m * h.value(x, p);
    Some((lhs - rhs).abs() / (1.0 + rhs.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::position_names;

    fn rho2() -> Polynomial {
        Polynomial::parse("1+x^2+y^2", &position_names(2)).unwrap()
    }

    #[test]
    fn conformal_gradient_matches_finite_differences() {
        for m in [1.0, 2.0] {
            let h = Conformal::new("c", m, rho2()).unwrap();
            let x = [0.3, -0.7];
            let p = [0.8, 0.4];
            let (gx, gp) = h.gradient(&x, &p);
            let fd = FnHamiltonian::new("fd", move |x, p| Conformal::new("c", m, rho2()).unwrap().value(x, p));
            let (fx, fp) = fd.gradient(&x, &p);
            for (a, b) in gx.iter().chain(&gp).zip(fx.iter().chain(&fp)) {
                assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn conformal_hessian_matches_finite_differences() {
        let h = Conformal::new("c", 1.0, rho2()).unwrap();
        let x = [0.3, -0.7];
        let p = [0.8, 0.4];
        let exact = h.hessian(&x, &p);
        let z: Vec<f64> = x.iter().chain(&p).copied().collect();
        let fd = diff::hessian_from_gradient(
            |v| {
                let (a, b) = h.gradient(&v[..2], &v[2..]);
                a.into_iter().chain(b).collect()
            },
            &z,
            1e-5,
        );
        assert!((exact - fd).amax() < 1e-8);
    }

    #[test]
    fn registry_rejects_unknown_names() {
        assert!(from_registry("nope", 2, None).is_err());
        assert!(from_registry("conformal1", 4, None).is_err());
        let h = from_registry("pn", 2, None).unwrap();
        assert_eq!(h.value(&[0.0, 0.0], &[3.0, 5.0]), 5.0);
    }

    #[test]
    fn singular_momentum_is_rejected() {
        let h = from_registry("conformal1", 2, None).unwrap();
        assert!(h.check_domain(&[0.0, 0.0], &[0.0, 1e-12]).is_err());
        assert!(h.check_domain(&[0.0, 0.0], &[0.0, 1.0]).is_ok());
        let free = from_registry("free", 2, None).unwrap();
        assert!(free.check_domain(&[0.0, 0.0], &[0.0, 0.0]).is_ok());
    }
}
