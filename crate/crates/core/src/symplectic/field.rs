use std::fmt;
use std::sync::Arc;

use crate::numeric::diff;
use crate::poly::Polynomial;
use crate::symplectic::phase::PhasePoint;

/// A scalar function on phase space, `f(x, p)`.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn value(&self, z: &PhasePoint) -> f64;

    /// `(df/dx, df/dp)`; finite differences unless overridden.
    fn gradient(&self, z: &PhasePoint) -> (Vec<f64>, Vec<f64>) {
        fd_gradient(self, z, diff::first_step(z.norm()))
    }
}

pub type SharedField = Arc<dyn ScalarField>;

pub(crate) fn fd_gradient<F: ScalarField + ?Sized>(f: &F, z: &PhasePoint, step: f64) -> (Vec<f64>, Vec<f64>) {
    let n = z.dim();
    let g = diff::gradient(|v| f.value(&PhasePoint::from_slice(v)), &z.to_vec(), step);
    (g[..n].to_vec(), g[n..].to_vec())
}

/// Polynomial in the flat `(x_1..x_n, p_1..p_n)` variables.
#[derive(Debug, Clone)]
pub struct PolyField {
    poly: Polynomial,
    grad: Vec<Polynomial>,
}

impl PolyField {
    pub fn new(poly: Polynomial) -> Self {
        let grad = poly.gradient();
        PolyField { poly, grad }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }
}

impl ScalarField for PolyField {
    fn value(&self, z: &PhasePoint) -> f64 {
        self.poly.eval(&z.to_vec())
    }

    fn gradient(&self, z: &PhasePoint) -> (Vec<f64>, Vec<f64>) {
        let v = z.to_vec();
        let n = z.dim();
        let g: Vec<f64> = self.grad.iter().map(|d| d.eval(&v)).collect();
        (g[..n].to_vec(), g[n..].to_vec())
    }
}

type FieldFn = dyn Fn(&PhasePoint) -> f64 + Send + Sync;

/// Closure-backed field with finite-difference derivatives.
pub struct FnField {
    label: String,
    f: Box<FieldFn>,
}

impl FnField {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&PhasePoint) -> f64 + Send + Sync + 'static,
    {
        FnField {
            label: label.into(),
            f: Box::new(f),
        }
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnField({})", self.label)
    }
}

impl ScalarField for FnField {
    fn value(&self, z: &PhasePoint) -> f64 {
        (self.f)(z)
    }
}

/// A Hamiltonian viewed as a phase-space field.
#[derive(Debug, Clone)]
pub struct HamiltonianField(pub crate::symplectic::hamiltonian::SharedHamiltonian);

impl ScalarField for HamiltonianField {
    fn value(&self, z: &PhasePoint) -> f64 {
        self.0.value(&z.x, &z.p)
    }

    fn gradient(&self, z: &PhasePoint) -> (Vec<f64>, Vec<f64>) {
        self.0.gradient(&z.x, &z.p)
    }
}
