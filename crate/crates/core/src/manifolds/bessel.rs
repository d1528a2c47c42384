//! The Bessel cylinder `{x = phi omega(psi) + a, p = omega(psi)}` and two
//! flat model manifolds.

use crate::error::{Error, Result};
use crate::manifolds::chart::ManifoldChart;
use crate::manifolds::sphere::SphereFrame;
use crate::symplectic::phase::{dot, PhasePoint};

/// `(phi omega(psi), omega(psi))`.
pub fn bessel_point(phi: f64, psi: &[f64]) -> PhasePoint {
    let frame = SphereFrame::new(psi.len() + 1);
    let w = frame.omega(psi);
    PhasePoint {
        x: w.iter().map(|v| phi * v).collect(),
        p: w,
    }
}

/// Tangent basis of the cylinder: `(omega, 0)` for `phi` and
/// `(phi d_j omega, d_j omega)` for each angle.
pub fn tangent_frame_bessel(phi: f64, psi: &[f64]) -> Vec<PhasePoint> {
    let frame = SphereFrame::new(psi.len() + 1);
    let w = frame.omega(psi);
    let n = w.len();
    let mut out = vec![PhasePoint { x: w, p: vec![0.0; n] }];
    for d in frame.d_omega(psi) {
        out.push(PhasePoint {
            x: d.iter().map(|v| phi * v).collect(),
            p: d,
        });
    }
    out
}

#[derive(Debug, Clone)]
pub struct BesselCylinder {
    frame: SphereFrame,
    offset: Vec<f64>,
    phi_range: (f64, f64),
}

impl BesselCylinder {
    pub fn new(n: usize) -> Self {
        BesselCylinder {
            frame: SphereFrame::new(n),
            offset: vec![0.0; n],
            phi_range: (-2.0, 2.0),
        }
    }

    /// Cylinder around a shifted source, `x = a + phi omega(psi)`.
    pub fn shifted(offset: Vec<f64>) -> Self {
        let n = offset.len();
        BesselCylinder {
            frame: SphereFrame::new(n),
            offset,
            phi_range: (-2.0, 2.0),
        }
    }

    pub fn with_phi_range(mut self, lo: f64, hi: f64) -> Self {
        self.phi_range = (lo, hi);
        self
    }

    pub fn n(&self) -> usize {
        self.frame.dim()
    }

    pub fn frame(&self) -> SphereFrame {
        self.frame
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn point(&self, phi: f64, psi: &[f64]) -> PhasePoint {
        let mut z = bessel_point(phi, psi);
        z.x.iter_mut().zip(&self.offset).for_each(|(x, a)| *x += a);
        z
    }
}

impl ManifoldChart for BesselCylinder {
    fn param_names(&self) -> Vec<String> {
        let mut v = vec!["phi".to_string()];
        match self.frame.angles() {
            0 => {}
            1 => v.push("psi".into()),
            k => v.extend((1..=k).map(|i| format!("psi{i}"))),
        }
        v
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        let mut d = vec![self.phi_range];
        d.extend(self.frame.angle_box());
        d
    }

    fn embed(&self, u: &[f64]) -> Result<PhasePoint> {
        if u.len() != self.frame.dim() {
            return Err(Error::InvalidInput(format!(
                "Bessel chart takes {} parameters, got {}",
                self.frame.dim(),
                u.len()
            )));
        }
        Ok(self.point(u[0], &u[1..]))
    }

    /// `p dx = d phi` on the cylinder.
    fn eikonal(&self, u: &[f64]) -> Result<Option<f64>> {
        Ok(Some(u[0]))
    }

    fn tangents(&self, u: &[f64]) -> Result<Vec<PhasePoint>> {
        Ok(tangent_frame_bessel(u[0], &u[1..]))
    }
}

/// The vertical fibre `{x = 0}` parametrised by `p`.
#[derive(Debug, Clone)]
pub struct VerticalFiber {
    n: usize,
    range: (f64, f64),
}

impl VerticalFiber {
    pub fn new(n: usize, range: (f64, f64)) -> Self {
        VerticalFiber { n, range }
    }
}

impl ManifoldChart for VerticalFiber {
    fn param_names(&self) -> Vec<String> {
        (1..=self.n).map(|i| format!("p{i}")).collect()
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        vec![self.range; self.n]
    }

    fn embed(&self, u: &[f64]) -> Result<PhasePoint> {
        Ok(PhasePoint {
            x: vec![0.0; self.n],
            p: u.to_vec(),
        })
    }

    fn eikonal(&self, _u: &[f64]) -> Result<Option<f64>> {
        Ok(Some(0.0))
    }
}

/// The plane `{p = p0}` parametrised by `x`; the eikonal is `<p0, x>`.
#[derive(Debug, Clone)]
pub struct PlaneWave {
    momentum: Vec<f64>,
    range: (f64, f64),
}

impl PlaneWave {
    pub fn new(momentum: Vec<f64>, range: (f64, f64)) -> Self {
        PlaneWave { momentum, range }
    }
}

impl ManifoldChart for PlaneWave {
    fn param_names(&self) -> Vec<String> {
        ["x", "y", "z"][..self.momentum.len()]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        vec![self.range; self.momentum.len()]
    }

    fn embed(&self, u: &[f64]) -> Result<PhasePoint> {
        Ok(PhasePoint {
            x: u.to_vec(),
            p: self.momentum.clone(),
        })
    }

    fn eikonal(&self, u: &[f64]) -> Result<Option<f64>> {
        Ok(Some(dot(&self.momentum, u)))
    }

    fn tangents(&self, _u: &[f64]) -> Result<Vec<PhasePoint>> {
        let n = self.momentum.len();
        Ok((0..n)
            .map(|j| {
                let mut x = vec![0.0; n];
                x[j] = 1.0;
                PhasePoint { x, p: vec![0.0; n] }
            })
            .collect())
    }
}
