use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(x, p)` of the cotangent bundle `T*R^n`.
///
/// Space-time points `(x, t; p, -E)` of `T*R^{n+1}` use the same type with
/// one extra slot: the last position is `t` and the last momentum is `-E`,
/// so that `sum p_i dx_i` reproduces `p dx - E dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if x.len() != p.len() {
            return Err(Error::InvalidInput(format!(
                "position has {} entries but momentum has {}",
                x.len(),
                p.len()
            )));
        }
        let z = PhasePoint { x, p };
        if !z.is_finite() {
            return Err(Error::Evaluation {
                what: "phase point".into(),
                at: z.to_vec(),
            });
        }
        Ok(z)
    }

    pub fn zeros(n: usize) -> Self {
        PhasePoint {
            x: vec![0.0; n],
            p: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.p).all(|v| v.is_finite())
    }

    /// Flat `(x_1..x_n, p_1..p_n)` layout.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.p);
        v
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let n = v.len() / 2;
        PhasePoint {
            x: v[..n].to_vec(),
            p: v[n..2 * n].to_vec(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().chain(&self.p).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn momentum_norm(&self) -> f64 {
        self.p.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &PhasePoint) -> PhasePoint {
        PhasePoint {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
            p: self.p.iter().zip(&other.p).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> PhasePoint {
        PhasePoint {
            x: self.x.iter().map(|v| v * s).collect(),
            p: self.p.iter().map(|v| v * s).collect(),
        }
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        self.sub(other).norm()
    }

    /// Drops the trailing `(t, -E)` slot of a space-time point.
    pub fn spatial(&self) -> PhasePoint {
        let n = self.dim() - 1;
        PhasePoint {
            x: self.x[..n].to_vec(),
            p: self.p[..n].to_vec(),
        }
    }
}

/// Canonical symplectic form `sum dp_i ^ dx_i` evaluated on two tangent vectors.
///
/// For space-time vectors this is `dp ^ dx - dE ^ dt` since the last momentum
/// slot carries `-E`.
pub fn symplectic_product(u: &PhasePoint, v: &PhasePoint) -> f64 {
    let a: f64 = u.p.iter().zip(&v.x).map(|(p, x)| p * x).sum();
    let b: f64 = v.p.iter().zip(&u.x).map(|(p, x)| p * x).sum();
    a - b
}

/// Matrix of the symplectic form in the flat `(x, p)` layout of dimension `2n`.
pub fn symplectic_matrix(n: usize) -> nalgebra::DMatrix<f64> {
    let mut omega = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        // omega(e_{p_i}, e_{x_i}) = 1
        omega[(n + i, i)] = 1.0;
        omega[(i, n + i)] = -1.0;
    }
    omega
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(PhasePoint::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(PhasePoint::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn canonical_pair_has_unit_product() {
        let dx = PhasePoint::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let dp = PhasePoint::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(symplectic_product(&dp, &dx), 1.0);
        assert_eq!(symplectic_product(&dx, &dp), -1.0);
        let m = symplectic_matrix(2);
        let u = nalgebra::DVector::from_vec(dp.to_vec());
        let v = nalgebra::DVector::from_vec(dx.to_vec());
        assert_eq!((u.transpose() * m * v)[(0, 0)], 1.0);
    }
}
