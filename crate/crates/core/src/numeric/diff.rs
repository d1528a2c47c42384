//! Central finite differences.

use nalgebra::DMatrix;

/// Step used for first derivatives, `1e-6 * (1 + |z|)`.
pub fn first_step(scale: f64) -> f64 {
    1e-6 * (1.0 + scale)
}

/// Outer step for nested brackets (double differencing loses about half the digits).
pub const NESTED_STEP: f64 = 1e-4;

pub fn gradient<F>(f: F, at: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut work = at.to_vec();
    (0..at.len())
        .map(|i| {
            let orig = work[i];
            work[i] = orig + step;
            let fp = f(&work);
            work[i] = orig - step;
            let fm = f(&work);
            work[i] = orig;
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Jacobian `J[i][j] = d f_i / d z_j` of a vector map.
pub fn jacobian<F>(f: F, at: &[f64], step: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut work = at.to_vec();
    let mut cols = Vec::with_capacity(at.len());
    for j in 0..at.len() {
        let orig = work[j];
        work[j] = orig + step;
        let fp = f(&work);
        work[j] = orig - step;
        let fm = f(&work);
        work[j] = orig;
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect::<Vec<_>>(),
        );
    }
    let rows = cols.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, at.len(), |i, j| cols[j][i])
}

/// Fallible variant of [`jacobian`].
pub fn try_jacobian<F, E>(f: F, at: &[f64], step: f64) -> Result<DMatrix<f64>, E>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
{
    let mut work = at.to_vec();
    let mut cols = Vec::with_capacity(at.len());
    for j in 0..at.len() {
        let orig = work[j];
        work[j] = orig + step;
        let fp = f(&work)?;
        work[j] = orig - step;
        let fm = f(&work)?;
        work[j] = orig;
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect::<Vec<_>>(),
        );
    }
    let rows = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows, at.len(), |i, j| cols[j][i]))
}

/// Symmetrised Hessian from a gradient oracle.
pub fn hessian_from_gradient<G>(grad: G, at: &[f64], step: f64) -> DMatrix<f64>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let j = jacobian(grad, at, step);
    (&j + j.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quadratic() {
        let g = gradient(|z| z[0] * z[0] + 3.0 * z[0] * z[1], &[1.0, 2.0], 1e-6);
        assert!((g[0] - 8.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn jacobian_shape() {
        let j = jacobian(|z| vec![z[0] * z[1], z[1], z[0] + z[2]], &[2.0, 3.0, 1.0], 1e-6);
        assert_eq!(j.shape(), (3, 3));
        assert!((j[(0, 0)] - 3.0).abs() < 1e-8);
        assert!((j[(0, 1)] - 2.0).abs() < 1e-8);
        assert!((j[(2, 2)] - 1.0).abs() < 1e-8);
    }
}
