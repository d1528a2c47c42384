//! Bessel functions `J_0`, `J_1` of real argument.
//!
//! Miller's backward recurrence below `ASYMPTOTIC_FROM`, Hankel's asymptotic
//! expansion above it.

use std::f64::consts::PI;

const ASYMPTOTIC_FROM: f64 = 25.0;

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < ASYMPTOTIC_FROM {
        miller(ax).0
    } else {
        hankel(0.0, ax)
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < ASYMPTOTIC_FROM {
        miller(ax).1
    } else {
        hankel(1.0, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `(J_0(x), J_1(x))` for `0 <= x < 25`, normalised by
/// `1 = J_0 + 2 (J_2 + J_4 + ...)`.
fn miller(x: f64) -> (f64, f64) {
    if x < 1e-8 {
        return (1.0 - 0.25 * x * x, 0.5 * x);
    }
    let start = 2 * ((x + 30.0 + 12.0 * x.cbrt()) as usize / 2);
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let mut sum = 0.0;
    let (mut j0, mut j1) = (0.0, 0.0);
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            sum *= 1e-250;
            j1 *= 1e-250;
        }
        // j now holds J_{k-1}
        if k == 2 {
            j1 = j;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            sum += 2.0 * j;
        }
        if k == 1 {
            j0 = j;
        }
    }
    let norm = sum + j0;
    (j0 / norm, j1 / norm)
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let z = 8.0 * x;
    let (mut p, mut q) = (0.0, 0.0);
    let mut term = 1.0f64;
    let mut k = 0usize;
    let mut last = f64::INFINITY;
    loop {
        if term.abs() >= last || term.abs() < 1e-17 {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        k += 1;
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * z);
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(nu: i32, x: f64) -> f64 {
        let mut term = (0.5 * x).powi(nu);
        let mut s = 0.0;
        for k in 0..60 {
            s += term;
            let k1 = (k + 1) as f64;
            term *= -(0.25 * x * x) / (k1 * (k1 + nu as f64));
        }
        s
    }

    #[test]
    fn small_arguments_match_the_power_series() {
        for &x in &[0.0, 1e-9, 0.3, 1.0, 2.5, 4.0] {
            assert!((bessel_j0(x) - series(0, x)).abs() < 1e-14, "{x}");
            assert!((bessel_j1(x) - series(1, x)).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn parity() {
        assert_eq!(bessel_j0(-3.2), bessel_j0(3.2));
        assert_eq!(bessel_j1(-3.2), -bessel_j1(3.2));
        assert_eq!(bessel_j1(0.0), 0.0);
    }

    #[test]
    fn branches_agree_at_the_switch() {
        let a = miller(ASYMPTOTIC_FROM);
        assert!((a.0 - hankel(0.0, ASYMPTOTIC_FROM)).abs() < 1e-13);
        assert!((a.1 - hankel(1.0, ASYMPTOTIC_FROM)).abs() < 1e-13);
    }
}
