//! Adaptive Gauss-Kronrod quadrature of complex integrands, a Filon-type rule
//! for `B(t) exp(i psi(t) / h)`, and the cutoff `Theta_{t0}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 7/15-point Gauss-Kronrod panel: `(kronrod, |kronrod - gauss|)`.
pub fn gk15<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let d = r * XGK[j];
        let s = f(c - d) + f(c + d);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * r, ((k - g) * r).norm())
}

/// Smooth step: `1` on `(-inf, 0]`, `0` on `[1, inf)`, `C^inf` in between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let g = |u: f64| (-1.0 / u).exp();
    let (a, b) = (g(1.0 - s), g(s));
    a / (a + b)
}

/// `Theta_{t0}`: `1` on `[0, t0]`, `0` on `[2 t0, inf)`.
pub fn cutoff(t: f64, t0: f64) -> f64 {
    smooth_step((t - t0) / t0)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_panels: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
    pub filon_panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    filon: bool,
}

fn adaptive<R>(rule: R, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    R: Fn(f64, f64) -> (Complex64, f64, bool),
{
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (value, error, filon) = rule(w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                value,
                error,
                filon,
            }
        })
        .collect();
    loop {
        let total: Complex64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            return Ok(QuadResult {
                value: total,
                error: err,
                panels: panels.len(),
                filon_panels: panels.iter().filter(|p| p.filon).count(),
            });
        }
        let (iw, worst) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, p)| (i, (p.a, p.b)))
            .expect("at least one panel");
        let m = 0.5 * (worst.0 + worst.1);
        if panels.len() >= opts.max_panels || !(m > worst.0 && m < worst.1) {
            return Err(Error::Integration {
                reason: format!("quadrature did not converge (error estimate {err:e})"),
                last_time: worst.0,
            });
        }
        let halves = [(worst.0, m), (m, worst.1)].map(|(a, b)| {
            let (value, error, filon) = rule(a, b);
            Panel {
                a,
                b,
                value,
                error,
                filon,
            }
        });
        let [p, q] = halves;
        panels[iw] = p;
        panels.push(q);
    }
}

/// Adaptive GK15 over `[a, b]` split at the sorted interior `breaks`.
pub fn integrate<F>(f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let pts = break_points(a, b, breaks)?;
    adaptive(
        |x, y| {
            let (v, e) = gk15(&f, x, y);
            (v, e, false)
        },
        &pts,
        opts,
    )
}

fn break_points(a: f64, b: f64, breaks: &[f64]) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidInput(format!("bad interval [{a}, {b}]")));
    }
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|t| *t > a && *t < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// Local oscillation count `omega (b - a)` above which a panel is treated
/// by the Filon rule.
pub const FILON_THRESHOLD: f64 = 20.0;

const FILON_LOW: usize = 9;
const FILON_HIGH: usize = 13;

/// `M_j = int_{-1}^{1} u^j e^{i w u} du`, `j <= n`, by upward recurrence
/// (stable for `|w| > n`).
fn moments(w: f64, n: usize) -> Vec<Complex64> {
    let iw = Complex64::new(0.0, w);
    let (ep, em) = (Complex64::from_polar(1.0, w), Complex64::from_polar(1.0, -w));
    let mut m = Vec::with_capacity(n + 1);
    m.push(Complex64::new(2.0 * w.sin() / w, 0.0));
    for j in 1..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let v = (ep - em * sign) / iw - m[j - 1] * (j as f64) / iw;
        m.push(v);
    }
    m
}

/// `int_{-1}^{1} g(u) e^{i w u} du` with `g` interpolated on `n` Chebyshev points.
fn filon_panel<G>(g: &G, w: f64, n: usize) -> Complex64
where
    G: Fn(f64) -> Complex64,
{
    let nodes: Vec<f64> = (0..n)
        .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos())
        .collect();
    let v = DMatrix::from_fn(n, n, |i, j| nodes[i].powi(j as i32));
    let lu = v.lu();
    let vals: Vec<Complex64> = nodes.iter().map(|&u| g(u)).collect();
    let re = lu.solve(&DVector::from_iterator(n, vals.iter().map(|z| z.re)));
    let im = lu.solve(&DVector::from_iterator(n, vals.iter().map(|z| z.im)));
    let (Some(re), Some(im)) = (re, im) else {
        return Complex64::new(f64::NAN, f64::NAN);
    };
    let m = moments(w, n - 1);
    (0..n).map(|j| Complex64::new(re[j], im[j]) * m[j]).sum()
}

/// Adaptive quadrature of `amp(t) exp(i psi(t) / h)` on `[a, b]`.
///
/// Panels on which `|psi'| (b - a) / h` exceeds [`FILON_THRESHOLD`] use a
/// Filon rule against the local linear phase; the rest use GK15.
pub fn oscillatory<A, P>(
    amp: A,
    psi: P,
    h: f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult>
where
    A: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
    }
    let pts = break_points(a, b, breaks)?;
    let f = |t: f64| Complex64::from_polar(amp(t), psi(t) / h);
    let rule = |x: f64, y: f64| -> (Complex64, f64, bool) {
        let c = 0.5 * (x + y);
        let r = 0.5 * (y - x);
        let d = 1e-6 * (1.0 + c.abs());
        let slope = (psi(c + d) - psi(c - d)) / (2.0 * d);
        let w = slope * r / h;
        if 2.0 * w.abs() <= FILON_THRESHOLD {
            let (v, e) = gk15(&f, x, y);
            return (v, e, false);
        }
        let pc = psi(c);
        let g = |u: f64| {
            let t = c + r * u;
            Complex64::from_polar(amp(t), (psi(t) - pc - slope * r * u) / h)
        };
        let lo = filon_panel(&g, w, FILON_LOW);
        let hi = filon_panel(&g, w, FILON_HIGH);
        let scale = Complex64::from_polar(r, pc / h);
        let err = ((hi - lo) * r).norm();
        if !err.is_finite() {
            let (v, e) = gk15(&f, x, y);
            return (v, e, false);
        }
        (hi * scale, err, true)
    };
    adaptive(rule, &pts, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let r = integrate(
            |t| Complex64::new(t.powi(5) - 3.0 * t * t, t),
            0.0,
            2.0,
            &[],
            QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value.re - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert!((r.value.im - 2.0).abs() < 1e-13);
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0, 1.0), 1.0);
        assert_eq!(cutoff(1.0, 1.0), 1.0);
        assert_eq!(cutoff(2.0, 1.0), 0.0);
        assert!((cutoff(1.5, 1.0) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for k in 0..=100 {
            let v = cutoff(1.0 + k as f64 / 100.0, 1.0);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let w = 37.0;
        let m = moments(w, 12);
        for (j, mj) in m.iter().enumerate() {
            let q = integrate(
                |u| Complex64::from_polar(u.powi(j as i32), w * u),
                -1.0,
                1.0,
                &[],
                QuadOptions::default(),
            )
            .unwrap();
            assert!((q.value - mj).norm() < 1e-12, "{j}");
        }
    }

    #[test]
    fn filon_handles_fast_linear_phase() {
        let h = 1e-3;
        let r = oscillatory(|t| (-t * t).exp(), |t| t, h, -1.0, 1.0, &[], QuadOptions::default()).unwrap();
        let plain = integrate(
            |t| Complex64::from_polar((-t * t).exp(), t / h),
            -1.0,
            1.0,
            &[],
            QuadOptions {
                max_panels: 200_000,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.filon_panels > 0);
        assert!(
            (r.value - plain.value).norm() < 1e-12,
            "{:?} {:?}",
            r.value,
            plain.value
        );
        assert!(r.panels < plain.panels);
    }
}
