//! Scalar root finding.

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<F>(f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1 * xm.signum() };
        fb = f(b);
    }
    Some(b)
}

/// Scans `[lo, hi]` on a uniform grid of `n` cells and polishes every sign
/// change with Brent's method.
pub fn all_roots<F>(f: F, lo: f64, hi: f64, n: usize, xtol: f64) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let mut roots = Vec::new();
    let dx = (hi - lo) / n as f64;
    let mut xa = lo;
    let mut fa = f(xa);
    for k in 1..=n {
        let xb = lo + dx * k as f64;
        let fb = f(xb);
        if fa == 0.0 {
            roots.push(xa);
        } else if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() && fb != 0.0 {
            if let Some(r) = brent(&f, xa, xb, xtol, 200) {
                roots.push(r);
            }
        }
        xa = xb;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(xa);
    }
    roots
}
