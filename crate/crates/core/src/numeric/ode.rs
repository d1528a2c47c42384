//! Dormand–Prince 5(4) with continuous output and event location.

use crate::error::{Error, Result};

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeSystem {
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl<F> OdeSystem for F
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        self(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Tolerance {
    pub fn new(tol: f64) -> Self {
        Tolerance {
            rtol: tol,
            atol: tol,
            max_steps: 1_000_000,
        }
    }
}

// Butcher tableau (Dormand & Prince 1980) and the dense-output weights of
// Hairer, Norsett & Wanner.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step, with its continuous extension.
#[derive(Debug, Clone)]
pub struct Step {
    pub t0: f64,
    pub h: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    rcont: [Vec<f64>; 5],
}

impl Step {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Fourth-order interpolant at `t` within the step.
    pub fn dense(&self, t: f64) -> Vec<f64> {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        (0..self.y0.len())
            .map(|i| {
                self.rcont[0][i]
                    + th * (self.rcont[1][i]
                        + th1 * (self.rcont[2][i] + th * (self.rcont[3][i] + th1 * self.rcont[4][i])))
            })
            .collect()
    }
}

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Stages {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }
}

/// Takes one RK step of size `h` from `(t, y)` with `k[0] = f(t, y)` already
/// filled; returns the new state and writes the error estimate into `err`.
fn rk_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64],
    h: f64,
    st: &mut Stages,
    err: &mut [f64],
) -> Result<Vec<f64>> {
    let n = y.len();
    macro_rules! stage {
        ($dst:expr, $c:expr, [$(($a:expr, $j:expr)),*]) => {{
            for i in 0..n {
                st.tmp[i] = y[i] + h * (0.0 $(+ $a * st.k[$j][i])*);
            }
            let (head, tail) = st.k.split_at_mut($dst);
            let _ = head;
            sys.rhs(t + $c * h, &st.tmp, &mut tail[0])?;
        }};
    }
    stage!(1, C2, [(A21, 0)]);
    stage!(2, C3, [(A31, 0), (A32, 1)]);
    stage!(3, C4, [(A41, 0), (A42, 1), (A43, 2)]);
    stage!(4, C5, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
    stage!(5, 1.0, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
    let y1: Vec<f64> = (0..n)
        .map(|i| {
            y[i] + h * (A71 * st.k[0][i] + A73 * st.k[2][i] + A74 * st.k[3][i] + A75 * st.k[4][i] + A76 * st.k[5][i])
        })
        .collect();
    sys.rhs(t + h, &y1, &mut st.k[6])?;
    for i in 0..n {
        err[i] = h
            * (E1 * st.k[0][i]
                + E3 * st.k[2][i]
                + E4 * st.k[3][i]
                + E5 * st.k[4][i]
                + E6 * st.k[5][i]
                + E7 * st.k[6][i]);
    }
    if y1.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration {
            reason: "solution blew up".into(),
            last_time: t,
        });
    }
    Ok(y1)
}

fn dense_coefficients(y: &[f64], y1: &[f64], h: f64, st: &Stages) -> [Vec<f64>; 5] {
    let n = y.len();
    let r1 = y.to_vec();
    let r2: Vec<f64> = (0..n).map(|i| y1[i] - y[i]).collect();
    let r3: Vec<f64> = (0..n).map(|i| h * st.k[0][i] - r2[i]).collect();
    let r4: Vec<f64> = (0..n).map(|i| r2[i] - h * st.k[6][i] - r3[i]).collect();
    let r5: Vec<f64> = (0..n)
        .map(|i| {
            h * (D1 * st.k[0][i]
                + D3 * st.k[2][i]
                + D4 * st.k[3][i]
                + D5 * st.k[4][i]
                + D6 * st.k[5][i]
                + D7 * st.k[6][i])
        })
        .collect();
    [r1, r2, r3, r4, r5]
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], tol: &Tolerance) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sk = tol.atol + tol.rtol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates from `t0` to `t1` (either direction), calling `observer` after
/// every accepted step. The observer may stop the integration early by
/// returning `false`.
pub fn integrate_observed<S, O>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t1: f64,
    tol: &Tolerance,
    mut observer: O,
) -> Result<Vec<f64>>
where
    S: OdeSystem + ?Sized,
    O: FnMut(&Step) -> Result<bool>,
{
    let n = y0.len();
    if t1 == t0 {
        return Ok(y0.to_vec());
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut st = Stages::new(n);
    let mut err = vec![0.0; n];
    let mut t = t0;
    let mut y = y0.to_vec();
    sys.rhs(t, &y, &mut st.k[0])?;

    // Initial step guess (Hairer's heuristic, simplified).
    let d0 = norm_scaled(&y, &y, tol);
    let d1 = norm_scaled(&st.k[0], &y, tol);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span) * dir;

    let h_min = 1e-14 * (1.0 + t0.abs().max(t1.abs()));
    let mut steps = 0usize;
    let mut reject_prev = false;
    loop {
        if steps >= tol.max_steps {
            return Err(Error::Integration {
                reason: "too many steps".into(),
                last_time: t,
            });
        }
        steps += 1;
        let last = (t + h - t1) * dir >= 0.0;
        if last {
            h = t1 - t;
        }
        let y1 = rk_step(sys, t, &y, h, &mut st, &mut err).map_err(|e| match e {
            Error::Integration { reason, .. } => Error::Integration { reason, last_time: t },
            other => other,
        })?;
        let en = error_norm(&err, &y, &y1, tol);
        if en <= 1.0 {
            let rcont = dense_coefficients(&y, &y1, h, &st);
            let step = Step {
                t0: t,
                h,
                y0: y.clone(),
                y1: y1.clone(),
                rcont,
            };
            t = if last { t1 } else { t + h };
            y = y1;
            st.k.swap(0, 6);
            if !observer(&step)? || last {
                return Ok(y);
            }
            let fac = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            };
            let fac = if reject_prev { fac.min(1.0) } else { fac };
            reject_prev = false;
            h *= fac;
        } else {
            reject_prev = true;
            h *= (0.9 * en.powf(-0.2)).clamp(0.1, 1.0);
            if h.abs() < h_min {
                return Err(Error::Integration {
                    reason: "step size underflow".into(),
                    last_time: t,
                });
            }
        }
    }
}

fn norm_scaled(v: &[f64], y: &[f64], tol: &Tolerance) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter()
        .zip(y)
        .map(|(a, b)| (a / (tol.atol + tol.rtol * b.abs())).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

pub fn integrate<S: OdeSystem + ?Sized>(sys: &S, t0: f64, y0: &[f64], t1: f64, tol: &Tolerance) -> Result<Vec<f64>> {
    integrate_observed(sys, t0, y0, t1, tol, |_| Ok(true))
}

/// Integrates until `event(t, y)` changes sign or `t_end` is reached.
///
/// The returned state at an event is produced by a genuine RK step from the
/// last accepted node (not the interpolant), polished by a few secant
/// iterations on the event function.
pub fn integrate_to_event<S, G>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    tol: &Tolerance,
    event: G,
) -> Result<Option<(f64, Vec<f64>)>>
where
    S: OdeSystem + ?Sized,
    G: Fn(f64, &[f64]) -> f64,
{
    let g0 = event(t0, y0);
    if g0 == 0.0 {
        return Ok(Some((t0, y0.to_vec())));
    }
    let mut hit: Option<Step> = None;
    integrate_observed(sys, t0, y0, t_end, tol, |step| {
        let g1 = event(step.t1(), &step.y1);
        if g1 == 0.0 || g1.signum() != event(step.t0, &step.y0).signum() {
            hit = Some(step.clone());
            return Ok(false);
        }
        Ok(true)
    })?;
    let Some(step) = hit else {
        return Ok(None);
    };

    // Bracket on the interpolant.
    let (mut a, mut b) = (step.t0, step.t1());
    let mut ga = event(a, &step.y0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = event(m, &step.dense(m));
        if gm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    let mut tc = 0.5 * (a + b);

    // Secant polish using true RK steps from the step start.
    let n = y0.len();
    let mut st = Stages::new(n);
    let mut err = vec![0.0; n];
    let mut take = |tt: f64| -> Result<Vec<f64>> {
        if tt == step.t0 {
            return Ok(step.y0.clone());
        }
        sys.rhs(step.t0, &step.y0, &mut st.k[0])?;
        rk_step(sys, step.t0, &step.y0, tt - step.t0, &mut st, &mut err)
    };
    let mut yc = take(tc)?;
    let mut gc = event(tc, &yc);
    let dt = 1e-7 * step.h.abs().max(1e-12);
    let mut tp = tc + dt;
    let mut gp = event(tp, &take(tp)?);
    for _ in 0..4 {
        if gc == 0.0 || gp == gc {
            break;
        }
        let tn = tc - gc * (tc - tp) / (gc - gp);
        tp = tc;
        gp = gc;
        tc = tn;
        yc = take(tc)?;
        gc = event(tc, &yc);
    }
    Ok(Some((tc, yc)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = -y[0];
            Ok(())
        };
        let y = integrate(&f, 0.0, &[1.0], 2.0, &Tolerance::new(1e-12)).unwrap();
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-11);
        let yb = integrate(&f, 2.0, &y, 0.0, &Tolerance::new(1e-12)).unwrap();
        assert!((yb[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        };
        let mut worst = 0.0f64;
        integrate_observed(&f, 0.0, &[1.0, 0.0], 5.0, &Tolerance::new(1e-10), |s| {
            let tm = s.t0 + 0.37 * s.h;
            let ym = s.dense(tm);
            worst = worst.max((ym[0] - tm.cos()).abs());
            Ok(true)
        })
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn event_hits_crossing() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        };
        let (t, y) = integrate_to_event(&f, 0.0, &[1.0, 0.0], 10.0, &Tolerance::new(1e-12), |_, y| y[0])
            .unwrap()
            .unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-11, "{t}");
        assert!(y[0].abs() < 1e-12);
        let none = integrate_to_event(&f, 0.0, &[1.0, 0.0], 1.0, &Tolerance::new(1e-12), |_, y| y[0]).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn step_underflow_is_reported() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = y[0] * y[0];
            Ok(())
        };
        // Blows up at t = 1.
        let r = integrate(&f, 0.0, &[1.0], 2.0, &Tolerance::new(1e-10));
        assert!(matches!(r, Err(Error::Integration { .. })));
    }
}
