//! Adaptive Dormand–Prince 5(4) integrator for scalar complex ODEs.
//!
//! The integrator runs in either time direction and lets the caller veto or
//! terminate on trial states through a [`Guard`]; the Loewner flows use this
//! to keep forward trajectories off the real axis and to stop at swallowing.

use crate::error::{Error, Result};
use crate::scalar::{is_finite, Real, C};

mod dopri {
    pub const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    pub const A2: [f64; 1] = [1.0 / 5.0];
    pub const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
    pub const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
    pub const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
    pub const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
    /// Fifth-order weights (also the FSAL stage).
    pub const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
    /// Difference between fifth- and fourth-order weights, stages 1..=7.
    pub const E: [f64; 7] =
        [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
}

/// Step-size control parameters.
#[derive(Debug, Clone, Copy)]
pub struct StepControl<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> StepControl<T> {
    pub fn new(tol: T) -> Self {
        StepControl { rtol: tol, atol: tol, max_steps: 200_000 }
    }
}

/// What to do with a trial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    /// Inadmissible: shrink the step and retry.
    Reject,
    /// Accept the step and end the integration here.
    Stop,
}

/// Result of one integration call.
#[derive(Debug, Clone, Copy)]
pub struct Integration<T> {
    pub t: T,
    pub y: C<T>,
    /// Sum of accepted local error estimates.
    pub err_est: T,
    pub steps: usize,
    pub stopped: bool,
    /// Last accepted state before `(t, y)`.
    pub prev: (T, C<T>),
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<T, F, G>(mut f: F, t0: T, t1: T, y0: C<T>, ctl: &StepControl<T>, guard: G) -> Result<Integration<T>>
where
    T: Real,
    F: FnMut(T, C<T>) -> C<T>,
    G: Fn(C<T>) -> Verdict,
{
    let span = t1 - t0;
    let mut out = Integration { t: t0, y: y0, err_est: T::zero(), steps: 0, stopped: false, prev: (t0, y0) };
    if span == T::zero() {
        return Ok(out);
    }
    let dir = span.signum();
    let lit = T::lit;

    let mut k1 = f(t0, y0);
    let mut h = {
        let d0 = y0.norm();
        let d1 = k1.norm();
        let guess = if d0 > lit(1e-5) && d1 > lit(1e-5) { lit(0.01) * d0 / d1 } else { lit(1e-4) };
        guess.min(span.abs())
    };
    let (mut t, mut y) = (t0, y0);

    loop {
        if out.steps >= ctl.max_steps {
            return Err(Error::NoConvergence { what: "ode integration", iterations: ctl.max_steps });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let hs = dir * step;

        let stage = |coef: &[f64], ks: &[C<T>]| -> C<T> {
            let mut acc = y;
            for (a, k) in coef.iter().zip(ks) {
                acc = acc + *k * (hs * lit(*a));
            }
            acc
        };
        let k2 = f(t + hs * lit(dopri::C[0]), stage(&dopri::A2, &[k1]));
        let k3 = f(t + hs * lit(dopri::C[1]), stage(&dopri::A3, &[k1, k2]));
        let k4 = f(t + hs * lit(dopri::C[2]), stage(&dopri::A4, &[k1, k2, k3]));
        let k5 = f(t + hs * lit(dopri::C[3]), stage(&dopri::A5, &[k1, k2, k3, k4]));
        let k6 = f(t + hs * lit(dopri::C[4]), stage(&dopri::A6, &[k1, k2, k3, k4, k5]));
        let y_new = stage(&dopri::B, &[k1, k2, k3, k4, k5, k6]);
        let t_new = if last { t1 } else { t + hs };
        let k7 = f(t_new, y_new);

        let ks = [k1, k2, k3, k4, k5, k6, k7];
        let mut err_vec = C::new(T::zero(), T::zero());
        for (e, k) in dopri::E.iter().zip(ks.iter()) {
            err_vec = err_vec + *k * lit(*e);
        }
        let local_err = (err_vec * hs).norm();
        let scale = ctl.atol + ctl.rtol * y.norm().max(y_new.norm());
        let ratio = local_err / scale;

        let verdict =
            if is_finite(y_new) && is_finite(k7) && ratio.is_finite() { guard(y_new) } else { Verdict::Reject };

        if verdict != Verdict::Reject && ratio <= T::one() {
            out.prev = (t, y);
            t = t_new;
            y = y_new;
            k1 = k7;
            out.steps += 1;
            out.err_est = out.err_est + local_err;
            if verdict == Verdict::Stop || last {
                out.t = t;
                out.y = y;
                out.stopped = verdict == Verdict::Stop;
                return Ok(out);
            }
            let grow = if ratio == T::zero() { lit(5.0) } else { (lit(0.9) * ratio.powf(lit(-0.2))).min(lit(5.0)) };
            h = step * grow.max(lit(0.2));
        } else {
            let shrink = if verdict == Verdict::Reject || !ratio.is_finite() {
                lit(0.25)
            } else {
                (lit(0.9) * ratio.powf(lit(-0.25))).max(lit(0.1))
            };
            h = step * shrink.min(lit(0.9));
        }
        let floor = T::epsilon() * lit(8.0) * t.abs().max(T::one());
        if h < floor {
            return Err(Error::StepUnderflow { t: t.as_f64() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn exponential_growth() {
        // y' = i y, y(0) = 1 => y(t) = e^{it}
        let ctl = StepControl::new(1e-12);
        let r = integrate(
            |_, y: Complex64| Complex64::i() * y,
            0.0,
            3.0,
            Complex64::new(1.0, 0.0),
            &ctl,
            |_| Verdict::Accept,
        )
        .unwrap();
        let exact = Complex64::new(3f64.cos(), 3f64.sin());
        assert!((r.y - exact).norm() < 1e-10);
        assert!(r.err_est > 0.0 && r.err_est < 1e-9);
    }

    #[test]
    fn backward_direction() {
        let ctl = StepControl::new(1e-12);
        let r = integrate(
            |t: f64, _| Complex64::new(2.0 * t, 0.0),
            2.0,
            -1.0,
            Complex64::new(4.0, 0.0),
            &ctl,
            |_| Verdict::Accept,
        )
        .unwrap();
        assert!((r.y.re - 1.0).abs() < 1e-12);
        assert_eq!(r.t, -1.0);
    }

    #[test]
    fn guard_stops_integration() {
        let ctl = StepControl::new(1e-10);
        // y' = -1 from y = 1 stops once y < 0.25.
        let r = integrate(
            |_, _| Complex64::new(-1.0, 0.0),
            0.0,
            2.0,
            Complex64::new(1.0, 0.0),
            &ctl,
            |y| {
                if y.re < 0.25 {
                    Verdict::Stop
                } else {
                    Verdict::Accept
                }
            },
        )
        .unwrap();
        assert!(r.stopped);
        assert!(r.y.re < 0.25 && r.prev.1.re >= 0.25);
    }
}
