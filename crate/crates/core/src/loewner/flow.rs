use crate::error::{Error, Result};
use crate::ode::{self, Integration, StepControl, Verdict};
use crate::scalar::{Real, C};

use super::driving::Driving;

/// Tolerances of the Loewner flows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions<T> {
    /// Per-step error target of the integrator.
    pub tol: T,
    /// A forward trajectory is swallowed once `Im g` drops below this.
    pub swallow: T,
    /// Bisection resolution of lifetimes.
    pub lifetime_tol: T,
}

impl<T: Real> Default for FlowOptions<T> {
    fn default() -> Self {
        FlowOptions { tol: T::tol(1e-10), swallow: T::lit(1e-6), lifetime_tol: T::tol(1e-8) }
    }
}

impl<T: Real> FlowOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        FlowOptions { tol, ..Self::default() }
    }
}

/// State of a forward trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPoint<T> {
    pub value: C<T>,
    pub alive: bool,
    /// Swallowing time, `+inf` while alive.
    pub lifetime: T,
    pub err_est: T,
}

/// Integrates `y' = sign * G_{nu_t}(y)` from `from` to `to` (either
/// direction), one smooth piece of the driver at a time.
pub(crate) fn integrate_field<T, G>(
    d: &Driving<T>,
    from: T,
    to: T,
    y0: C<T>,
    sign: T,
    ctl: &StepControl<T>,
    guard: G,
) -> Result<Integration<T>>
where
    T: Real,
    G: Fn(C<T>) -> Verdict + Copy,
{
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    let mut pieces = d.pieces(lo, hi)?;
    if from > to {
        pieces.reverse();
    }
    let mut acc = Integration { t: from, y: y0, err_est: T::zero(), steps: 0, stopped: false, prev: (from, y0) };
    for p in pieces {
        let (a, b) = if from <= to { (p.t0, p.t1) } else { (p.t1, p.t0) };
        let field = p.field;
        let r = ode::integrate(|t, y| field.eval(t, y) * sign, a, b, acc.y, ctl, guard)?;
        acc = Integration {
            t: r.t,
            y: r.y,
            err_est: acc.err_est + r.err_est,
            steps: acc.steps + r.steps,
            stopped: r.stopped,
            prev: if r.steps > 0 { r.prev } else { acc.prev },
        };
        if r.stopped {
            break;
        }
    }
    Ok(acc)
}

fn control<T: Real>(opts: &FlowOptions<T>) -> StepControl<T> {
    StepControl::new(opts.tol)
}

fn accept_all<T: Real>(_: C<T>) -> Verdict {
    Verdict::Accept
}

/// Forward flow `dg/dt = G_{nu_t}(g)`, `g_0 = z`, up to time `t`.
pub fn flow_forward<T: Real>(d: &Driving<T>, z: C<T>, t: T, opts: &FlowOptions<T>) -> Result<FlowPoint<T>> {
    if !(z.im > T::zero()) || !z.re.is_finite() {
        return Err(Error::invalid("forward flow needs Im z > 0"));
    }
    if !(t >= T::zero()) {
        return Err(Error::invalid("forward flow needs t >= 0"));
    }
    d.check_horizon(t)?;
    let swallow = opts.swallow;
    let half = swallow * T::lit(0.5);
    let guard = move |y: C<T>| {
        if y.im < half {
            Verdict::Reject
        } else if y.im < swallow {
            Verdict::Stop
        } else {
            Verdict::Accept
        }
    };
    let ctl = control(opts);
    let run = integrate_field(d, T::zero(), t, z, T::one(), &ctl, guard)?;
    if !run.stopped {
        return Ok(FlowPoint { value: run.y, alive: true, lifetime: T::infinity(), err_est: run.err_est });
    }
    // Bisect the crossing of Im g = swallow from the last state above it.
    let (t_prev, y_prev) = run.prev;
    let (mut lo, mut hi) = (t_prev, run.t);
    while hi - lo > opts.lifetime_tol {
        let mid = (lo + hi) * T::lit(0.5);
        let probe = integrate_field(d, t_prev, mid, y_prev, T::one(), &ctl, guard)?;
        if probe.stopped {
            hi = probe.t;
        } else {
            lo = mid;
        }
    }
    let lifetime = (lo + hi) * T::lit(0.5);
    Ok(FlowPoint { value: run.y, alive: false, lifetime, err_est: run.err_est })
}

fn check_order<T: Real>(s: T, t: T) -> Result<()> {
    if !(s >= T::zero()) || !(s <= t) {
        return Err(Error::invalid("flows need 0 <= s <= t"));
    }
    Ok(())
}

/// Reverse flow `phi_{s,t}(z)`: `dphi/dt = -G_{nu_t}(phi)`, `phi_{s,s} = z`.
pub fn flow_reverse<T: Real>(d: &Driving<T>, s: T, t: T, z: C<T>, opts: &FlowOptions<T>) -> Result<C<T>> {
    flow_reverse_point(d, s, t, z, opts).map(|p| p.value)
}

/// [`flow_reverse`] with the integrator's error estimate.
pub fn flow_reverse_point<T: Real>(d: &Driving<T>, s: T, t: T, z: C<T>, opts: &FlowOptions<T>) -> Result<FlowPoint<T>> {
    check_order(s, t)?;
    d.check_horizon(t)?;
    if z.im < T::zero() {
        let p = flow_reverse_point(d, s, t, z.conj(), opts)?;
        return Ok(FlowPoint { value: p.value.conj(), ..p });
    }
    let run = integrate_field(d, s, t, z, -T::one(), &control(opts), accept_all)?;
    Ok(FlowPoint { value: run.y, alive: true, lifetime: T::infinity(), err_est: run.err_est })
}

/// Anti-monotone flow `phi_{s,t}(z)`: `dphi/ds = G_{nu_s}(phi)`,
/// `phi_{t,t} = z`, integrated backwards in `s`.
pub fn flow_reverse_anti<T: Real>(d: &Driving<T>, s: T, t: T, z: C<T>, opts: &FlowOptions<T>) -> Result<C<T>> {
    flow_reverse_anti_point(d, s, t, z, opts).map(|p| p.value)
}

/// [`flow_reverse_anti`] with the integrator's error estimate.
pub fn flow_reverse_anti_point<T: Real>(
    d: &Driving<T>,
    s: T,
    t: T,
    z: C<T>,
    opts: &FlowOptions<T>,
) -> Result<FlowPoint<T>> {
    check_order(s, t)?;
    d.check_horizon(t)?;
    if z.im < T::zero() {
        let p = flow_reverse_anti_point(d, s, t, z.conj(), opts)?;
        return Ok(FlowPoint { value: p.value.conj(), ..p });
    }
    let run = integrate_field(d, t, s, z, T::one(), &control(opts), accept_all)?;
    Ok(FlowPoint { value: run.y, alive: true, lifetime: T::infinity(), err_est: run.err_est })
}

/// Round-trip tolerance of [`inverse_map`].
pub const INVERSE_CHECK_TOL: f64 = 1e-6;

/// `f_t = g_t^{-1}` at `z`, verified by flowing the result forward again.
pub fn inverse_map<T: Real>(d: &Driving<T>, t: T, z: C<T>, opts: &FlowOptions<T>) -> Result<C<T>> {
    if !(z.im > T::zero()) {
        return Err(Error::invalid("inverse map needs Im z > 0"));
    }
    let w = flow_reverse_anti(d, T::zero(), t, z, opts)?;
    if t == T::zero() {
        return Ok(w);
    }
    let back = if w.im > T::zero() { Some(flow_forward(d, w, t, opts)?) } else { None };
    match back {
        Some(p) if p.alive && (p.value - z).norm() <= T::tol(INVERSE_CHECK_TOL) * T::one().max(z.norm()) => Ok(w),
        Some(p) => Err(Error::NotInImage { residual: (p.value - z).norm().as_f64() }),
        None => Err(Error::NotInImage { residual: f64::INFINITY }),
    }
}
