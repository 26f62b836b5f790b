//! Conformal welding of the slit generated by an atom-path driver.
//!
//! A real point `x` on either side of `U(0)` travels under the reverse flow
//! towards the driver and collides with it at a time `tau(x)`; the points
//! with `tau(x) <= T` form the preimage interval `[a, b]` of the slit, and
//! two points are welded when they collide at the same time. On a piece
//! with `U' = c` the gap `r = |phi - U|` obeys `r r' = -1 - s c r`, which
//! integrates in closed form.

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real, C};

use super::driving::{Driving, Field};
use super::flow::{flow_reverse, FlowOptions};

/// Default number of welded pairs.
pub const WELDING_PAIRS: usize = 50;
/// Heights of the boundary-limit samples in [`welding_residual`].
pub const BOUNDARY_DELTAS: [f64; 3] = [1e-6, 5e-7, 2.5e-7];
const UNIMODAL_SAMPLES: usize = 64;
const BISECTION_ITER: usize = 200;

/// Welding data of `phi_{0,T}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Welding<T> {
    pub a: T,
    pub b: T,
    /// Preimage of the tip.
    pub u: T,
    /// `(x, h(x))` with `a < x < u < h(x) < b`.
    pub pairs: Vec<(T, T)>,
}

/// `int_0^r rho / (1 + k rho) d rho` (continued past `1 + k rho = 0` with
/// `|1 + k rho|`).
fn gap_time<T: Real>(k: T, r: T) -> T {
    let x = k * r;
    if x.abs() < T::lit(1e-4) {
        r * r * (T::lit(0.5) - x / T::lit(3.0) + x * x / T::lit(4.0) - x * x * x / T::lit(5.0))
    } else if x > -T::one() {
        (x - x.ln_1p()) / (k * k)
    } else {
        (x - (-(T::one() + x)).ln()) / (k * k)
    }
}

/// Gap after time `dt` starting from gap `r`, given no collision.
fn evolve_gap<T: Real>(k: T, r: T, dt: T) -> T {
    let one = T::one();
    let target = gap_time(k, r) - dt;
    let stationary = one + k * r;
    if stationary == T::zero() {
        return r;
    }
    // gap_time is increasing on the attracting side and decreasing beyond.
    let (mut lo, mut hi) = if stationary > T::zero() {
        (T::zero(), r)
    } else {
        let mut hi = r * T::lit(2.0);
        while gap_time(k, hi) > target {
            hi = hi * T::lit(2.0);
        }
        (r, hi)
    };
    for _ in 0..BISECTION_ITER {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = gap_time(k, mid) < target;
        if (stationary > T::zero()) == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::lit(0.5)
}

/// Collision time of the real point `x` with the driver, if it is at most
/// `horizon`.
pub fn collision_time<T: Real>(d: &Driving<T>, x: T, horizon: T) -> Result<Option<T>> {
    let u0 = d.value_at(T::zero())?;
    let side = (x - u0).signum();
    let mut r = (x - u0).abs();
    if r == T::zero() {
        return Ok(Some(T::zero()));
    }
    for p in d.pieces(T::zero(), horizon)? {
        let Field::Atom { slope, .. } = p.field else {
            return Err(Error::invalid("welding needs an atom-path driver"));
        };
        let k = side * slope;
        let dt = p.t1 - p.t0;
        if T::one() + k * r > T::zero() {
            let to_hit = gap_time(k, r);
            if to_hit <= dt {
                return Ok(Some(p.t0 + to_hit));
            }
        }
        r = evolve_gap(k, r, dt);
    }
    Ok(None)
}

fn bisect<T: Real>(mut inside: T, mut outside: T, is_inside: impl Fn(T) -> Result<bool>) -> Result<T> {
    for _ in 0..BISECTION_ITER {
        let mid = (inside + outside) * T::lit(0.5);
        if mid == inside || mid == outside {
            break;
        }
        if is_inside(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok((inside + outside) * T::lit(0.5))
}

/// Welding of `phi_{0,T}` with [`WELDING_PAIRS`] pairs.
pub fn welding<T: Real>(d: &Driving<T>, horizon: T) -> Result<Welding<T>> {
    welding_with(d, horizon, WELDING_PAIRS)
}

/// Welding of `phi_{0,T}` with `n_pairs` pairs spread evenly over `(a, u)`.
pub fn welding_with<T: Real>(d: &Driving<T>, horizon: T, n_pairs: usize) -> Result<Welding<T>> {
    if !matches!(d, Driving::AtomPath { .. }) {
        return Err(Error::invalid("welding needs an atom-path driver"));
    }
    if !(horizon > T::zero()) {
        return Err(Error::invalid("welding needs T > 0"));
    }
    d.check_horizon(horizon)?;
    let u = d.value_at(T::zero())?;
    let tau = |x: T| collision_time(d, x, horizon);
    let swallowed = |x: T| tau(x).map(|t| t.is_some());

    let edge = |dir: T| -> Result<T> {
        let mut step = horizon.sqrt();
        let mut inside = u;
        loop {
            let x = u + dir * step;
            if !swallowed(x)? {
                return bisect(inside, x, swallowed);
            }
            inside = x;
            step = step * T::lit(2.0);
            if !step.is_finite() {
                return Err(Error::NotASlit("preimage interval is unbounded".into()));
            }
        }
    };
    let a = edge(-T::one())?;
    let b = edge(T::one())?;

    // tau must fall towards u from both sides.
    let n = UNIMODAL_SAMPLES;
    let mut last = [T::infinity(); 2];
    for i in 1..n {
        let frac = T::one() - T::from_usize(i).unwrap() / T::from_usize(n).unwrap();
        for (j, end) in [a, b].into_iter().enumerate() {
            let t =
                tau(u + (end - u) * frac)?.ok_or_else(|| Error::NotASlit("gap inside the preimage interval".into()))?;
            if !(t < last[j]) {
                return Err(Error::NotASlit("collision time is not unimodal".into()));
            }
            last[j] = t;
        }
    }

    let mut pairs = Vec::with_capacity(n_pairs);
    for k in 1..=n_pairs {
        let frac = T::from_usize(k).unwrap() / T::from_usize(n_pairs + 1).unwrap();
        let x = u + (a - u) * frac;
        let tx = tau(x)?.ok_or_else(|| Error::NotASlit("gap inside the preimage interval".into()))?;
        let hx = bisect(u, b, |y| Ok(tau(y)?.is_some_and(|ty| ty <= tx)))?;
        pairs.push((x, hx));
    }
    Ok(Welding { a, b, u, pairs })
}

/// Boundary value `phi_{0,T}(x + i0)` by linear Richardson extrapolation
/// over [`BOUNDARY_DELTAS`].
pub fn boundary_value<T: Real>(d: &Driving<T>, horizon: T, x: T, opts: &FlowOptions<T>) -> Result<C<T>> {
    let mut f = [cplx(T::zero(), T::zero()); 3];
    for (k, delta) in BOUNDARY_DELTAS.iter().enumerate() {
        f[k] = flow_reverse(d, T::zero(), horizon, cplx(x, T::lit(*delta)), opts)?;
    }
    let two = T::lit(2.0);
    let r01 = f[1] * two - f[0];
    let r12 = f[2] * two - f[1];
    Ok((r12 * T::lit(4.0) - r01) / T::lit(3.0))
}

/// `max |phi_{0,T}(x) - phi_{0,T}(h(x))|` over the welded pairs.
pub fn welding_residual<T: Real>(d: &Driving<T>, horizon: T, pairs: &[(T, T)], opts: &FlowOptions<T>) -> Result<T> {
    let mut worst = T::zero();
    for &(x, hx) in pairs {
        let gap = (boundary_value(d, horizon, x, opts)? - boundary_value(d, horizon, hx, opts)?).norm();
        worst = worst.max(gap);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_time_series_matches_closed_form() {
        for k in [1e-3, -1e-3, 0.5, -0.5] {
            let r: f64 = 0.3;
            let closed = if k * r > -1.0 { (k * r - (k * r).ln_1p()) / (k * k) } else { 0.0 };
            assert!((gap_time(k, r) - closed).abs() < 1e-12);
        }
        assert!((gap_time(1e-9f64, 2.0) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn constant_driver_collisions() {
        let d = Driving::constant_path(0.0f64, 2.0).unwrap();
        assert!((collision_time(&d, 1.0, 2.0).unwrap().unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(collision_time(&d, 2.5, 2.0).unwrap(), None);
        assert_eq!(collision_time(&d, 0.0, 2.0).unwrap(), Some(0.0));
    }

    #[test]
    fn linear_driver_collision_matches_ode() {
        // U(t) = t; integrate r r' = -1 + r (x > 0 side, s c = 1) with small Euler steps
        let d = Driving::atom_path(vec![0.0f64, 2.0], vec![0.0, 2.0]).unwrap();
        let x = 0.8;
        let mut phi = x;
        let mut t = 0.0;
        let h = 1e-7;
        while phi - t > 1e-4 {
            phi -= h / (phi - t);
            t += h;
        }
        let tau = collision_time(&d, x, 2.0).unwrap().unwrap();
        assert!((tau - t).abs() < 1e-4, "{tau} vs {t}");
    }

    #[test]
    fn line_segment_welding() {
        let d = Driving::constant_path(0.0, 1.0).unwrap();
        let w = welding_with(&d, 1.0, 10).unwrap();
        assert!((w.a + 2f64.sqrt()).abs() < 1e-10);
        assert!((w.b - 2f64.sqrt()).abs() < 1e-10);
        assert_eq!(w.u, 0.0);
        for (x, hx) in &w.pairs {
            assert!((hx + x).abs() < 1e-10);
        }
        let w = welding_with(&Driving::constant_path(0.0f64, 0.5).unwrap(), 0.5, 3).unwrap();
        assert!((w.a + 1.0).abs() < 1e-10 && (w.b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn welded_points_share_boundary_values() {
        let d = Driving::atom_path(vec![0.0, 0.5, 1.0], vec![0.0, 0.4, 0.1]).unwrap();
        let w = welding_with(&d, 1.0, 4).unwrap();
        assert!(w.a < w.u && w.u < w.b);
        let res = welding_residual(&d, 1.0, &w.pairs, &FlowOptions::default()).unwrap();
        assert!(res < 1e-5, "{res}");
    }

    #[test]
    fn requires_atom_path() {
        assert!(welding(&Driving::constant(0.0), 1.0).is_err());
        assert!(welding(&Driving::constant_path(0.0, 1.0).unwrap(), 2.0).is_err());
    }
}
