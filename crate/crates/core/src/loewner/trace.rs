use crate::error::{Error, Result};
use crate::scalar::{cplx, Real, C};

use super::driving::Driving;
use super::flow::{flow_reverse_anti_point, FlowOptions};

/// Heights above `U(t)` at which the inverse map is sampled.
pub const TRACE_DELTAS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

/// Points of the generating curve at the requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct HullTrace<T> {
    pub times: Vec<T>,
    pub points: Vec<C<T>>,
    pub err_est: Vec<T>,
}

/// `gamma(t) = lim f_t(U(t) + i delta)` for an atom-path driver.
///
/// The limit is extrapolated from three heights, removing the `delta^2`
/// and then the `delta^3` term of the expansion at the tip.
pub fn trace<T: Real>(d: &Driving<T>, times: &[T], opts: &FlowOptions<T>) -> Result<HullTrace<T>> {
    if !matches!(d, Driving::AtomPath { .. }) {
        return Err(Error::invalid("trace needs an atom-path driver"));
    }
    let mut out = HullTrace { times: times.to_vec(), points: Vec::with_capacity(times.len()), err_est: Vec::new() };
    for &t in times {
        let u = d.value_at(t)?;
        if t == T::zero() {
            out.points.push(cplx(u, T::zero()));
            out.err_est.push(T::zero());
            continue;
        }
        let mut f = [cplx(T::zero(), T::zero()); 3];
        let mut ode_err = T::zero();
        for (k, delta) in TRACE_DELTAS.iter().enumerate() {
            let p = flow_reverse_anti_point(d, T::zero(), t, cplx(u, T::lit(*delta)), opts)?;
            f[k] = p.value;
            ode_err = ode_err.max(p.err_est);
        }
        let (d1, d2) = ((f[1] - f[0]).norm(), (f[2] - f[1]).norm());
        if !(d2 < d1) {
            return Err(Error::TraceUnresolved { t: t.as_f64() });
        }
        let three = T::lit(3.0);
        let r01 = (f[1] * T::lit(4.0) - f[0]) / three;
        let r12 = (f[2] * T::lit(4.0) - f[1]) / three;
        let r = (r12 * T::lit(8.0) - r01) / T::lit(7.0);
        out.points.push(r);
        out.err_est.push((r - r12).norm() + ode_err);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_segment_tip() {
        let d = Driving::constant_path(0.0, 1.0).unwrap();
        let tr = trace(&d, &[0.0, 0.5, 1.0], &FlowOptions::default()).unwrap();
        assert_eq!(tr.points[0], C::new(0.0, 0.0));
        assert!((tr.points[1] - C::new(0.0, 1.0)).norm() < 1e-8);
        assert!((tr.points[2] - C::new(0.0, 2f64.sqrt())).norm() < 1e-8);
        assert!(tr.err_est.iter().all(|e| *e < 1e-6));
    }

    #[test]
    fn shifted_tip() {
        let d = Driving::constant_path(0.75, 2.0).unwrap();
        let tr = trace(&d, &[1.5], &FlowOptions::default()).unwrap();
        assert!((tr.points[0] - C::new(0.75, 3f64.sqrt())).norm() < 1e-8);
    }

    #[test]
    fn curve_of_linear_driver_is_continuous() {
        let d = Driving::atom_path(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let ts: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let tr = trace(&d, &ts, &FlowOptions::default()).unwrap();
        for w in tr.points.windows(2) {
            assert!((w[1] - w[0]).norm() < 0.5);
        }
        assert!(tr.points[1..].iter().all(|p| p.im > 0.0));
    }

    #[test]
    fn rejects_measure_drivers() {
        assert!(trace(&Driving::constant(0.0), &[0.5], &FlowOptions::default()).is_err());
    }
}
