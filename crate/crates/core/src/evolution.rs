//! Evolution families generated by a driving family, SLE drivers, the
//! convolution-chain approximation and Burgers diagnostics.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::convolve;
use crate::error::{Error, Result};
use crate::loewner::{self, Driving, Field, FlowOptions};
use crate::measures::Measure;
use crate::quad;
use crate::scalar::{cplx, Real, C};
use crate::transforms::{self, AnalyticMap, MapKind};

/// Which composition law the family obeys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Monotone,
    AntiMonotone,
    Free,
}

/// Absolute tolerance of the time quadrature behind free families.
pub const FREE_QUAD_TOL: f64 = 1e-13;

/// Two-parameter family `(s, t) -> phi_{s,t}` (or `R_{s,t}` for free
/// semantics) generated by a driving family.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionFamily<T> {
    pub semantics: Semantics,
    pub driving: Driving<T>,
    pub opts: FlowOptions<T>,
}

pub fn monotone_family<T: Real>(d: Driving<T>) -> EvolutionFamily<T> {
    EvolutionFamily { semantics: Semantics::Monotone, driving: d, opts: FlowOptions::default() }
}

pub fn anti_monotone_family<T: Real>(d: Driving<T>) -> EvolutionFamily<T> {
    EvolutionFamily { semantics: Semantics::AntiMonotone, driving: d, opts: FlowOptions::default() }
}

pub fn free_family<T: Real>(d: Driving<T>) -> EvolutionFamily<T> {
    EvolutionFamily { semantics: Semantics::Free, driving: d, opts: FlowOptions::default() }
}

impl<T: Real> EvolutionFamily<T> {
    pub fn with_options(mut self, opts: FlowOptions<T>) -> Self {
        self.opts = opts;
        self
    }

    /// `phi_{s,t}(z)` for (anti-)monotone semantics, `R_{s,t}(z)` for free.
    pub fn eval(&self, s: T, t: T, z: C<T>) -> Result<C<T>> {
        match self.semantics {
            Semantics::Monotone => loewner::flow_reverse(&self.driving, s, t, z, &self.opts),
            Semantics::AntiMonotone => loewner::flow_reverse_anti(&self.driving, s, t, z, &self.opts),
            Semantics::Free => free_r(&self.driving, s, t, z),
        }
    }

    /// F-transform of `sigma_{s,t}`.
    pub fn sigma_f(&self, s: T, t: T) -> Result<AnalyticMap<T>> {
        match self.semantics {
            Semantics::Free => Ok(self.sigma_cauchy(s, t)?.reciprocal()),
            _ => {
                let fam = self.clone();
                Ok(AnalyticMap::new(MapKind::F, move |z| fam.eval(s, t, z)))
            }
        }
    }

    /// Cauchy transform of `sigma_{s,t}`.
    pub fn sigma_cauchy(&self, s: T, t: T) -> Result<AnalyticMap<T>> {
        match self.semantics {
            Semantics::Free => transforms::cauchy_from_r(&self.r_map(s, t)?),
            _ => Ok(self.sigma_f(s, t)?.reciprocal()),
        }
    }

    /// `R_{s,t}` as an R-kind map (free semantics only).
    pub fn r_map(&self, s: T, t: T) -> Result<AnalyticMap<T>> {
        if self.semantics != Semantics::Free {
            return Err(Error::invalid("R-transform maps exist for free families only"));
        }
        let d = self.driving.clone();
        Ok(AnalyticMap::new(MapKind::R, move |z| free_r(&d, s, t, z)))
    }

    /// `sigma_{s,t}` recovered on `grid`.
    pub fn sigma(&self, s: T, t: T, grid: &[T], eps: T) -> Result<Measure<T>> {
        convolve::materialize(&self.sigma_cauchy(s, t)?, grid, eps)
    }
}

/// `R_{s,t}(z) = int_s^t G_{nu_tau}(1/z) dtau`.
fn free_r<T: Real>(d: &Driving<T>, s: T, t: T, z: C<T>) -> Result<C<T>> {
    if !(s >= T::zero() && s <= t) {
        return Err(Error::invalid("free family needs 0 <= s <= t"));
    }
    if z.im == T::zero() {
        return Err(Error::invalid("free family needs a non-real argument"));
    }
    let w = z.inv();
    let mut acc = cplx(T::zero(), T::zero());
    for p in d.pieces(s, t)? {
        let len = p.t1 - p.t0;
        let tol = T::tol(FREE_QUAD_TOL) * len.max(T::tol(1e-300));
        acc = acc
            + match p.field {
                Field::Measure(m) => transforms::cauchy_eval(m, w) * len,
                field => quad::integrate(|tau| field.eval(tau, w), p.t0, p.t1, tol)?,
            };
    }
    Ok(acc)
}

/// Brownian driver `U = sqrt(kappa/2) B` sampled every `dt` up to `horizon`
/// and interpolated linearly.
///
/// The increment with index `k` is drawn from a ChaCha8 stream selected by
/// `k` under the key `seed`, so paths are reproducible and prefixes of a
/// longer path agree with shorter ones.
pub fn sle_driving<T: Real>(kappa: T, dt: T, horizon: T, seed: u64) -> Result<Driving<T>> {
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return Err(Error::invalid("kappa must be non-negative"));
    }
    if !(dt > T::zero()) || !(dt <= horizon) || !horizon.is_finite() {
        return Err(Error::invalid("need 0 < dt <= horizon"));
    }
    let ratio = horizon / dt;
    let n = if (ratio - ratio.round()).abs() <= T::tol(1e-9) * ratio { ratio.round() } else { ratio.ceil() };
    let n = n.to_usize().ok_or_else(|| Error::invalid("too many SLE steps"))?;
    let scale = (kappa / T::lit(2.0)).sqrt();
    let mut times = vec![T::zero()];
    let mut values = vec![T::zero()];
    let mut u = T::zero();
    for k in 0..n {
        let t_next = if k + 1 == n { horizon } else { dt * T::from_usize(k + 1).unwrap() };
        let step = t_next - *times.last().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let xi: f64 = StandardNormal.sample(&mut rng);
        u = u + scale * step.sqrt() * T::lit(xi);
        times.push(t_next);
        values.push(u);
    }
    Driving::atom_path(times, values)
}

/// Where the shift of each chain factor is read off the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftBase {
    /// `U(k dt)`, exact for drivers constant on `[k dt, (k + 1) dt)`.
    #[default]
    Left,
    /// `U((k + 1) dt)`.
    Right,
    /// The increment `U((k + 1) dt) - U(k dt)`.
    Increment,
}

fn driver_value<T: Real>(d: &Driving<T>, t: T) -> Result<T> {
    match d {
        Driving::AtomPath { .. } => d.value_at(t),
        Driving::MeasurePath { breakpoints, measures } => {
            d.check_horizon(t)?;
            let i = breakpoints.partition_point(|&b| b <= t).saturating_sub(1);
            match measures[i] {
                Measure::Dirac { at } => Ok(at),
                _ => Err(Error::invalid("chain approximation needs an atomic driver")),
            }
        }
        Driving::SemicircleFamily => Err(Error::invalid("chain approximation needs an atomic driver")),
    }
}

/// F-transform of the chain `delta_{-c_k} > A_{dt} > delta_{c_k}` composed
/// over `k = 0..K` in evolution order (`phi_{0,K dt} = F_{K-1} o ... o F_0`).
pub fn chain_approximation<T: Real>(d: &Driving<T>, dt: T, k: usize, base: ShiftBase) -> Result<AnalyticMap<T>> {
    if !(dt > T::zero()) {
        return Err(Error::invalid("dt must be positive"));
    }
    d.check_horizon(dt * T::from_usize(k).unwrap())?;
    let arcsine = transforms::f_transform(&Measure::arcsine(dt)?);
    let mut total = transforms::f_transform(&Measure::dirac(T::zero()));
    for i in 0..k {
        let t0 = dt * T::from_usize(i).unwrap();
        let t1 = dt * T::from_usize(i + 1).unwrap();
        let c = match base {
            ShiftBase::Left => driver_value(d, t0)?,
            ShiftBase::Right => driver_value(d, t1)?,
            ShiftBase::Increment => driver_value(d, t1)? - driver_value(d, t0)?,
        };
        let left = transforms::f_transform(&Measure::dirac(-c));
        let right = transforms::f_transform(&Measure::dirac(c));
        let factor = convolve::monotone(&left, &convolve::monotone(&arcsine, &right)?)?;
        total = convolve::monotone(&factor, &total)?;
    }
    Ok(total)
}

/// Step of the Burgers finite differences.
pub const BURGERS_STEP: f64 = 1e-3;

/// `max |dG/dt + G dG/dz|` over `points` for `G_t = 1/f_t`.
pub fn burgers_residual<T: Real>(d: &Driving<T>, points: &[(T, C<T>)], opts: &FlowOptions<T>) -> Result<T> {
    burgers_residual_with(|t, z| Ok(loewner::inverse_map(d, t, z, opts)?.inv()), points)
}

/// Burgers residual of an arbitrary `G(t, z)`; central differences in both
/// variables, second-order one-sided in `t` where `t - h < 0`.
pub fn burgers_residual_with<T, G>(g: G, points: &[(T, C<T>)]) -> Result<T>
where
    T: Real,
    G: Fn(T, C<T>) -> Result<C<T>>,
{
    let h = T::lit(BURGERS_STEP);
    let two_h = h * T::lit(2.0);
    let dz = cplx(h, T::zero());
    let mut worst = T::zero();
    for &(t, z) in points {
        if !(t >= T::zero()) {
            return Err(Error::invalid("Burgers grid needs t >= 0"));
        }
        let g0 = g(t, z)?;
        let gt = if t >= h {
            (g(t + h, z)? - g(t - h, z)?) / two_h
        } else {
            (g(t + h, z)? * T::lit(4.0) - g(t + two_h, z)? - g0 * T::lit(3.0)) / two_h
        };
        let gz = (g(t, z + dz)? - g(t, z - dz)?) / two_h;
        worst = worst.max((gt + g0 * gz).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn hsqrt(w: Complex64) -> Complex64 {
        let s = w.sqrt();
        if s.im < 0.0 {
            -s
        } else {
            s
        }
    }

    #[test]
    fn monotone_family_of_constant_driver_is_arcsine() {
        let fam = monotone_family(Driving::constant(0.0));
        let grid: Vec<f64> = (0..=2000).map(|k| -1.2 + 2.4 * k as f64 / 2000.0).collect();
        let m = fam.sigma(0.0, 0.5, &grid, 1e-4).unwrap();
        let arc = Measure::arcsine(0.5).unwrap();
        for x in [-0.9, -0.5, 0.0, 0.3, 0.85] {
            assert!((m.density_at(x).unwrap() - arc.density_at(x).unwrap()).abs() < 1e-2);
        }
        let z = Complex64::new(0.3, 0.4);
        assert_eq!(fam.eval(0.6, 0.6, z).unwrap(), z);
    }

    #[test]
    fn two_segment_families() {
        let d = Driving::step_atoms(0.5, &[0.0, 1.0]).unwrap();
        let mono = monotone_family(d.clone());
        let anti = anti_monotone_family(d);
        // oracle: compositions of shifted arcsine F-maps
        let f = |c: f64, z: Complex64| c + hsqrt((z - c) * (z - c) - 1.0);
        let z = Complex64::new(0.2, 1.0);
        let m = mono.eval(0.0, 1.0, z).unwrap();
        let a = anti.eval(0.0, 1.0, z).unwrap();
        assert!((m - f(1.0, f(0.0, z))).norm() < 1e-8);
        assert!((a - f(0.0, f(1.0, z))).norm() < 1e-8);
        assert!((m - a).norm() > 1e-6);
    }

    #[test]
    fn free_family_examples() {
        let fam = free_family(Driving::constant(0.0));
        let z = Complex64::new(0.1, -0.3);
        assert!((fam.eval(0.2, 0.9, z).unwrap() - z * 0.7).norm() < 1e-14);
        assert_eq!(fam.eval(0.5, 0.5, z).unwrap(), Complex64::new(0.0, 0.0));
        // atomic path, closed-form antiderivative of 1/(w - a - b tau)
        let d = Driving::atom_path(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let fam = free_family(d);
        let w = z.inv();
        let exact = ((w - 0.0).ln() - (w - 1.0).ln()) * 1.0;
        assert!((fam.eval(0.0, 1.0, z).unwrap() - exact).norm() < 1e-12);
    }

    #[test]
    fn free_family_variance_via_cauchy() {
        let fam = free_family(Driving::step_atoms(0.5, &[0.0, 0.5]).unwrap());
        let (mean, var): (f64, f64) = transforms::asymptotic_moments(&fam.sigma_f(0.0, 1.0).unwrap()).unwrap();
        // R(z) = z/2 + (z/2)/(1 - z/2): free cumulants 0, 1, 1/4, ...
        assert!(mean.abs() < 1e-3, "{mean}");
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn sle_driver_properties() {
        let zero = sle_driving(0.0, 0.1, 1.0, 3).unwrap();
        let Driving::AtomPath { values, times } = &zero else { panic!() };
        assert!(values.iter().all(|v| *v == 0.0));
        assert_eq!(times.len(), 11);
        assert_eq!(*times.last().unwrap(), 1.0);
        assert_eq!(sle_driving(2.0, 1.0 / 64.0, 1.0, 7).unwrap(), sle_driving(2.0, 1.0 / 64.0, 1.0, 7).unwrap());
        assert_ne!(sle_driving(2.0, 1.0 / 64.0, 1.0, 7).unwrap(), sle_driving(2.0, 1.0 / 64.0, 1.0, 8).unwrap());
        let d = sle_driving(2.0, 0.3, 1.0, 1).unwrap();
        let Driving::AtomPath { times, .. } = &d else { panic!() };
        assert_eq!(times.len(), 5);
        assert!(sle_driving(-1.0, 0.1, 1.0, 0).is_err());
        assert!(sle_driving(1.0, 2.0, 1.0, 0).is_err());
    }

    #[test]
    fn sle_marginal_variance() {
        // Monte-Carlo oracle: Var U(T) / (kappa/2) = T
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|seed| {
                let d = sle_driving(4.0, 0.25, 1.0, seed).unwrap();
                d.value_at(1.0).unwrap() / 2f64.sqrt()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn chain_examples() {
        let z = Complex64::new(0.4, 0.9);
        let zero = Driving::constant_path(0.0, 1.0).unwrap();
        let chain = chain_approximation(&zero, 0.125, 8, ShiftBase::Left).unwrap();
        let arc = transforms::f_transform(&Measure::arcsine(1.0).unwrap());
        assert!((chain.eval(z).unwrap() - arc.eval(z).unwrap()).norm() < 1e-12);

        let vals = [0.0, 0.3, -0.2, 0.5];
        let d = Driving::step_atoms(0.25, &vals).unwrap();
        let chain = chain_approximation(&d, 0.25, 4, ShiftBase::Left).unwrap();
        let ode = loewner::flow_reverse(&d, 0.0, 1.0, z, &FlowOptions::default()).unwrap();
        assert!((chain.eval(z).unwrap() - ode).norm() < 1e-8);
        let (_, var) = transforms::asymptotic_moments(&chain).unwrap();
        assert!((var - 1.0).abs() < 0.01);
        let right = chain_approximation(&d, 0.25, 4, ShiftBase::Right).unwrap();
        assert!((right.eval(z).unwrap() - ode).norm() > 1e-6);
        assert!(chain_approximation(&Driving::SemicircleFamily, 0.25, 4, ShiftBase::Left).is_err());
        assert!(chain_approximation(&zero, 0.25, 5, ShiftBase::Left).is_err());
    }

    #[test]
    fn burgers_closed_form_and_initial_slice() {
        let g = |t: f64, z: Complex64| Ok(2.0 / (z + hsqrt(z * z - 4.0 * t)));
        let pts: Vec<(f64, Complex64)> = [0.3, 0.7, 1.0]
            .iter()
            .flat_map(|&t| [(t, Complex64::new(0.0, 1.0)), (t, Complex64::new(1.5, 0.5))])
            .collect();
        assert!(burgers_residual_with(g, &pts).unwrap() < 1e-6);
        let pts = [(0.0, Complex64::new(0.0, 2.0)), (0.0, Complex64::new(1.0, 1.0))];
        assert!(burgers_residual_with(g, &pts).unwrap() < 1e-3);
    }

    #[test]
    fn burgers_fixed_point_and_non_fixed_point() {
        let pts = [(0.5, Complex64::new(0.0, 1.0)), (1.0, Complex64::new(1.0, 0.5))];
        let opts = FlowOptions::default();
        assert!(burgers_residual(&Driving::SemicircleFamily, &pts, &opts).unwrap() < 1e-3);
        assert!(burgers_residual(&Driving::constant(0.0), &pts, &opts).unwrap() > 1e-2);
    }
}
