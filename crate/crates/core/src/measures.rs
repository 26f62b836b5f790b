//! Probability measures on the real line.
//!
//! A [`Measure`] is either one of the closed-form families used throughout
//! the crate (point mass, semicircle, arcsine) or an empirical measure made
//! of atoms plus a density sampled on a uniform grid and linearly
//! interpolated between nodes.

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::Real;

/// Density sampled on the uniform grid `a = x_0 < ... < x_{n-1} = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid<T> {
    a: T,
    b: T,
    values: Vec<T>,
}

impl<T: Real> DensityGrid<T> {
    pub fn new(a: T, b: T, values: Vec<T>) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid("density grid needs finite endpoints a < b"));
        }
        if values.len() < 2 {
            return Err(Error::invalid("density grid needs at least two nodes"));
        }
        if values.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("density values must be finite and non-negative"));
        }
        Ok(DensityGrid { a, b, values })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn spacing(&self) -> T {
        (self.b - self.a) / T::from_usize(self.values.len() - 1).unwrap()
    }

    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.values.len() {
            self.b
        } else {
            self.a + self.spacing() * T::from_usize(i).unwrap()
        }
    }

    /// Linear interpolation, zero outside `[a, b]`.
    pub fn eval(&self, x: T) -> T {
        if x < self.a || x > self.b {
            return T::zero();
        }
        let h = self.spacing();
        let n = self.values.len();
        let pos = (x - self.a) / h;
        let i = pos.floor().to_usize().unwrap_or(0).min(n - 2);
        let frac = pos - T::from_usize(i).unwrap();
        self.values[i] * (T::one() - frac) + self.values[i + 1] * frac
    }

    /// Trapezoid integral, exact for the interpolant.
    pub fn mass(&self) -> T {
        let h = self.spacing();
        let n = self.values.len();
        let inner: T = self.values[1..n - 1].iter().copied().sum();
        h * (inner + (self.values[0] + self.values[n - 1]) * T::lit(0.5))
    }
}

/// Atoms plus an optional gridded density.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical<T> {
    atoms: Vec<(T, T)>,
    density: Option<DensityGrid<T>>,
}

impl<T: Real> Empirical<T> {
    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&DensityGrid<T>> {
        self.density.as_ref()
    }

    pub fn atom_mass(&self) -> T {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// A probability measure on the real line.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure<T> {
    /// Point mass at `at`.
    Dirac {
        at: T,
    },
    /// Semicircle law `sqrt(4v - (x-c)^2) / (2 pi v)` on `[c - 2 sqrt v, c + 2 sqrt v]`.
    Semicircle {
        center: T,
        var: T,
    },
    /// Arcsine law `1 / (pi sqrt(2v - (x-c)^2))` on `[c - sqrt(2v), c + sqrt(2v)]`.
    Arcsine {
        center: T,
        var: T,
    },
    Empirical(Empirical<T>),
}

/// Raw moments `m_0, ..., m_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence<T> {
    pub values: Vec<T>,
}

impl<T: Real> MomentSequence<T> {
    /// Checks `m_0 = 1` and positive semidefiniteness of the Hankel matrix
    /// `(m_{i+j})` (largest square block that fits) up to `tol`.
    pub fn is_consistent(&self, tol: T) -> bool {
        let m = &self.values;
        if m.is_empty() || (m[0] - T::one()).abs() > tol {
            return false;
        }
        let k = (m.len() - 1) / 2 + 1;
        // LDL^T without pivoting; a negative pivot beyond tol means not PSD.
        let mut l = vec![vec![T::zero(); k]; k];
        let mut d = vec![T::zero(); k];
        for j in 0..k {
            let mut dj = m[2 * j];
            for p in 0..j {
                dj = dj - l[j][p] * l[j][p] * d[p];
            }
            if dj < -tol {
                return false;
            }
            d[j] = dj;
            for i in j + 1..k {
                let mut v = m[i + j];
                for p in 0..j {
                    v = v - l[i][p] * l[j][p] * d[p];
                }
                l[i][j] = if dj.abs() > tol { v / dj } else { T::zero() };
            }
        }
        true
    }
}

/// Closed support of the continuous part plus atom locations.
#[derive(Debug, Clone, PartialEq)]
pub struct Support<T> {
    pub interval: Option<(T, T)>,
    pub atoms: Vec<T>,
}

fn check_var<T: Real>(var: T) -> Result<T> {
    if var > T::zero() && var.is_finite() {
        Ok(var)
    } else {
        Err(Error::invalid("variance parameter must be strictly positive"))
    }
}

fn catalan(k: u32) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * 2.0 * (2.0 * f64::from(i) + 1.0) / (f64::from(i) + 2.0);
    }
    c
}

fn central_binomial(k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (2.0 * f64::from(k) - f64::from(i)) / (f64::from(i) + 1.0))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Maximum moment order supported by [`Measure::moments`].
pub const MAX_MOMENT_ORDER: usize = 16;

impl<T: Real> Measure<T> {
    pub fn dirac(at: T) -> Self {
        Measure::Dirac { at }
    }

    pub fn semicircle(var: T) -> Result<Self> {
        Ok(Measure::Semicircle { center: T::zero(), var: check_var(var)? })
    }

    pub fn arcsine(var: T) -> Result<Self> {
        Ok(Measure::Arcsine { center: T::zero(), var: check_var(var)? })
    }

    /// Atoms and/or density; total mass must be one within `1e-9`.
    pub fn empirical(atoms: Vec<(T, T)>, density: Option<DensityGrid<T>>) -> Result<Self> {
        for &(x, m) in &atoms {
            if !x.is_finite() || !(m >= T::zero() && m <= T::one()) {
                return Err(Error::invalid("atom masses must lie in [0, 1] at finite locations"));
            }
        }
        let total = atoms.iter().map(|a| a.1).sum::<T>() + density.as_ref().map_or(T::zero(), |d| d.mass());
        if (total - T::one()).abs() > T::tol(1e-9) {
            return Err(Error::invalid(format!("total mass {} differs from 1", total)));
        }
        Ok(Measure::Empirical(Empirical { atoms, density }))
    }

    /// Two-point law `p δ_x + (1-p) δ_y`.
    pub fn two_point(x: T, y: T, p: T) -> Result<Self> {
        Self::empirical(vec![(x, p), (y, T::one() - p)], None)
    }

    /// Density at `x`; zero outside the support.
    pub fn density_at(&self, x: T) -> Result<T> {
        let pi = T::PI();
        match self {
            Measure::Dirac { at } => {
                if x == *at {
                    Err(Error::AtomicPoint(x.as_f64()))
                } else {
                    Ok(T::zero())
                }
            }
            Measure::Semicircle { center, var } => {
                let y = x - *center;
                let r2 = T::lit(4.0) * *var;
                if y * y > r2 {
                    Ok(T::zero())
                } else {
                    Ok((r2 - y * y).sqrt() / (T::lit(2.0) * pi * *var))
                }
            }
            Measure::Arcsine { center, var } => {
                let y = x - *center;
                let r2 = T::lit(2.0) * *var;
                if y * y > r2 {
                    Ok(T::zero())
                } else {
                    Ok(T::one() / (pi * (r2 - y * y).sqrt()))
                }
            }
            Measure::Empirical(e) => {
                if e.atoms.iter().any(|a| a.0 == x && a.1 > T::zero()) {
                    return Err(Error::AtomicPoint(x.as_f64()));
                }
                Ok(e.density.as_ref().map_or(T::zero(), |d| d.eval(x)))
            }
        }
    }

    /// Raw moments of order `0..=n`, `n <= 16`.
    pub fn moments(&self, n: usize) -> Result<MomentSequence<T>> {
        if n > MAX_MOMENT_ORDER {
            return Err(Error::invalid(format!("moment order {} exceeds {}", n, MAX_MOMENT_ORDER)));
        }
        let values = match self {
            Measure::Dirac { at } => (0..=n).map(|k| at.powi(k as i32)).collect(),
            Measure::Semicircle { center, var } => {
                let central: Vec<f64> = (0..=n)
                    .map(|k| if k % 2 == 1 { 0.0 } else { catalan(k as u32 / 2) * var.as_f64().powi(k as i32 / 2) })
                    .collect();
                shift_moments(&central, *center)
            }
            Measure::Arcsine { center, var } => {
                let central: Vec<f64> = (0..=n)
                    .map(|k| {
                        if k % 2 == 1 {
                            0.0
                        } else {
                            central_binomial(k as u32 / 2) * (var.as_f64() / 2.0).powi(k as i32 / 2)
                        }
                    })
                    .collect();
                shift_moments(&central, *center)
            }
            Measure::Empirical(e) => {
                let mut out = vec![T::zero(); n + 1];
                for &(x, m) in &e.atoms {
                    for (k, o) in out.iter_mut().enumerate() {
                        *o = *o + m * x.powi(k as i32);
                    }
                }
                if let Some(d) = &e.density {
                    let tol = T::tol(1e-10);
                    for (k, o) in out.iter_mut().enumerate() {
                        let mut acc = T::zero();
                        for i in 0..d.values.len() - 1 {
                            let (lo, hi) = (d.node(i), d.node(i + 1));
                            let (vlo, vhi) = (d.values[i], d.values[i + 1]);
                            if vlo == T::zero() && vhi == T::zero() {
                                continue;
                            }
                            let cell = quad::integrate_real(
                                |x| (vlo + (vhi - vlo) * (x - lo) / (hi - lo)) * x.powi(k as i32),
                                lo,
                                hi,
                                tol * (hi - lo),
                            )?;
                            acc = acc + cell;
                        }
                        *o = *o + acc;
                    }
                }
                out
            }
        };
        Ok(MomentSequence { values })
    }

    /// Mean and variance.
    pub fn mean_var(&self) -> Result<(T, T)> {
        match self {
            Measure::Dirac { at } => Ok((*at, T::zero())),
            Measure::Semicircle { center, var } | Measure::Arcsine { center, var } => Ok((*center, *var)),
            Measure::Empirical(_) => {
                let m = self.moments(2)?.values;
                Ok((m[1], (m[2] - m[1] * m[1]).max(T::zero())))
            }
        }
    }

    /// Pushforward under `x -> x + a`.
    pub fn shift(&self, a: T) -> Self {
        match self {
            Measure::Dirac { at } => Measure::Dirac { at: *at + a },
            Measure::Semicircle { center, var } => Measure::Semicircle { center: *center + a, var: *var },
            Measure::Arcsine { center, var } => Measure::Arcsine { center: *center + a, var: *var },
            Measure::Empirical(e) => Measure::Empirical(Empirical {
                atoms: e.atoms.iter().map(|&(x, m)| (x + a, m)).collect(),
                density: e.density.as_ref().map(|d| DensityGrid { a: d.a + a, b: d.b + a, values: d.values.clone() }),
            }),
        }
    }

    /// Pushforward under `x -> lambda x`, `lambda > 0`.
    pub fn dilate(&self, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::invalid("dilation factor must be positive"));
        }
        let l2 = lambda * lambda;
        Ok(match self {
            Measure::Dirac { at } => Measure::Dirac { at: *at * lambda },
            Measure::Semicircle { center, var } => Measure::Semicircle { center: *center * lambda, var: *var * l2 },
            Measure::Arcsine { center, var } => Measure::Arcsine { center: *center * lambda, var: *var * l2 },
            Measure::Empirical(e) => Measure::Empirical(Empirical {
                atoms: e.atoms.iter().map(|&(x, m)| (x * lambda, m)).collect(),
                density: e.density.as_ref().map(|d| DensityGrid {
                    a: d.a * lambda,
                    b: d.b * lambda,
                    values: d.values.iter().map(|v| *v / lambda).collect(),
                }),
            }),
        })
    }

    pub fn support(&self) -> Support<T> {
        match self {
            Measure::Dirac { at } => Support { interval: None, atoms: vec![*at] },
            Measure::Semicircle { center, var } => {
                let r = T::lit(2.0) * var.sqrt();
                Support { interval: Some((*center - r, *center + r)), atoms: vec![] }
            }
            Measure::Arcsine { center, var } => {
                let r = (T::lit(2.0) * *var).sqrt();
                Support { interval: Some((*center - r, *center + r)), atoms: vec![] }
            }
            Measure::Empirical(e) => {
                let atoms = e.atoms.iter().filter(|a| a.1 > T::zero()).map(|a| a.0).collect();
                let interval = e.density.as_ref().and_then(|d| {
                    let n = d.values.len();
                    let first = d.values.iter().position(|v| *v > T::zero())?;
                    let last = d.values.iter().rposition(|v| *v > T::zero())?;
                    Some((d.node(first.saturating_sub(1)), d.node((last + 1).min(n - 1))))
                });
                Support { interval, atoms }
            }
        }
    }
}

/// Moments of `c + X` from central moments of `X`.
fn shift_moments<T: Real>(central: &[f64], c: T) -> Vec<T> {
    let c = c.as_f64();
    (0..central.len())
        .map(|k| {
            let v: f64 = (0..=k).map(|j| binomial(k, j) * central[j] * c.powi((k - j) as i32)).sum();
            T::lit(v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Brute-force midpoint rule, independent of the adaptive quadrature.
    fn midpoint_moment(f: impl Fn(f64) -> f64, lo: f64, hi: f64, k: i32) -> f64 {
        // substitution x = lo + (hi-lo)(1-cos th)/2 removes edge singularities
        let n = 200_000;
        let mut s = 0.0;
        for i in 0..n {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            let x = lo + (hi - lo) * (1.0 - th.cos()) / 2.0;
            let dx = (hi - lo) * th.sin() / 2.0 * std::f64::consts::PI / n as f64;
            s += f(x) * x.powi(k) * dx;
        }
        s
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn density_examples() {
        let sc = Measure::semicircle(1.0).unwrap();
        let arc = Measure::arcsine(1.0).unwrap();
        assert!(close(sc.density_at(0.0).unwrap(), 0.318_309_886_183_791, 1e-12));
        assert!(close(arc.density_at(0.0).unwrap(), 0.225_079_079_039_276_5, 1e-12));
        assert_eq!(sc.density_at(3.0).unwrap(), 0.0);
        assert!(matches!(Measure::dirac(1.0).density_at(1.0), Err(Error::AtomicPoint(_))));
        assert_eq!(Measure::dirac(1.0).density_at(0.5).unwrap(), 0.0);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(Measure::dirac(2.0).moments(3).unwrap().values, vec![1.0, 2.0, 4.0, 8.0]);
        let sc = Measure::semicircle(1.0).unwrap().moments(4).unwrap().values;
        let arc = Measure::arcsine(1.0).unwrap().moments(4).unwrap().values;
        for (got, want) in sc.iter().zip([1.0, 0.0, 1.0, 0.0, 2.0]) {
            assert!(close(*got, want, 1e-12));
        }
        for (got, want) in arc.iter().zip([1.0, 0.0, 1.0, 0.0, 1.5]) {
            assert!(close(*got, want, 1e-12));
        }
        assert!(Measure::dirac(0.0).moments(17).is_err());
    }

    #[test]
    fn closed_moments_match_brute_force() {
        let sc = Measure::semicircle(1.0).unwrap();
        let arc = Measure::arcsine(1.0).unwrap();
        let r = 2f64.sqrt();
        for k in 0..=6 {
            let want_sc = midpoint_moment(|x| sc.density_at(x).unwrap(), -2.0, 2.0, k);
            let want_arc = midpoint_moment(|x| arc.density_at(x).unwrap(), -r, r, k);
            assert!(close(sc.moments(6).unwrap().values[k as usize], want_sc, 1e-8), "sc k={k}");
            assert!(close(arc.moments(6).unwrap().values[k as usize], want_arc, 1e-8), "arc k={k}");
        }
    }

    #[test]
    fn shift_and_dilate() {
        assert_eq!(Measure::dirac(0.0).shift(1.5), Measure::dirac(1.5));
        assert_eq!(Measure::semicircle(1.0).unwrap().dilate(2.0).unwrap(), Measure::semicircle(4.0).unwrap());
        let m = Measure::arcsine(1.0).unwrap().shift(1.0).moments(2).unwrap().values;
        assert!(close(m[0], 1.0, 1e-12) && close(m[1], 1.0, 1e-12) && close(m[2], 2.0, 1e-12));
        assert!(Measure::dirac(1.0).dilate(0.0).is_err());
    }

    #[test]
    fn support_examples() {
        let s = Measure::semicircle(1.0).unwrap().support();
        assert_eq!(s, Support { interval: Some((-2.0, 2.0)), atoms: vec![] });
        let a = Measure::arcsine(2.0).unwrap().support();
        let (lo, hi) = a.interval.unwrap();
        assert!(close(lo, -2.0, 1e-15) && close(hi, 2.0, 1e-15));
        assert_eq!(Measure::dirac(-1.0).support(), Support { interval: None, atoms: vec![-1.0] });
    }

    #[test]
    fn empirical_validation_and_support() {
        let grid = DensityGrid::new(0.0, 1.0, vec![0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(Measure::empirical(vec![], Some(grid.clone())).is_err()); // mass 0.75
        let m = Measure::empirical(vec![(3.0, 0.25)], Some(grid)).unwrap();
        let s = m.support();
        assert_eq!(s.interval, Some((0.0, 1.0)));
        assert_eq!(s.atoms, vec![3.0]);
        assert!(matches!(m.density_at(3.0), Err(Error::AtomicPoint(_))));
        assert!(close(m.density_at(0.125).unwrap(), 0.5, 1e-15));
        assert!(Measure::<f64>::semicircle(0.0).is_err());
        assert!(DensityGrid::new(1.0, 0.0, vec![1.0, 1.0]).is_err());
        assert!(DensityGrid::new(0.0, 1.0, vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn empirical_density_integrates_to_continuous_mass() {
        // Sample the semicircle on a fine grid and check mass + moments.
        let sc = Measure::semicircle(1.0).unwrap();
        let n = 4001;
        let vals: Vec<f64> = (0..n).map(|i| sc.density_at(-2.0 + 4.0 * i as f64 / (n - 1) as f64).unwrap()).collect();
        let grid = DensityGrid::new(-2.0, 2.0, vals).unwrap();
        assert!(close(grid.mass(), 1.0, 1e-4));
        // Trapezoid of density_at at resolution >= 2000 equals 1 - atom mass.
        let mix =
            Measure::empirical(vec![(5.0, 0.5)], Some(DensityGrid::new(-1.0, 1.0, vec![0.25; 3]).unwrap())).unwrap();
        let m = 2001;
        let h = 2.0 / (m - 1) as f64;
        let trap: f64 = (0..m)
            .map(|i| {
                let x = -1.0 + h * i as f64;
                let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
                w * mix.density_at(x).unwrap()
            })
            .sum::<f64>()
            * h;
        assert!(close(trap, 0.5, 1e-6));
    }

    #[test]
    fn hankel_consistency() {
        let m = Measure::semicircle(1.0).unwrap().moments(8).unwrap();
        assert!(m.is_consistent(1e-8));
        let bad = MomentSequence { values: vec![1.0, 0.0, -1.0] };
        assert!(!bad.is_consistent(1e-8));
    }

    #[test]
    fn f32_path() {
        let m = Measure::<f32>::arcsine(1.0).unwrap().moments(4).unwrap().values;
        assert!((m[4] - 1.5).abs() < 1e-6);
    }
}
