use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::scalar::{Real, C};
use crate::transforms::cauchy_eval;

/// Driving family `t -> nu_t` of a Loewner chain.
#[derive(Debug, Clone, PartialEq)]
pub enum Driving<T> {
    /// `nu_t = delta_{U(t)}` with `U` piecewise linear through the samples.
    AtomPath { times: Vec<T>, values: Vec<T> },
    /// `nu_t = measures[i]` for `breakpoints[i] <= t < breakpoints[i + 1]`;
    /// the last measure holds forever.
    MeasurePath { breakpoints: Vec<T>, measures: Vec<Measure<T>> },
    /// `nu_t` is the centred semicircle law of variance `t`.
    SemicircleFamily,
}

/// Vector field of one smooth piece.
#[derive(Debug, Clone, Copy)]
pub enum Field<'a, T> {
    Atom { t_ref: T, u_ref: T, slope: T },
    Measure(&'a Measure<T>),
    Semicircle,
}

impl<T: Real> Field<'_, T> {
    /// `G_{nu_t}(z)`.
    pub fn eval(&self, t: T, z: C<T>) -> C<T> {
        match self {
            Field::Atom { t_ref, u_ref, slope } => (z - (*u_ref + *slope * (t - *t_ref))).inv(),
            Field::Measure(m) => cauchy_eval(m, z),
            Field::Semicircle => cauchy_eval(&Measure::Semicircle { center: T::zero(), var: t.max(T::zero()) }, z),
        }
    }
}

/// Restriction of a driving family to `[t0, t1]`.
#[derive(Debug, Clone, Copy)]
pub struct Piece<'a, T> {
    pub t0: T,
    pub t1: T,
    pub field: Field<'a, T>,
}

fn check_times<T: Real>(times: &[T], what: &str) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid(format!("{what} must not be empty")));
    }
    if times[0] != T::zero() {
        return Err(Error::invalid(format!("{what} must start at 0")));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(format!("{what} must be finite and strictly increasing")));
    }
    Ok(())
}

impl<T: Real> Driving<T> {
    pub fn atom_path(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        check_times(&times, "times")?;
        if values.len() != times.len() {
            return Err(Error::invalid("times and values differ in length"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("driver values must be finite"));
        }
        Ok(Driving::AtomPath { times, values })
    }

    pub fn measure_path(breakpoints: Vec<T>, measures: Vec<Measure<T>>) -> Result<Self> {
        check_times(&breakpoints, "breakpoints")?;
        if measures.len() != breakpoints.len() {
            return Err(Error::invalid("breakpoints and measures differ in length"));
        }
        Ok(Driving::MeasurePath { breakpoints, measures })
    }

    /// `nu_t = delta_u` for all `t >= 0`.
    pub fn constant(u: T) -> Self {
        Driving::MeasurePath { breakpoints: vec![T::zero()], measures: vec![Measure::dirac(u)] }
    }

    /// `U = u` on `[0, horizon]` as an atom path.
    pub fn constant_path(u: T, horizon: T) -> Result<Self> {
        Self::atom_path(vec![T::zero(), horizon], vec![u, u])
    }

    /// Piecewise-constant atomic driver: `U = values[i]` on `[i dt, (i + 1) dt)`.
    pub fn step_atoms(dt: T, values: &[T]) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::invalid("dt must be positive"));
        }
        let breakpoints = (0..values.len()).map(|i| dt * T::from_usize(i).unwrap()).collect();
        Self::measure_path(breakpoints, values.iter().map(|&u| Measure::dirac(u)).collect())
    }

    /// Largest time at which the driver is defined.
    pub fn horizon(&self) -> T {
        match self {
            Driving::AtomPath { times, .. } => *times.last().unwrap(),
            _ => T::infinity(),
        }
    }

    /// `U(t)` of an atom path.
    pub fn value_at(&self, t: T) -> Result<T> {
        let Driving::AtomPath { times, values } = self else {
            return Err(Error::invalid("driver is not an atom path"));
        };
        self.check_horizon(t)?;
        if t < T::zero() {
            return Err(Error::invalid("negative time"));
        }
        let i = times.partition_point(|&s| s <= t).saturating_sub(1);
        if i + 1 >= times.len() {
            return Ok(values[i]);
        }
        let frac = (t - times[i]) / (times[i + 1] - times[i]);
        Ok(values[i] + (values[i + 1] - values[i]) * frac)
    }

    pub(crate) fn check_horizon(&self, t: T) -> Result<()> {
        let h = self.horizon();
        if t > h {
            return Err(Error::HorizonExceeded { t: t.as_f64(), horizon: h.as_f64() });
        }
        Ok(())
    }

    /// Smooth pieces covering `[lo, hi]` in increasing order.
    pub fn pieces(&self, lo: T, hi: T) -> Result<Vec<Piece<'_, T>>> {
        if !(lo >= T::zero()) || !(lo <= hi) {
            return Err(Error::invalid("time interval must satisfy 0 <= lo <= hi"));
        }
        self.check_horizon(hi)?;
        let mut out = Vec::new();
        if lo == hi {
            return Ok(out);
        }
        match self {
            Driving::AtomPath { times, values } => {
                for i in 0..times.len() - 1 {
                    let (a, b) = (times[i].max(lo), times[i + 1].min(hi));
                    if a < b {
                        let slope = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
                        out.push(Piece {
                            t0: a,
                            t1: b,
                            field: Field::Atom { t_ref: times[i], u_ref: values[i], slope },
                        });
                    }
                }
            }
            Driving::MeasurePath { breakpoints, measures } => {
                for (i, m) in measures.iter().enumerate() {
                    let end = breakpoints.get(i + 1).copied().unwrap_or_else(T::infinity);
                    let (a, b) = (breakpoints[i].max(lo), end.min(hi));
                    if a < b {
                        out.push(Piece { t0: a, t1: b, field: Field::Measure(m) });
                    }
                }
            }
            Driving::SemicircleFamily => out.push(Piece { t0: lo, t1: hi, field: Field::Semicircle }),
        }
        Ok(out)
    }
}
