//! Scalar abstraction shared by every numeric kernel.
//!
//! All kernels are written against [`Real`] so they run in `f64` (the
//! default, see the aliases at the crate root) or `f32`. Tolerances are
//! given as `f64` literals and clamped to a few ulps of the working type
//! with [`Real::tol`], so an `f32` build never waits on an unreachable
//! `1e-12` target.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Tolerance `x`, never tighter than 64 ulps at unit scale.
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(64.0))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the working scalar.
pub type C<T> = Complex<T>;

pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

pub(crate) fn is_finite<T: Real>(z: C<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Square root of `w` on the branch that keeps `sqrt(z^2 - c)` a Nevanlinna
/// function of `z`: positive imaginary part for `Im z > 0`, and sign matching
/// `Re z` on the real axis. Callers reflect lower half-plane arguments.
pub(crate) fn nevanlinna_sqrt<T: Real>(w: C<T>, z: C<T>) -> C<T> {
    let s = w.sqrt();
    if z.im > T::zero() {
        if s.im < T::zero() {
            -s
        } else {
            s
        }
    } else if s.re * z.re < T::zero() {
        -s
    } else {
        s
    }
}
