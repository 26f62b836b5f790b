//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use num_complex::Complex;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Maximum bisection depth before giving up.
pub const MAX_DEPTH: usize = 30;

fn kronrod_step<T: Real, F: FnMut(T) -> C<T>>(f: &mut F, a: T, b: T) -> (C<T>, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let center = f(mid);
    let mut kron = center * T::lit(WGK[7]);
    let mut gauss = center * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).norm())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Each subinterval must meet its share of `tol` (proportional to its
/// length); refinement beyond [`MAX_DEPTH`] bisections is an error.
pub fn integrate<T: Real, F: FnMut(T) -> C<T>>(mut f: F, a: T, b: T, tol: T) -> Result<C<T>> {
    if a == b {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let total = (b - a).abs();
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut stack = vec![(a, b, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = kronrod_step(&mut f, lo, hi);
        let share = tol * (hi - lo).abs() / total;
        if err <= share || (hi - lo).abs() <= T::epsilon() * total {
            sum = sum + value;
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure { depth: MAX_DEPTH });
        } else {
            let mid = (lo + hi) * T::lit(0.5);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(sum)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> Result<T> {
    integrate(|x| Complex::new(f(x), T::zero()), a, b, tol).map(|c| c.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_real(|x: f64| x.powi(9) - 3.0 * x * x, -1.0, 2.0, 1e-12).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand() {
        // Lorentzian of width 1e-4 integrates to pi * (atan(1e4)+atan(1e4)) / pi.
        let eps = 1e-4;
        let v = integrate_real(|x: f64| eps / (x * x + eps * eps), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn depth_limit_is_reported() {
        let r = integrate_real(|x: f64| if x > 0.3 { 1.0 / (x - 0.3) } else { 0.0 }, 0.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
