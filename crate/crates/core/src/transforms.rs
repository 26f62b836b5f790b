//! Cauchy, F and R transforms, Stieltjes–Perron inversion and asymptotic
//! moment extraction.
//!
//! Transforms are carried around as [`AnalyticMap`]s: immutable, cheaply
//! clonable closures tagged with what they represent. Cauchy transforms of
//! real measures are evaluated on both half-planes through `G(conj z) =
//! conj G(z)`; R-transforms live near the origin of the lower half-plane
//! (and, by the same symmetry, the upper one).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::{DensityGrid, Measure};
use crate::quad;
use crate::scalar::{cplx, is_finite, nevanlinna_sqrt, Real, C};

/// What an [`AnalyticMap`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Cauchy,
    F,
    R,
}

/// Mean and variance read off the behaviour at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics<T> {
    pub mean: T,
    pub var: T,
}

/// Annulus `inner <= |w| <= outer` on which an R-transform is trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RDomain<T> {
    pub inner: T,
    pub outer: T,
}

impl<T: Real> RDomain<T> {
    pub fn everywhere() -> Self {
        RDomain { inner: T::zero(), outer: T::infinity() }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let inner = self.inner.max(other.inner);
        let outer = self.outer.min(other.outer);
        (inner <= outer).then_some(RDomain { inner, outer })
    }
}

type EvalFn<T> = dyn Fn(C<T>) -> Result<C<T>> + Send + Sync;

/// An evaluable holomorphic map on the upper half-plane.
#[derive(Clone)]
pub struct AnalyticMap<T> {
    kind: MapKind,
    eval: Arc<EvalFn<T>>,
    meta: Option<Asymptotics<T>>,
    domain: Option<RDomain<T>>,
}

impl<T> fmt::Debug for AnalyticMap<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticMap").field("kind", &self.kind).field("meta", &self.meta).finish_non_exhaustive()
    }
}

impl<T: Real> AnalyticMap<T> {
    pub fn new<F>(kind: MapKind, eval: F) -> Self
    where
        F: Fn(C<T>) -> Result<C<T>> + Send + Sync + 'static,
    {
        AnalyticMap { kind, eval: Arc::new(eval), meta: None, domain: None }
    }

    pub fn with_meta(mut self, meta: Option<Asymptotics<T>>) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_domain(mut self, domain: RDomain<T>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn meta(&self) -> Option<Asymptotics<T>> {
        self.meta
    }

    /// Evaluation domain of an R-transform; `None` for other kinds.
    pub fn domain(&self) -> Option<RDomain<T>> {
        match self.kind {
            MapKind::R => Some(self.domain.unwrap_or_else(RDomain::everywhere)),
            _ => None,
        }
    }

    pub fn eval(&self, z: C<T>) -> Result<C<T>> {
        (self.eval)(z)
    }

    /// `G <-> F = 1/G`; R-transforms are returned unchanged.
    pub fn reciprocal(&self) -> Self {
        let kind = match self.kind {
            MapKind::Cauchy => MapKind::F,
            MapKind::F => MapKind::Cauchy,
            MapKind::R => return self.clone(),
        };
        let inner = self.eval.clone();
        AnalyticMap { kind, eval: Arc::new(move |z| inner(z).map(|v| v.inv())), meta: self.meta, domain: None }
    }

    pub(crate) fn expect_kind(&self, kind: MapKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::invalid(format!("expected a {:?} map, got {:?}", kind, self.kind)))
        }
    }
}

/// Cauchy transform `int dmu(x) / (z - x)` of `m` at a non-real `z`.
pub fn cauchy_eval<T: Real>(m: &Measure<T>, z: C<T>) -> C<T> {
    if z.im < T::zero() {
        return cauchy_eval(m, z.conj()).conj();
    }
    let two = T::lit(2.0);
    match m {
        Measure::Dirac { at } => (z - *at).inv(),
        Measure::Semicircle { center, var } => {
            let w = z - *center;
            let s = nevanlinna_sqrt(w * w - T::lit(4.0) * *var, w);
            (w + s).inv() * two
        }
        Measure::Arcsine { center, var } => {
            let w = z - *center;
            nevanlinna_sqrt(w * w - two * *var, w).inv()
        }
        Measure::Empirical(e) => {
            let mut g = cplx(T::zero(), T::zero());
            for &(x, mass) in e.atoms() {
                g = g + (z - x).inv() * mass;
            }
            if let Some(d) = e.density() {
                g = g + density_cauchy(d, z);
            }
            g
        }
    }
}

/// Exact Cauchy transform of the piecewise-linear interpolant.
fn density_cauchy<T: Real>(d: &DensityGrid<T>, z: C<T>) -> C<T> {
    let vals = d.values();
    let h = d.spacing();
    let mut acc = cplx(T::zero(), T::zero());
    let mut log_lo = (z - d.node(0)).ln();
    for i in 0..vals.len() - 1 {
        let x_lo = d.node(i);
        let log_hi = (z - d.node(i + 1)).ln();
        let (v_lo, v_hi) = (vals[i], vals[i + 1]);
        if v_lo != T::zero() || v_hi != T::zero() {
            let slope = (v_hi - v_lo) / h;
            let linear_at_z = (z - x_lo) * slope + v_lo;
            acc = acc + linear_at_z * (log_lo - log_hi) - cplx(slope * h, T::zero());
        }
        log_lo = log_hi;
    }
    acc
}

/// F-transform `1/G` evaluated directly (closed forms where available).
pub fn f_eval<T: Real>(m: &Measure<T>, z: C<T>) -> C<T> {
    if z.im < T::zero() {
        return f_eval(m, z.conj()).conj();
    }
    let two = T::lit(2.0);
    match m {
        Measure::Dirac { at } => z - *at,
        Measure::Semicircle { center, var } => {
            let w = z - *center;
            (w + nevanlinna_sqrt(w * w - T::lit(4.0) * *var, w)) / two
        }
        Measure::Arcsine { center, var } => {
            let w = z - *center;
            nevanlinna_sqrt(w * w - two * *var, w)
        }
        Measure::Empirical(_) => cauchy_eval(m, z).inv(),
    }
}

fn measure_meta<T: Real>(m: &Measure<T>) -> Option<Asymptotics<T>> {
    m.mean_var().ok().map(|(mean, var)| Asymptotics { mean, var })
}

/// Cauchy transform of `m` as an [`AnalyticMap`].
pub fn cauchy<T: Real>(m: &Measure<T>) -> AnalyticMap<T> {
    let m2 = m.clone();
    AnalyticMap::new(MapKind::Cauchy, move |z| Ok(cauchy_eval(&m2, z))).with_meta(measure_meta(m))
}

/// F-transform of `m` as an [`AnalyticMap`].
pub fn f_transform<T: Real>(m: &Measure<T>) -> AnalyticMap<T> {
    let m2 = m.clone();
    AnalyticMap::new(MapKind::F, move |z| Ok(f_eval(&m2, z))).with_meta(measure_meta(m))
}

/// Smallest height of the imaginary-axis probes whose images form the
/// trusted domain of a Newton-inverted R-transform.
pub const R_DOMAIN_MIN_HEIGHT: f64 = 0.05;

const NEWTON_MAX_ITER: usize = 100;

/// Central-difference derivative along the real direction (keeps the
/// stencil inside the half-plane of `w`).
fn derivative<T: Real>(f: &dyn Fn(C<T>) -> Result<C<T>>, w: C<T>) -> Result<C<T>> {
    let h = (T::epsilon().cbrt() * w.norm().max(T::one())).min(w.im.abs() * T::lit(0.1));
    let h = if h > T::zero() { h } else { T::epsilon().cbrt() };
    let hp = cplx(h, T::zero());
    Ok((f(w + hp)? - f(w - hp)?) / (hp * T::lit(2.0)))
}

/// Damped Newton for `f(w) = 0` with iterates confined to the half-plane
/// `sign(Im w) = side`. Converged when `|f(w)| <= tol * scale`.
fn damped_newton<T: Real>(
    f: &dyn Fn(C<T>) -> Result<C<T>>,
    seed: C<T>,
    side: T,
    scale: T,
    what: &'static str,
) -> Result<C<T>> {
    let tol = T::tol(1e-14) * scale;
    let mut w = seed;
    let mut r = f(w)?;
    for _ in 0..NEWTON_MAX_ITER {
        if r.norm() <= tol {
            return Ok(w);
        }
        let step = r / derivative(f, w)?;
        if !is_finite(step) {
            break;
        }
        let mut lambda = T::one();
        let mut moved = false;
        for _ in 0..40 {
            let trial = w - step * lambda;
            if trial.im * side > T::zero() {
                if let Ok(rt) = f(trial) {
                    if is_finite(rt) && rt.norm() < r.norm() {
                        w = trial;
                        r = rt;
                        moved = true;
                        break;
                    }
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        if !moved {
            // Stalled at rounding level counts as converged.
            if r.norm() <= tol * T::lit(100.0) {
                return Ok(w);
            }
            break;
        }
    }
    if r.norm() <= tol {
        return Ok(w);
    }
    Err(Error::NoConvergence { what, iterations: NEWTON_MAX_ITER })
}

const CONTINUATION_STEPS: usize = 32;

/// Solves `f(x, path.last()) = 0`: first directly from `seed(target)`, then,
/// if that fails, by walking the targets in `path` and seeding each solve
/// with the previous root.
fn solve_along<T: Real>(
    f: &dyn Fn(C<T>, C<T>) -> Result<C<T>>,
    path: &[C<T>],
    seed: impl Fn(C<T>) -> C<T>,
    side: T,
    what: &'static str,
) -> Result<C<T>> {
    let target = *path.last().expect("non-empty continuation path");
    let direct = damped_newton(&|x| f(x, target), seed(target), side, target.norm(), what);
    if direct.is_ok() {
        return direct;
    }
    let mut x = seed(path[0]);
    for &t in path {
        x = damped_newton(&|y| f(y, t), x, side, t.norm(), what)?;
    }
    Ok(x)
}

/// R-transform `R(w) = V(w) - 1/w` where `G(V(w)) = w`, by damped Newton
/// seeded at `1/w`.
pub fn r_transform<T: Real>(g: &AnalyticMap<T>) -> Result<AnalyticMap<T>> {
    g.expect_kind(MapKind::Cauchy)?;
    let outer = g.eval(cplx(T::zero(), T::lit(R_DOMAIN_MIN_HEIGHT)))?.norm();
    let g2 = g.clone();
    let eval = move |w: C<T>| -> Result<C<T>> {
        if !(w.im != T::zero()) || !is_finite(w) {
            return Err(Error::invalid("R-transform argument must be non-real"));
        }
        let residual = |v: C<T>, target: C<T>| g2.eval(v).map(|x| x - target);
        let side = -w.im.signum();
        let path: Vec<C<T>> = (1..=CONTINUATION_STEPS)
            .map(|k| w * T::from_usize(k).unwrap() / T::from_usize(CONTINUATION_STEPS).unwrap())
            .collect();
        let v = solve_along(&residual, &path, |t: C<T>| t.inv(), side, "R-transform Newton inversion")?;
        Ok(v - w.inv())
    };
    let meta = g.meta();
    Ok(AnalyticMap::new(MapKind::R, eval).with_meta(meta).with_domain(RDomain { inner: T::zero(), outer }))
}

/// Cauchy transform recovered from an R-transform: solves
/// `R(w) + 1/w = z` for `w = G(z)`.
pub fn cauchy_from_r<T: Real>(r: &AnalyticMap<T>) -> Result<AnalyticMap<T>> {
    r.expect_kind(MapKind::R)?;
    let r2 = r.clone();
    let eval = move |z: C<T>| -> Result<C<T>> {
        if !(z.im != T::zero()) {
            return Err(Error::invalid("Cauchy transform argument must be non-real"));
        }
        let residual = |w: C<T>, target: C<T>| r2.eval(w).map(|v| v + w.inv() - target);
        let side = -z.im.signum();
        let lift = T::lit(10.0) * z.norm().max(T::one()) * z.im.signum();
        let n = T::from_usize(CONTINUATION_STEPS).unwrap();
        let path: Vec<C<T>> =
            (0..=CONTINUATION_STEPS).map(|k| z + cplx(T::zero(), lift * (n - T::from_usize(k).unwrap()) / n)).collect();
        solve_along(&residual, &path, |t: C<T>| t.inv(), side, "Cauchy transform from R")
    };
    Ok(AnalyticMap::new(MapKind::Cauchy, eval).with_meta(r.meta()))
}

/// Pole-detection threshold on `eta * |G(x + i eta)|`.
pub const ATOM_THRESHOLD: f64 = 0.1;
/// Tolerated shortfall of recovered total mass.
pub const MASS_DEFICIT_TOL: f64 = 1e-3;

/// Relative second difference above which a node counts as unresolved.
const UNRESOLVED_CURVATURE: f64 = 0.05;

/// Stieltjes–Perron inversion of a Cauchy transform on `grid`.
///
/// Density values are `-(1/pi) Im G(x + i eps)` Richardson-extrapolated over
/// `eps` and `eps/2`, with detected atoms removed first. Atoms are flagged
/// where `eta |G(x + i eta)|` exceeds [`ATOM_THRESHOLD`] at the probe height
/// `eta = max(eps, local grid spacing)`, located by a two-point pole fit and
/// weighed by shrinking `eta`. Nodes where the grid does not resolve the
/// density are replaced by cell averages. The result is normalised to unit
/// mass after checking that at most [`MASS_DEFICIT_TOL`] is missing.
pub fn invert_stieltjes<T: Real>(g: &AnalyticMap<T>, grid: &[T], eps: T) -> Result<Measure<T>> {
    g.expect_kind(MapKind::Cauchy)?;
    if grid.len() < 3 {
        return Err(Error::invalid("inversion grid needs at least three points"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("inversion grid must be strictly increasing"));
    }
    if !(eps >= T::lit(1e-8) && eps <= T::lit(1e-2)) {
        return Err(Error::invalid("eps must lie in [1e-8, 1e-2]"));
    }
    let at = |x: T, eta: T| g.eval(cplx(x, eta));
    let n = grid.len();

    // Atom candidates.
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        let left = if i > 0 { grid[i] - grid[i - 1] } else { grid[1] - grid[0] };
        let right = if i + 1 < n { grid[i + 1] - grid[i] } else { left };
        let eta = eps.max(left.max(right));
        scores.push((eta, eta * at(grid[i], eta)?.norm()));
    }
    let mut atoms: Vec<(T, T)> = Vec::new();
    let mut i = 0;
    while i < n {
        if scores[i].1 <= T::lit(ATOM_THRESHOLD) {
            i += 1;
            continue;
        }
        let mut best = i;
        let mut j = i;
        while j < n && scores[j].1 > T::lit(ATOM_THRESHOLD) {
            if scores[j].1 > scores[best].1 {
                best = j;
            }
            j += 1;
        }
        if let Some(atom) = locate_atom(g, grid[best], scores[best].0, eps)? {
            if !atoms.iter().any(|a| (a.0 - atom.0).abs() < T::tol(1e-6)) {
                atoms.push(atom);
            }
        }
        i = j;
    }

    let continuous = |z: C<T>| -> Result<C<T>> {
        let mut v = g.eval(z)?;
        for &(x, m) in &atoms {
            v = v - (z - x).inv() * m;
        }
        Ok(v)
    };
    let inv_pi = T::FRAC_1_PI();
    let smoothed = |x: T, eta: T| continuous(cplx(x, eta)).map(|v| -v.im * inv_pi);

    let extrapolated = |x: T| -> Result<T> {
        let coarse = smoothed(x, eps)?;
        let fine = smoothed(x, eps * T::lit(0.5))?;
        Ok(fine * T::lit(2.0) - coarse)
    };
    let mut values = Vec::with_capacity(n);
    for &x in grid {
        values.push(extrapolated(x)?.max(T::zero()));
    }

    // Nodes the grid does not resolve (edge singularities) carry their
    // dual-cell average, so the trapezoid mass matches the true mass.
    let mut averaged = values.clone();
    for i in 0..n {
        let (l, r) = (values[i.saturating_sub(1)], values[(i + 1).min(n - 1)]);
        let (l, r) = if i == 0 {
            (r, r)
        } else if i + 1 == n {
            (l, l)
        } else {
            (l, r)
        };
        let curvature = (l - values[i] * T::lit(2.0) + r).abs();
        if !(curvature > T::lit(UNRESOLVED_CURVATURE) * (l + values[i] + r)) {
            continue;
        }
        let a = if i == 0 { grid[0] } else { (grid[i - 1] + grid[i]) * T::lit(0.5) };
        let b = if i + 1 == n { grid[n - 1] } else { (grid[i] + grid[i + 1]) * T::lit(0.5) };
        let cell = quad::integrate(
            |x| match extrapolated(x) {
                Ok(v) => cplx(v, T::zero()),
                Err(_) => cplx(T::nan(), T::zero()),
            },
            a,
            b,
            T::lit(MASS_DEFICIT_TOL * 1e-4),
        )?;
        averaged[i] = (cell.re / (b - a)).max(T::zero());
    }
    let values = averaged;

    // Mass of the smoothed continuous part over the grid span.
    let (lo, hi) = (grid[0], grid[n - 1]);
    let cont_mass = quad::integrate(
        |x| match smoothed(x, eps) {
            Ok(v) => cplx(v, T::zero()),
            Err(_) => cplx(T::nan(), T::zero()),
        },
        lo,
        hi,
        T::lit(MASS_DEFICIT_TOL * 1e-2),
    )?
    .re;
    let atom_mass: T = atoms.iter().map(|a| a.1).sum();
    let total = atom_mass + cont_mass.max(T::zero());
    if !(total >= T::one() - T::lit(MASS_DEFICIT_TOL)) {
        return Err(Error::MassDeficit { mass: total.as_f64() });
    }

    // Uniform grid for storage.
    let uniform = resample_uniform(grid, &values);
    let grid_mass = DensityGrid::new(lo, hi, uniform.clone())?.mass();
    let target = (T::one() - atom_mass).max(T::zero());
    let (density, atoms) = if target > T::tol(1e-6) && grid_mass > T::zero() {
        let scale = target / grid_mass;
        (Some(DensityGrid::new(lo, hi, uniform.iter().map(|v| *v * scale).collect())?), atoms)
    } else {
        let scale = T::one() / atom_mass;
        (None, atoms.into_iter().map(|(x, m)| (x, m * scale)).collect())
    };
    Measure::empirical(atoms, density)
}

/// Two-point pole fit followed by Richardson-refined residues.
/// Returns `None` when the candidate is a non-atomic singularity.
fn locate_atom<T: Real>(g: &AnalyticMap<T>, x_start: T, eta_start: T, eps: T) -> Result<Option<(T, T)>> {
    // Fits m / (z - x0) through heights eta and eta/2 above x.
    let fit = |x: T, eta: T| -> Result<Option<(T, T)>> {
        let z1 = cplx(x, eta);
        let z2 = cplx(x, eta * T::lit(0.5));
        let (g1, g2) = (g.eval(z1)?, g.eval(z2)?);
        let pole = (g1 * z1 - g2 * z2) / (g1 - g2);
        let residue = g1 * (z1 - pole);
        Ok((is_finite(pole) && is_finite(residue)).then_some((pole.re, residue.re)))
    };
    let mut x0 = x_start;
    let mut eta = eta_start;
    while eta > eps {
        match fit(x0, eta)? {
            Some((x, _)) => x0 = x,
            None => return Ok(None),
        }
        eta = (eta * T::lit(0.25)).max(eps);
    }
    let mut m = [T::zero(); 3];
    for (k, scale) in [1.0, 0.25, 0.0625].into_iter().enumerate() {
        match fit(x0, eps * T::lit(scale))? {
            Some((x, mass)) => {
                x0 = x;
                m[k] = mass;
            }
            None => return Ok(None),
        }
    }
    let (d1, d2) = ((m[1] - m[0]).abs(), (m[2] - m[1]).abs());
    let converging = d2 <= T::lit(0.1) * m[2].abs() && (d2 <= d1 || d2 <= T::tol(1e-9) * m[2].abs());
    if !converging || !(m[2] > T::tol(1e-8)) {
        return Ok(None);
    }
    let refined = (m[2] * T::lit(4.0) - m[1]) / T::lit(3.0);
    Ok(Some((x0, refined.min(T::one()))))
}

fn resample_uniform<T: Real>(grid: &[T], values: &[T]) -> Vec<T> {
    let n = grid.len();
    let (lo, hi) = (grid[0], grid[n - 1]);
    let h = (hi - lo) / T::from_usize(n - 1).unwrap();
    let uniform =
        grid.iter().enumerate().all(|(i, x)| (*x - (lo + h * T::from_usize(i).unwrap())).abs() <= T::tol(1e-9) * h);
    if uniform {
        return values.to_vec();
    }
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let x = if i + 1 == n { hi } else { lo + h * T::from_usize(i).unwrap() };
        while j + 2 < n && grid[j + 1] < x {
            j += 1;
        }
        let frac = ((x - grid[j]) / (grid[j + 1] - grid[j])).max(T::zero()).min(T::one());
        out.push(values[j] * (T::one() - frac) + values[j + 1] * frac);
    }
    out
}

/// Heights used by [`asymptotic_moments`].
pub const FIT_HEIGHTS: [f64; 3] = [50.0, 100.0, 200.0];

/// Fits `F(iy) ~ iy - mean - var/(iy)` on `y in {50, 100, 200}`.
pub fn asymptotic_moments<T: Real>(f: &AnalyticMap<T>) -> Result<(T, T)> {
    f.expect_kind(MapKind::F)?;
    let mut means = Vec::new();
    let mut vars = Vec::new();
    let (mut num, mut den) = (T::zero(), T::zero());
    for y in FIT_HEIGHTS {
        let y = T::lit(y);
        let z = cplx(T::zero(), y);
        let d = f.eval(z)? - z;
        means.push(-d.re);
        vars.push(d.im * y);
        // least squares of Im d = var / y
        num = num + d.im / y;
        den = den + T::one() / (y * y);
    }
    let mean = means.iter().copied().sum::<T>() / T::lit(3.0);
    let var = num / den;
    let spread = vars.iter().fold(T::zero(), |acc, v| acc.max((*v - var).abs()));
    if spread > T::lit(0.01) * var.abs() + T::tol(1e-6) {
        return Err(Error::UnstableFit { estimates: vars.iter().map(|v| v.as_f64()).collect() });
    }
    Ok((mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn i(y: f64) -> Complex64 {
        Complex64::new(0.0, y)
    }

    /// Brute-force Cauchy transform with a cosine substitution, independent of
    /// the closed forms.
    fn brute_cauchy(m: &Measure<f64>, lo: f64, hi: f64, z: Complex64) -> Complex64 {
        let n = 200_000;
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let x = lo + (hi - lo) * (1.0 - th.cos()) / 2.0;
            let dx = (hi - lo) * th.sin() / 2.0 * std::f64::consts::PI / n as f64;
            s += m.density_at(x).unwrap() * dx / (z - x);
        }
        s
    }

    #[test]
    fn cauchy_examples() {
        assert!((cauchy_eval(&Measure::dirac(0.0), i(1.0)) - i(-1.0)).norm() < 1e-15);
        let sc = Measure::semicircle(1.0).unwrap();
        let g = cauchy_eval(&sc, i(2.0));
        assert!((g - i(-0.414_213_562_373_095)).norm() < 1e-12);
        assert!((g - brute_cauchy(&sc, -2.0, 2.0, i(2.0))).norm() < 1e-8);
        let arc = Measure::arcsine(1.0).unwrap();
        let ga = cauchy_eval(&arc, i(2.0));
        assert!((ga - i(-0.408_248_290_463_863)).norm() < 1e-12);
        let r = 2f64.sqrt();
        assert!((ga - brute_cauchy(&arc, -r, r, i(2.0))).norm() < 1e-8);
        // off-axis points against quadrature as well
        for z in [Complex64::new(1.5, 0.3), Complex64::new(-0.7, 1.1)] {
            assert!((cauchy_eval(&sc, z) - brute_cauchy(&sc, -2.0, 2.0, z)).norm() < 1e-7);
            assert!((cauchy_eval(&arc, z) - brute_cauchy(&arc, -r, r, z)).norm() < 1e-6);
        }
    }

    #[test]
    fn f_examples() {
        let z = Complex64::new(0.3, 1.7);
        assert!((f_eval(&Measure::dirac(0.8), z) - (z - 0.8)).norm() < 1e-15);
        assert!((f_eval(&Measure::arcsine(1.0).unwrap(), i(2.0)) - i(2.449_489_742_783_178)).norm() < 1e-12);
        assert!((f_eval(&Measure::semicircle(1.0).unwrap(), i(2.0)) - i(2.414_213_562_373_095)).norm() < 1e-12);
        let f = f_transform(&Measure::semicircle(1.0).unwrap());
        let g = cauchy(&Measure::semicircle(1.0).unwrap());
        assert!((f.eval(z).unwrap() * g.eval(z).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn empirical_cauchy_matches_quadrature() {
        let grid = DensityGrid::new(-1.0, 2.0, vec![0.0, 0.4, 0.2, 0.3, 0.0]).unwrap();
        let mass = grid.mass();
        let scaled = DensityGrid::new(-1.0, 2.0, grid.values().iter().map(|v| v * 0.6 / mass).collect()).unwrap();
        let m = Measure::empirical(vec![(3.0, 0.4)], Some(scaled)).unwrap();
        let z = Complex64::new(0.4, 0.05);
        let direct =
            crate::quad::integrate(|x: f64| Complex64::new(m.density_at(x).unwrap(), 0.0) / (z - x), -1.0, 2.0, 1e-12)
                .unwrap()
                + 0.4 / (z - 3.0);
        assert!((cauchy_eval(&m, z) - direct).norm() < 1e-10);
        // lower half-plane by reflection
        assert!((cauchy_eval(&m, z.conj()) - direct.conj()).norm() < 1e-10);
    }

    #[test]
    fn r_transform_examples() {
        let w = Complex64::new(0.1, -0.2);
        let rd = r_transform(&cauchy(&Measure::dirac(0.7))).unwrap();
        assert!((rd.eval(w).unwrap() - 0.7).norm() < 1e-12);
        for var in [0.5, 1.0, 2.0] {
            let r = r_transform(&cauchy(&Measure::semicircle(var).unwrap())).unwrap();
            for s in [0.01, 0.05, 0.1, 0.2, 0.3] {
                let w = Complex64::new(0.0, -s);
                assert!((r.eval(w).unwrap() / w - var).norm() < 1e-8, "var={var} s={s}");
            }
        }
        // shifted semicircle through a gridded (quadrature) Cauchy transform
        let sc = Measure::semicircle(1.0).unwrap().shift(1.0);
        let n = 4001;
        let vals: Vec<f64> = (0..n).map(|k| sc.density_at(-1.0 + 4.0 * k as f64 / (n - 1) as f64).unwrap()).collect();
        let grid = DensityGrid::new(-1.0, 3.0, vals).unwrap();
        let scale = 1.0 / grid.mass();
        let gridded = Measure::empirical(
            vec![],
            Some(DensityGrid::new(-1.0, 3.0, grid.values().iter().map(|v| v * scale).collect()).unwrap()),
        )
        .unwrap();
        let r = r_transform(&cauchy(&gridded)).unwrap();
        let w = Complex64::new(0.0, -0.2);
        assert!((r.eval(w).unwrap() - (1.0 + w)).norm() < 1e-3);
    }

    #[test]
    fn r_transform_rejects_real_and_far_points() {
        let r = r_transform(&cauchy(&Measure::arcsine(1.0).unwrap())).unwrap();
        assert!(r.eval(Complex64::new(0.5, 0.0)).is_err());
        // |G| <= 1/sqrt(2) on the imaginary axis: far outside the image
        assert!(matches!(r.eval(Complex64::new(0.0, -50.0)), Err(Error::NoConvergence { .. })));
        assert!(r_transform(&f_transform(&Measure::dirac(0.0))).is_err());
    }

    #[test]
    fn r_domain_reflects_image_of_axis() {
        let g = cauchy(&Measure::semicircle(1.0).unwrap());
        let r = r_transform(&g).unwrap();
        let d = r.domain().unwrap();
        assert_eq!(d.inner, 0.0);
        assert!((d.outer - g.eval(i(0.05)).unwrap().norm()).abs() < 1e-15);
    }

    #[test]
    fn cauchy_from_r_inverts() {
        let r = AnalyticMap::new(MapKind::R, |w: Complex64| Ok(w * 2.0));
        let g = cauchy_from_r(&r).unwrap();
        let sc2 = Measure::semicircle(2.0).unwrap();
        for z in [i(1.0), Complex64::new(1.0, 0.5), Complex64::new(-3.0, 0.2)] {
            assert!((g.eval(z).unwrap() - cauchy_eval(&sc2, z)).norm() < 1e-10);
        }
    }

    #[test]
    fn inversion_with_nodes_on_singular_edges() {
        // nodes hit the arcsine edges at +-1 exactly
        let arc = Measure::arcsine(0.5).unwrap();
        let grid: Vec<f64> = (0..=1300).map(|k| -1.3 + 2.6 * k as f64 / 1300.0).collect();
        let rec = invert_stieltjes(&cauchy(&arc), &grid, 1e-4).unwrap();
        for x in [-0.9, -0.5, 0.0, 0.3, 0.9] {
            assert!((rec.density_at(x).unwrap() - arc.density_at(x).unwrap()).abs() < 1e-2, "x={x}");
        }
    }

    #[test]
    fn stieltjes_inversion_examples() {
        let arc = Measure::arcsine(1.0).unwrap();
        let grid: Vec<f64> = (0..=3200).map(|k| -1.6 + 3.2 * k as f64 / 3200.0).collect();
        let rec = invert_stieltjes(&cauchy(&arc), &grid, 1e-4).unwrap();
        for k in 0..=260 {
            let x = -1.3 + k as f64 * 0.01;
            assert!((rec.density_at(x).unwrap() - arc.density_at(x).unwrap()).abs() < 1e-2, "x={x}");
        }
        let sc = Measure::semicircle(1.0).unwrap();
        let grid: Vec<f64> = (0..=2200).map(|k| -2.2 + 4.4 * k as f64 / 2200.0).collect();
        let rec = invert_stieltjes(&cauchy(&sc), &grid, 1e-4).unwrap();
        for k in 0..=380 {
            let x = -1.9 + k as f64 * 0.01;
            assert!((rec.density_at(x).unwrap() - sc.density_at(x).unwrap()).abs() < 1e-2, "x={x}");
        }
        let grid: Vec<f64> = (0..=200).map(|k| -1.0 + k as f64 * 0.01).collect();
        let rec = invert_stieltjes(&cauchy(&Measure::dirac(0.0)), &grid, 1e-4).unwrap();
        let Measure::Empirical(e) = rec else { panic!("empirical expected") };
        assert_eq!(e.atoms().len(), 1);
        assert!(e.atoms()[0].0.abs() < 1e-9);
        assert!((e.atoms()[0].1 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn stieltjes_atom_between_grid_points() {
        // half point mass off-grid, half semicircle
        let sc = cauchy(&Measure::semicircle(0.25).unwrap());
        let g = AnalyticMap::new(MapKind::Cauchy, move |z: Complex64| Ok(sc.eval(z)? * 0.5 + 0.5 / (z - 2.503)));
        let grid: Vec<f64> = (0..=1000).map(|k| -1.5 + 5.0 * k as f64 / 1000.0).collect();
        let rec = invert_stieltjes(&g, &grid, 1e-5).unwrap();
        let Measure::Empirical(e) = rec else { panic!() };
        assert_eq!(e.atoms().len(), 1, "{:?}", e.atoms());
        assert!((e.atoms()[0].0 - 2.503).abs() < 1e-6);
        assert!((e.atoms()[0].1 - 0.5).abs() < 1e-3);
    }

    #[test]
    fn stieltjes_mass_deficit_and_validation() {
        let g = cauchy(&Measure::semicircle(1.0).unwrap());
        let grid: Vec<f64> = (0..=100).map(|k| -1.0 + k as f64 * 0.02).collect();
        assert!(matches!(invert_stieltjes(&g, &grid, 1e-4), Err(Error::MassDeficit { .. })));
        assert!(invert_stieltjes(&g, &[0.0, 1.0, 0.5], 1e-4).is_err());
        assert!(invert_stieltjes(&g, &grid, 1e-1).is_err());
    }

    #[test]
    fn asymptotic_moment_examples() {
        for t in [0.5f64, 1.0, 3.0] {
            let (m, v) = asymptotic_moments(&f_transform(&Measure::arcsine(t).unwrap())).unwrap();
            assert!(m.abs() < 1e-9 && (v - t).abs() < 0.01 * t);
        }
        let (m, v) = asymptotic_moments(&f_transform(&Measure::dirac(0.4f64))).unwrap();
        assert!((m - 0.4).abs() < 1e-12 && v.abs() < 1e-9);
        let (m, v) = asymptotic_moments(&f_transform(&Measure::semicircle(1.0f64).unwrap().shift(0.0))).unwrap();
        assert!(m.abs() < 1e-9 && (v - 1.0).abs() < 0.01);
        // A map that is not z - mean - var/z at infinity
        let bad = AnalyticMap::new(MapKind::F, |z: Complex64| Ok(z + Complex64::new(0.0, 1.0) * z.norm().sqrt()));
        assert!(matches!(asymptotic_moments(&bad), Err(Error::UnstableFit { .. })));
    }
}
