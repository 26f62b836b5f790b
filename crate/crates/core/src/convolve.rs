//! Free, monotone and anti-monotone additive convolutions of transforms.
//!
//! Results stay symbolic: every operation returns an [`AnalyticMap`] that
//! evaluates its inputs lazily, so long chains of compositions never pass
//! through a grid. [`materialize`] turns a Cauchy map into a [`Measure`].

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::scalar::{cplx, is_finite, Real, C};
use crate::transforms::{self, AnalyticMap, Asymptotics, MapKind};

/// Picard tolerance of the subordination iteration.
pub const SUBORDINATION_TOL: f64 = 1e-12;
/// Iteration cap of the subordination iteration.
pub const SUBORDINATION_MAX_ITER: usize = 500;
/// Damping applied once the plain iteration oscillates.
pub const SUBORDINATION_DAMPING: f64 = 0.5;

fn composed_meta<T: Real>(a: Option<Asymptotics<T>>, b: Option<Asymptotics<T>>) -> Option<Asymptotics<T>> {
    let (a, b) = (a?, b?);
    let tiny = T::tol(1e-12);
    (a.mean.abs() <= tiny && b.mean.abs() <= tiny).then(|| Asymptotics { mean: a.mean + b.mean, var: a.var + b.var })
}

/// `F_{a > b} = F_a o F_b`.
pub fn monotone<T: Real>(fa: &AnalyticMap<T>, fb: &AnalyticMap<T>) -> Result<AnalyticMap<T>> {
    fa.expect_kind(MapKind::F)?;
    fb.expect_kind(MapKind::F)?;
    let (a, b) = (fa.clone(), fb.clone());
    let meta = composed_meta(fa.meta(), fb.meta());
    Ok(AnalyticMap::new(MapKind::F, move |z| a.eval(b.eval(z)?)).with_meta(meta))
}

/// `F_{a < b} = F_b o F_a`.
pub fn anti_monotone<T: Real>(fa: &AnalyticMap<T>, fb: &AnalyticMap<T>) -> Result<AnalyticMap<T>> {
    monotone(fb, fa)
}

/// Free convolution by adding R-transforms.
pub fn free_r<T: Real>(ra: &AnalyticMap<T>, rb: &AnalyticMap<T>) -> Result<AnalyticMap<T>> {
    ra.expect_kind(MapKind::R)?;
    rb.expect_kind(MapKind::R)?;
    let domain = ra.domain().unwrap().intersect(&rb.domain().unwrap()).ok_or(Error::DomainMismatch)?;
    let meta = match (ra.meta(), rb.meta()) {
        (Some(a), Some(b)) => Some(Asymptotics { mean: a.mean + b.mean, var: a.var + b.var }),
        _ => None,
    };
    let (a, b) = (ra.clone(), rb.clone());
    Ok(AnalyticMap::new(MapKind::R, move |w| Ok(a.eval(w)? + b.eval(w)?)).with_meta(meta).with_domain(domain))
}

/// Free convolution through the subordination function `omega_1`.
///
/// `omega_1(z)` is the attracting fixed point of
/// `w -> z + h_b(z + h_a(w))` with `h = F - id`; the result is
/// `z -> G_a(omega_1(z))`.
pub fn free_subordination<T: Real>(ga: &AnalyticMap<T>, gb: &AnalyticMap<T>) -> Result<AnalyticMap<T>> {
    ga.expect_kind(MapKind::Cauchy)?;
    gb.expect_kind(MapKind::Cauchy)?;
    let meta = match (ga.meta(), gb.meta()) {
        (Some(a), Some(b)) => Some(Asymptotics { mean: a.mean + b.mean, var: a.var + b.var }),
        _ => None,
    };
    let (a, b) = (ga.clone(), gb.clone());
    let eval = move |z: C<T>| -> Result<C<T>> {
        if z.im < T::zero() {
            return Ok(subordination(&a, &b, z.conj())?.1.conj());
        }
        if z.im == T::zero() {
            return Err(Error::invalid("subordination requires a non-real argument"));
        }
        Ok(subordination(&a, &b, z)?.1)
    };
    Ok(AnalyticMap::new(MapKind::Cauchy, eval).with_meta(meta))
}

/// Returns `(omega_1(z), G_a(omega_1(z)))` for `Im z > 0`.
pub fn subordination<T: Real>(ga: &AnalyticMap<T>, gb: &AnalyticMap<T>, z: C<T>) -> Result<(C<T>, C<T>)> {
    let h = |g: &AnalyticMap<T>, w: C<T>| -> Result<C<T>> { Ok(g.eval(w)?.inv() - w) };
    let step = |w: C<T>| -> Result<C<T>> {
        let w2 = z + h(ga, w)?;
        Ok(z + h(gb, w2)?)
    };
    let tol = T::tol(SUBORDINATION_TOL);
    let mut w = z;
    let mut damped = false;
    let mut last_move = T::infinity();
    for _ in 0..SUBORDINATION_MAX_ITER {
        let target = step(w)?;
        if !is_finite(target) {
            break;
        }
        let next = if damped { w + (target - w) * T::lit(SUBORDINATION_DAMPING) } else { target };
        let moved = (next - w).norm();
        if moved < tol * T::one().max(w.norm()) {
            let g = ga.eval(next)?;
            return Ok((next, g));
        }
        if !damped && moved >= last_move {
            damped = true;
        }
        last_move = moved;
        w = next;
    }
    Err(Error::NoConvergence { what: "subordination fixed point", iterations: SUBORDINATION_MAX_ITER })
}

/// Recovers the measure behind a Cauchy map on `grid`.
pub fn materialize<T: Real>(g: &AnalyticMap<T>, grid: &[T], eps: T) -> Result<Measure<T>> {
    transforms::invert_stieltjes(g, grid, eps)
}

/// Convolution expressions: `mono(a, b)`, `anti(a, b)`, `free(a, b)`
/// (subordination), `freer(a, b)` (R-addition) over leaves `dirac:a`,
/// `sc:v`/`semicircle:v`, `arcsine:v` and `bernoulli:a`
/// (`(delta_{-a} + delta_a)/2`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Leaf(Measure<f64>),
    Mono(Box<Expr>, Box<Expr>),
    Anti(Box<Expr>, Box<Expr>),
    Free(Box<Expr>, Box<Expr>),
    FreeR(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }

    /// Cauchy transform of the expression.
    pub fn cauchy(&self) -> Result<AnalyticMap<f64>> {
        Ok(match self {
            Expr::Leaf(m) => transforms::cauchy(m),
            Expr::Mono(a, b) => monotone(&a.f_map()?, &b.f_map()?)?.reciprocal(),
            Expr::Anti(a, b) => anti_monotone(&a.f_map()?, &b.f_map()?)?.reciprocal(),
            Expr::Free(a, b) => free_subordination(&a.cauchy()?, &b.cauchy()?)?,
            Expr::FreeR(a, b) => {
                let r = free_r(&transforms::r_transform(&a.cauchy()?)?, &transforms::r_transform(&b.cauchy()?)?)?;
                transforms::cauchy_from_r(&r)?
            }
        })
    }

    /// F-transform of the expression.
    pub fn f_map(&self) -> Result<AnalyticMap<f64>> {
        Ok(match self {
            Expr::Leaf(m) => transforms::f_transform(m),
            Expr::Mono(a, b) => monotone(&a.f_map()?, &b.f_map()?)?,
            Expr::Anti(a, b) => anti_monotone(&a.f_map()?, &b.f_map()?)?,
            _ => self.cauchy()?.reciprocal(),
        })
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::invalid(format!("expression: {msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| self.error("expected a number"))
    }

    fn expr(&mut self) -> Result<Expr> {
        let name = self.word();
        if name.is_empty() {
            return Err(self.error("expected an operator or a measure"));
        }
        self.skip_ws();
        match self.src.get(self.pos) {
            Some(b'(') => {
                self.pos += 1;
                let a = self.expr()?;
                self.eat(b',')?;
                let b = self.expr()?;
                self.eat(b')')?;
                let (a, b) = (Box::new(a), Box::new(b));
                match name.as_str() {
                    "mono" => Ok(Expr::Mono(a, b)),
                    "anti" => Ok(Expr::Anti(a, b)),
                    "free" => Ok(Expr::Free(a, b)),
                    "freer" => Ok(Expr::FreeR(a, b)),
                    other => Err(Error::invalid(format!("expression: unknown operator '{other}'"))),
                }
            }
            Some(b':') => {
                self.pos += 1;
                let x = self.number()?;
                let m = match name.as_str() {
                    "dirac" => Measure::dirac(x),
                    "sc" | "semicircle" => Measure::semicircle(x)?,
                    "arcsine" => Measure::arcsine(x)?,
                    "bernoulli" => Measure::two_point(-x, x, 0.5)?,
                    other => return Err(Error::invalid(format!("expression: unknown measure '{other}'"))),
                };
                Ok(Expr::Leaf(m))
            }
            _ => Err(self.error("expected '(' or ':'")),
        }
    }
}

/// Five probe points used by the stability checks.
pub fn probe_points<T: Real>() -> [C<T>; 5] {
    let p = |re: f64, im: f64| cplx(T::lit(re), T::lit(im));
    [p(0.0, 1.0), p(1.0, 0.5), p(-2.0, 1.0), p(0.5, 2.0), p(3.0, 0.75)]
}
