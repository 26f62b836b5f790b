use std::str::FromStr;

use loewner_core::convolve::{probe_points, Expr};
use loewner_core::evolution::{anti_monotone_family, free_family, monotone_family, sle_driving};
use loewner_core::loewner::{boundary_value, flow_reverse_anti_point, flow_reverse_point, welding_with};
use loewner_core::{
    burgers_residual, flow_forward, invert_stieltjes, trace, Complex64, Driving64, Error, EvolutionFamily64,
    FlowOptions64, Measure64, Result,
};

use crate::args::{
    BurgersArgs, Command, ConvolveArgs, DensityArgs, DriverArgs, FamilyArgs, FlowArgs, FlowMode, SemanticsArg, SleArgs,
    TraceArgs, WeldingArgs,
};
use crate::config::{load_config, Grid, RunConfig};
use crate::output::{Cell, Table};

/// CSV bytes plus summary lines for stderr.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub csv: Vec<u8>,
    pub notes: Vec<String>,
}

impl Output {
    fn table(t: &Table) -> Result<Self> {
        Ok(Output { csv: t.to_bytes()?, notes: Vec::new() })
    }
}

/// A driver resolved from flags and an optional run description.
#[derive(Debug, Clone)]
pub struct Setup {
    pub cfg: RunConfig,
    pub horizon: f64,
    pub opts: FlowOptions64,
}

pub fn parse_inline_driver(spec: &str, horizon: f64) -> Result<Driving64> {
    let bad = |why: &str| Error::Invalid(format!("driver '{spec}': {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "const" => Driving64::constant_path(num(rest)?, horizon),
        "linear" => Driving64::atom_path(vec![0.0, horizon], vec![0.0, num(rest)? * horizon]),
        "path" => {
            let mut times = Vec::new();
            let mut values = Vec::new();
            for pair in rest.split(',') {
                let (t, u) = pair.split_once('=').ok_or_else(|| bad("expected T=U pairs"))?;
                times.push(num(t)?);
                values.push(num(u)?);
            }
            Driving64::atom_path(times, values)
        }
        "steps" => {
            let (dt, vals) = rest.split_once(':').ok_or_else(|| bad("expected steps:DT:U0,U1,..."))?;
            let values = vals.split(',').map(num).collect::<Result<Vec<_>>>()?;
            Driving64::step_atoms(num(dt)?, &values)
        }
        "sle" => {
            let parts: Vec<&str> = rest.split(':').collect();
            let [kappa, dt, seed] = parts[..] else { return Err(bad("expected sle:KAPPA:DT:SEED")) };
            let seed = seed.trim().parse::<u64>().map_err(|_| bad("seed must be a non-negative integer"))?;
            sle_driving(num(kappa)?, num(dt)?, horizon, seed)
        }
        "semicircle" if rest.is_empty() => Ok(Driving64::SemicircleFamily),
        _ => Err(bad("unknown form")),
    }
}

/// Resolves `--driver`, `--T` and `--tol`; flags win over the file.
pub fn setup(a: &DriverArgs, default_driver: &str) -> Result<Setup> {
    let spec = a.driver.as_deref().unwrap_or(default_driver);
    if let Some(h) = a.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Invalid("--T must be positive".into()));
        }
    }
    let mut cfg = match spec.strip_prefix('@') {
        Some(path) => load_config(path)?,
        None => RunConfig::new(parse_inline_driver(spec, a.horizon.unwrap_or(1.0))?),
    };
    if let Some(tol) = a.tol {
        if !(tol > 0.0) {
            return Err(Error::Invalid("--tol must be positive".into()));
        }
        cfg.tolerances.ode = Some(tol);
    }
    let horizon = a.horizon.or(cfg.horizon).unwrap_or(1.0);
    let opts = cfg.tolerances.flow_options();
    Ok(Setup { cfg, horizon, opts })
}

pub fn parse_point(s: &str) -> Result<Complex64> {
    Complex64::from_str(s.trim()).map_err(|_| Error::Invalid(format!("'{s}' is not a complex number")))
}

fn probes(raw: &[String]) -> Result<Vec<Complex64>> {
    if raw.is_empty() {
        return Ok(probe_points::<f64>().to_vec());
    }
    raw.iter().map(|s| parse_point(s)).collect()
}

fn family(d: Driving64, sem: SemanticsArg, opts: FlowOptions64) -> EvolutionFamily64 {
    let f = match sem {
        SemanticsArg::Monotone => monotone_family(d),
        SemanticsArg::Anti => anti_monotone_family(d),
        SemanticsArg::Free => free_family(d),
    };
    f.with_options(opts)
}

fn positive_count(n: usize, what: &str) -> Result<usize> {
    if n == 0 {
        return Err(Error::Invalid(format!("{what} must be at least 1")));
    }
    Ok(n)
}

pub fn execute(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Flow(a) => flow(a),
        Command::Trace(a) => trace_cmd(a),
        Command::Welding(a) => welding_cmd(a),
        Command::Convolve(a) => convolve_cmd(a),
        Command::Density(a) => density_cmd(a),
        Command::Family(a) => family_cmd(a),
        Command::Sle(a) => sle_cmd(a),
        Command::Burgers(a) => burgers_cmd(a),
        Command::Selftest => Err(Error::Invalid("selftest is run by the front end".into())),
    }
}

fn flow(a: &FlowArgs) -> Result<Output> {
    let su = setup(&a.driver, "const:0")?;
    let grid = a.grid.or(su.cfg.grid).map_or_else(|| Grid::new(-2.0, 2.0, 9), Ok)?;
    let d = &su.cfg.driver;
    let mut t = Table::new(&["x", "y", "re", "im", "alive", "lifetime", "err_est"]);
    for &y in &a.y {
        for x in grid.points() {
            let z = Complex64::new(x, y);
            let p = match a.mode {
                FlowMode::Forward => flow_forward(d, z, su.horizon, &su.opts)?,
                FlowMode::Reverse => flow_reverse_point(d, a.s, su.horizon, z, &su.opts)?,
                FlowMode::Anti => flow_reverse_anti_point(d, a.s, su.horizon, z, &su.opts)?,
            };
            t.push(vec![
                x.into(),
                y.into(),
                p.value.re.into(),
                p.value.im.into(),
                p.alive.into(),
                p.lifetime.into(),
                p.err_est.into(),
            ]);
        }
    }
    Output::table(&t)
}

fn trace_cmd(a: &TraceArgs) -> Result<Output> {
    let su = setup(&a.driver, "const:0")?;
    let n = positive_count(a.steps.or(su.cfg.steps).unwrap_or(100), "--steps")?;
    let times: Vec<f64> = (0..=n).map(|k| su.horizon * k as f64 / n as f64).collect();
    let tr = trace(&su.cfg.driver, &times, &su.opts)?;
    let mut t = Table::new(&["t", "re", "im", "err_est"]);
    for ((time, p), e) in tr.times.iter().zip(&tr.points).zip(&tr.err_est) {
        t.push(vec![(*time).into(), p.re.into(), p.im.into(), (*e).into()]);
    }
    Output::table(&t)
}

fn welding_cmd(a: &WeldingArgs) -> Result<Output> {
    let su = setup(&a.driver, "const:0")?;
    let d = &su.cfg.driver;
    let w = welding_with(d, su.horizon, positive_count(a.pairs, "--pairs")?)?;
    let mut t = Table::new(&["x", "h", "gap"]);
    let mut worst = 0f64;
    for &(x, h) in &w.pairs {
        let gap = (boundary_value(d, su.horizon, x, &su.opts)? - boundary_value(d, su.horizon, h, &su.opts)?).norm();
        worst = worst.max(gap);
        t.push(vec![x.into(), h.into(), gap.into()]);
    }
    let mut out = Output::table(&t)?;
    out.notes = vec![
        format!("a = {:.10}", w.a),
        format!("b = {:.10}", w.b),
        format!("u = {:.10}", w.u),
        format!("max gap = {worst:.3e}"),
    ];
    Ok(out)
}

fn convolve_cmd(a: &ConvolveArgs) -> Result<Output> {
    let e = Expr::parse(&a.expr)?;
    let (g, f) = (e.cauchy()?, e.f_map()?);
    let mut t = Table::new(&["z_re", "z_im", "g_re", "g_im", "f_re", "f_im"]);
    for z in probes(&a.probe)? {
        if !(z.im > 0.0) {
            return Err(Error::Invalid(format!("probe {z} is not in the upper half-plane")));
        }
        let (gv, fv) = (g.eval(z)?, f.eval(z)?);
        t.push(vec![z.re.into(), z.im.into(), gv.re.into(), gv.im.into(), fv.re.into(), fv.im.into()]);
    }
    Output::table(&t)
}

fn density_cmd(a: &DensityArgs) -> Result<Output> {
    let (m, grid, eps) = match &a.expr {
        Some(src) => {
            let grid = a.grid.map_or_else(|| Grid::new(-3.0, 3.0, 1201), Ok)?;
            let eps = a.eps.unwrap_or(crate::config::DEFAULT_EPS);
            (invert_stieltjes(&Expr::parse(src)?.cauchy()?, &grid.points(), eps)?, grid, eps)
        }
        None => {
            let su = setup(&a.driver, "const:0")?;
            let grid = a.grid.or(su.cfg.grid).map_or_else(|| Grid::new(-3.0, 3.0, 1201), Ok)?;
            let eps = a.eps.unwrap_or(su.cfg.tolerances.eps());
            let fam = family(su.cfg.driver.clone(), a.semantics, su.opts);
            (fam.sigma(a.s, su.horizon, &grid.points(), eps)?, grid, eps)
        }
    };
    let mut t = Table::new(&["kind", "x", "value"]);
    if let Measure64::Empirical(e) = &m {
        for &(x, mass) in e.atoms() {
            t.push(vec!["atom".into(), x.into(), mass.into()]);
        }
    }
    for x in grid.points() {
        let v = m.density_at(x).unwrap_or(f64::NAN);
        t.push(vec!["density".into(), x.into(), Cell::Num(v)]);
    }
    let mut out = Output::table(&t)?;
    out.notes = vec![format!("eps = {eps:e}")];
    Ok(out)
}

fn family_cmd(a: &FamilyArgs) -> Result<Output> {
    let su = setup(&a.driver, "const:0")?;
    let n = positive_count(a.steps.or(su.cfg.steps).unwrap_or(1), "--steps")?;
    if !(a.s >= 0.0 && a.s <= su.horizon) {
        return Err(Error::Invalid("need 0 <= s <= T".into()));
    }
    let fam = family(su.cfg.driver.clone(), a.semantics, su.opts);
    let zs = probes(&a.probe)?;
    let mut t = Table::new(&["s", "t", "z_re", "z_im", "re", "im"]);
    for k in 1..=n {
        let time = a.s + (su.horizon - a.s) * k as f64 / n as f64;
        for &z in &zs {
            let v = fam.eval(a.s, time, z)?;
            t.push(vec![a.s.into(), time.into(), z.re.into(), z.im.into(), v.re.into(), v.im.into()]);
        }
    }
    Output::table(&t)
}

fn sle_cmd(a: &SleArgs) -> Result<Output> {
    let n = positive_count(a.steps, "--steps")?;
    let d = sle_driving(a.kappa, a.horizon / n as f64, a.horizon, a.seed)?;
    let Driving64::AtomPath { times, values } = &d else { unreachable!("SLE drivers are atom paths") };
    let mut t = Table::new(&["t", "u"]);
    for (time, u) in times.iter().zip(values) {
        t.push(vec![(*time).into(), (*u).into()]);
    }
    Output::table(&t)
}

fn burgers_cmd(a: &BurgersArgs) -> Result<Output> {
    let su = setup(&a.driver, "semicircle")?;
    let n = positive_count(a.steps.or(su.cfg.steps).unwrap_or(5), "--steps")?;
    let grid = a.grid.or(su.cfg.grid).map_or_else(|| Grid::new(-1.0, 1.0, 5), Ok)?;
    let mut t = Table::new(&["t", "x", "y", "residual"]);
    let mut worst = 0f64;
    for k in 1..=n {
        let time = su.horizon * k as f64 / n as f64;
        for &y in &a.y {
            for x in grid.points() {
                let r = burgers_residual(&su.cfg.driver, &[(time, Complex64::new(x, y))], &su.opts)?;
                worst = worst.max(r);
                t.push(vec![time.into(), x.into(), y.into(), r.into()]);
            }
        }
    }
    let mut out = Output::table(&t)?;
    out.notes = vec![format!("max residual = {worst:.3e}")];
    Ok(out)
}
