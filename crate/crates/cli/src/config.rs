//! Run descriptions stored as JSON.
//!
//! ```json
//! {
//!   "driver": { "kind": "atom-path", "times": [0, 1], "values": [0, 0] },
//!   "T": 1,
//!   "tolerances": { "ode": 1e-10 }
//! }
//! ```
//!
//! Only `driver` is required. Keys are written in sorted order, so a file
//! produced by [`save_config`] loads and saves back to the same bytes.

use std::path::Path;

use loewner_core::{DensityGrid, Driving64, Error, FlowOptions64, Measure64, Result};
use serde_json::{json, Map, Value};

/// Default Stieltjes inversion height.
pub const DEFAULT_EPS: f64 = 1e-4;

/// Inclusive uniform grid `a:b:n` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Invalid("grid needs finite a < b".into()));
        }
        if n < 2 {
            return Err(Error::Invalid("grid needs at least two points".into()));
        }
        Ok(Grid { a, b, n })
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.n - 1) as f64;
        (0..self.n).map(|k| self.a + (self.b - self.a) * k as f64 / last).collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("grid '{s}' is not of the form a:b:n"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else { return Err(bad()) };
        Grid::new(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
            n.trim().parse().map_err(|_| bad())?,
        )
    }
}

/// Tolerance overrides; `None` keeps the library default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tolerances {
    pub ode: Option<f64>,
    pub swallow: Option<f64>,
    pub lifetime: Option<f64>,
    pub eps: Option<f64>,
}

impl Tolerances {
    pub fn flow_options(&self) -> FlowOptions64 {
        let mut o = FlowOptions64::default();
        if let Some(v) = self.ode {
            o.tol = v;
        }
        if let Some(v) = self.swallow {
            o.swallow = v;
        }
        if let Some(v) = self.lifetime {
            o.lifetime_tol = v;
        }
        o
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(DEFAULT_EPS)
    }
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub driver: Driving64,
    pub horizon: Option<f64>,
    pub steps: Option<usize>,
    pub kappa: Option<f64>,
    pub seed: Option<u64>,
    pub grid: Option<Grid>,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn new(driver: Driving64) -> Self {
        RunConfig {
            driver,
            horizon: None,
            steps: None,
            kappa: None,
            seed: None,
            grid: None,
            tolerances: Tolerances::default(),
        }
    }
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema { path: path.to_string(), message: message.into() }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{}: {e}", path.display()))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_config(&text)
}

pub fn save_config(cfg: &RunConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, config_to_string(cfg)).map_err(|e| io_error(path, e))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Value = serde_json::from_str(text).map_err(|e| schema("$", format!("not valid JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    known_keys(obj, "", &["driver", "T", "steps", "kappa", "seed", "grid", "tolerances"])?;
    let driver = driver_from(obj.get("driver").ok_or_else(|| schema("driver", "missing field"))?, "driver")?;
    let mut cfg = RunConfig::new(driver);
    cfg.horizon = opt(obj, "", "T", positive)?;
    cfg.steps = opt(obj, "", "steps", count)?;
    cfg.kappa = opt(obj, "", "kappa", non_negative)?;
    cfg.seed = opt(obj, "", "seed", |v, p| v.as_u64().ok_or_else(|| schema(p, "expected a non-negative integer")))?;
    if let Some(g) = obj.get("grid") {
        let go = g.as_object().ok_or_else(|| schema("grid", "expected an object"))?;
        known_keys(go, "grid.", &["a", "b", "n"])?;
        let a = req(go, "grid.", "a", finite)?;
        let b = req(go, "grid.", "b", finite)?;
        let n = req(go, "grid.", "n", count)?;
        cfg.grid = Some(Grid::new(a, b, n).map_err(|e| schema("grid", e.to_string()))?);
    }
    if let Some(t) = obj.get("tolerances") {
        let to = t.as_object().ok_or_else(|| schema("tolerances", "expected an object"))?;
        known_keys(to, "tolerances.", &["ode", "swallow", "lifetime", "eps"])?;
        cfg.tolerances = Tolerances {
            ode: opt(to, "tolerances.", "ode", positive)?,
            swallow: opt(to, "tolerances.", "swallow", positive)?,
            lifetime: opt(to, "tolerances.", "lifetime", positive)?,
            eps: opt(to, "tolerances.", "eps", positive)?,
        };
    }
    Ok(cfg)
}

/// Parses a driver object (the value of the `driver` key).
pub fn parse_driver(text: &str) -> Result<Driving64> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("driver", format!("not valid JSON: {e}")))?;
    driver_from(&v, "driver")
}

pub fn config_to_string(cfg: &RunConfig) -> String {
    let mut root = Map::new();
    root.insert("driver".into(), driver_to_value(&cfg.driver));
    if let Some(v) = cfg.horizon {
        root.insert("T".into(), json!(v));
    }
    if let Some(v) = cfg.steps {
        root.insert("steps".into(), json!(v));
    }
    if let Some(v) = cfg.kappa {
        root.insert("kappa".into(), json!(v));
    }
    if let Some(v) = cfg.seed {
        root.insert("seed".into(), json!(v));
    }
    if let Some(g) = cfg.grid {
        root.insert("grid".into(), json!({ "a": g.a, "b": g.b, "n": g.n }));
    }
    let t = cfg.tolerances;
    let mut tol = Map::new();
    for (key, v) in [("ode", t.ode), ("swallow", t.swallow), ("lifetime", t.lifetime), ("eps", t.eps)] {
        if let Some(v) = v {
            tol.insert(key.into(), json!(v));
        }
    }
    if !tol.is_empty() {
        root.insert("tolerances".into(), Value::Object(tol));
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("plain JSON values serialize");
    s.push('\n');
    s
}

pub fn driver_to_value(d: &Driving64) -> Value {
    match d {
        Driving64::AtomPath { times, values } => json!({ "kind": "atom-path", "times": times, "values": values }),
        Driving64::MeasurePath { breakpoints, measures } => json!({
            "kind": "measure-path",
            "breakpoints": breakpoints,
            "measures": measures.iter().map(measure_to_value).collect::<Vec<_>>(),
        }),
        Driving64::SemicircleFamily => json!({ "kind": "semicircle-family" }),
    }
}

pub fn measure_to_value(m: &Measure64) -> Value {
    match m {
        Measure64::Dirac { at } => json!({ "kind": "dirac", "at": at }),
        Measure64::Semicircle { center, var } => json!({ "kind": "semicircle", "center": center, "var": var }),
        Measure64::Arcsine { center, var } => json!({ "kind": "arcsine", "center": center, "var": var }),
        Measure64::Empirical(e) => {
            let mut o = Map::new();
            o.insert("kind".into(), json!("empirical"));
            o.insert("atoms".into(), json!(e.atoms().iter().map(|&(x, w)| [x, w]).collect::<Vec<_>>()));
            if let Some(g) = e.density() {
                o.insert("density".into(), json!({ "a": g.a(), "b": g.b(), "values": g.values() }));
            }
            Value::Object(o)
        }
    }
}

fn known_keys(obj: &Map<String, Value>, prefix: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(&format!("{prefix}{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn req<'a, V>(
    obj: &'a Map<String, Value>,
    prefix: &str,
    key: &str,
    f: impl Fn(&'a Value, &str) -> Result<V>,
) -> Result<V> {
    let path = format!("{prefix}{key}");
    f(obj.get(key).ok_or_else(|| schema(&path, "missing field"))?, &path)
}

fn opt<'a, V>(
    obj: &'a Map<String, Value>,
    prefix: &str,
    key: &str,
    f: impl Fn(&'a Value, &str) -> Result<V>,
) -> Result<Option<V>> {
    obj.get(key).map(|v| f(v, &format!("{prefix}{key}"))).transpose()
}

fn finite(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| schema(path, "expected a finite number"))
}

fn positive(v: &Value, path: &str) -> Result<f64> {
    finite(v, path).and_then(|x| if x > 0.0 { Ok(x) } else { Err(schema(path, "must be positive")) })
}

fn non_negative(v: &Value, path: &str) -> Result<f64> {
    finite(v, path).and_then(|x| if x >= 0.0 { Ok(x) } else { Err(schema(path, "must be non-negative")) })
}

fn count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn numbers(v: &Value, path: &str) -> Result<Vec<f64>> {
    array(v, path)?.iter().enumerate().map(|(i, x)| finite(x, &format!("{path}[{i}]"))).collect()
}

fn kind<'a>(obj: &'a Map<String, Value>, path: &str) -> Result<&'a str> {
    let p = format!("{path}.kind");
    obj.get("kind").ok_or_else(|| schema(&p, "missing field"))?.as_str().ok_or_else(|| schema(&p, "expected a string"))
}

fn driver_from(v: &Value, path: &str) -> Result<Driving64> {
    let obj = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    let prefix = format!("{path}.");
    let built = match kind(obj, path)? {
        "atom-path" => {
            known_keys(obj, &prefix, &["kind", "times", "values"])?;
            let times = req(obj, &prefix, "times", numbers)?;
            let values = req(obj, &prefix, "values", numbers)?;
            Driving64::atom_path(times, values)
        }
        "measure-path" => {
            known_keys(obj, &prefix, &["kind", "breakpoints", "measures"])?;
            let breakpoints = req(obj, &prefix, "breakpoints", numbers)?;
            let list = req(obj, &prefix, "measures", array)?;
            let measures = list
                .iter()
                .enumerate()
                .map(|(i, m)| measure_from(m, &format!("{path}.measures[{i}]")))
                .collect::<Result<_>>()?;
            Driving64::measure_path(breakpoints, measures)
        }
        "semicircle-family" => {
            known_keys(obj, &prefix, &["kind"])?;
            Ok(Driving64::SemicircleFamily)
        }
        other => return Err(schema(&format!("{path}.kind"), format!("unknown driver kind '{other}'"))),
    };
    built.map_err(|e| schema(path, e.to_string()))
}

fn measure_from(v: &Value, path: &str) -> Result<Measure64> {
    let obj = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    let prefix = format!("{path}.");
    let built = match kind(obj, path)? {
        "dirac" => {
            known_keys(obj, &prefix, &["kind", "at"])?;
            Ok(Measure64::dirac(req(obj, &prefix, "at", finite)?))
        }
        k @ ("semicircle" | "arcsine") => {
            known_keys(obj, &prefix, &["kind", "center", "var"])?;
            let center = opt(obj, &prefix, "center", finite)?.unwrap_or(0.0);
            let var = req(obj, &prefix, "var", positive)?;
            let m = if k == "semicircle" { Measure64::semicircle(var) } else { Measure64::arcsine(var) };
            m.map(|m| m.shift(center))
        }
        "empirical" => {
            known_keys(obj, &prefix, &["kind", "atoms", "density"])?;
            let atoms_path = format!("{prefix}atoms");
            let raw = opt(obj, &prefix, "atoms", array)?;
            let mut atoms = Vec::new();
            for (i, pair) in raw.into_iter().flatten().enumerate() {
                let p = format!("{atoms_path}[{i}]");
                let xs = numbers(pair, &p)?;
                let [x, w] = xs[..] else { return Err(schema(&p, "expected [location, mass]")) };
                atoms.push((x, w));
            }
            let density = match obj.get("density") {
                None => None,
                Some(g) => {
                    let p = format!("{prefix}density");
                    let go = g.as_object().ok_or_else(|| schema(&p, "expected an object"))?;
                    let gp = format!("{p}.");
                    known_keys(go, &gp, &["a", "b", "values"])?;
                    let grid = DensityGrid::new(
                        req(go, &gp, "a", finite)?,
                        req(go, &gp, "b", finite)?,
                        req(go, &gp, "values", numbers)?,
                    );
                    Some(grid.map_err(|e| schema(&p, e.to_string()))?)
                }
            };
            Measure64::empirical(atoms, density)
        }
        other => return Err(schema(&format!("{path}.kind"), format!("unknown measure kind '{other}'"))),
    };
    built.map_err(|e| schema(path, e.to_string()))
}
