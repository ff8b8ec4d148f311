//! INI-style run configuration.
//!
//! Flat sections of `key = value` lines. Values are numbers (decimal with an
//! optional exponent) or catalog entries written `name` or
//! `name{key=number, ...}`.

use std::collections::BTreeMap;
use std::path::Path;

use ini::{Ini, ParseOption, Properties};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Boundary, Domain, ModelSpace, Warp, Weight};
use crate::liouville::{
    Claim, InitialData, ScenarioConfig, Target, URange, DEFAULT_GRAD_TOL, DEFAULT_RANGE_TOL,
};
use crate::nonlinearity::Nonlinearity;
use crate::solver::ExactSolution;

pub const DEFAULT_NODES: usize = 201;
pub const DEFAULT_C_V: f64 = crate::estimates::DEFAULT_C_V;
pub const DEFAULT_R_PROBE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("[{section}] {key}: {msg}")]
    Key {
        section: String,
        key: String,
        msg: String,
    },
    #[error("[{section}] {key}: missing")]
    Missing { section: String, key: String },
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("section [{0}] appears twice")]
    DuplicateSection(String),
    #[error("[{0}]: {1}")]
    Section(String, String),
}

impl ConfigError {
    pub fn is_io(&self) -> bool {
        matches!(self, ConfigError::Io { .. })
    }
}

/// Parses `[+-]digits[.digits][(e|E)[+-]digits]`; `inf`, `nan` and hex are
/// rejected.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(p) => (&body[..p], Some(&body[p + 1..])),
        None => (body, None),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() && frac.is_empty() || !digits(int) || !digits(frac) {
        return None;
    }
    if let Some(e) = exponent {
        let e = e.strip_prefix(['+', '-']).unwrap_or(e);
        if e.is_empty() || !digits(e) {
            return None;
        }
    }
    s.parse().ok().filter(|v: &f64| v.is_finite())
}

/// `name` or `name{k=v, ...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: String,
    args: Vec<(String, f64)>,
}

impl Entry {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (name, rest) = match s.find('{') {
            Some(p) => (&s[..p], Some(&s[p + 1..])),
            None => (s, None),
        };
        let name = name.trim();
        if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(format!("bad catalog name {name:?}"));
        }
        let mut args = Vec::new();
        if let Some(rest) = rest {
            let inner = rest
                .strip_suffix('}')
                .ok_or_else(|| format!("unclosed brace in {s:?}"))?;
            for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
                let k = k.trim();
                let v =
                    parse_number(v).ok_or_else(|| format!("{k}: not a number: {:?}", v.trim()))?;
                if args.iter().any(|(a, _)| a == k) {
                    return Err(format!("{k} given twice"));
                }
                args.push((k.to_string(), v));
            }
        }
        Ok(Self {
            name: name.to_string(),
            args,
        })
    }

    fn take(&mut self, key: &str) -> Option<f64> {
        let p = self.args.iter().position(|(k, _)| k == key)?;
        Some(self.args.remove(p).1)
    }

    fn need(&mut self, key: &str) -> Result<f64, String> {
        self.take(key)
            .ok_or_else(|| format!("{} needs {key}", self.name))
    }

    fn or(&mut self, key: &str, default: f64) -> f64 {
        self.take(key).unwrap_or(default)
    }

    /// Coefficients c0, c1, ... collected into a dense vector.
    fn coefficients(&mut self) -> Result<Vec<f64>, String> {
        let mut out = Vec::new();
        for (k, v) in std::mem::take(&mut self.args) {
            let idx: usize = k
                .strip_prefix('c')
                .and_then(|d| d.parse().ok())
                .filter(|i| *i < 64)
                .ok_or_else(|| format!("{}: unknown coefficient {k}", self.name))?;
            if out.len() <= idx {
                out.resize(idx + 1, 0.0);
            }
            out[idx] = v;
        }
        if out.is_empty() {
            return Err(format!("{} needs at least one coefficient", self.name));
        }
        Ok(out)
    }

    fn done<T>(self, value: T) -> Result<T, String> {
        match self.args.first() {
            Some((k, _)) => Err(format!("{}: unknown parameter {k}", self.name)),
            None => Ok(value),
        }
    }
}

pub fn parse_nonlinearity(s: &str) -> Result<Nonlinearity, String> {
    let mut e = Entry::parse(s)?;
    let nl = match e.name.as_str() {
        "fisher" => Nonlinearity::Fisher { c: e.or("c", 1.0) },
        "allen_cahn" => Nonlinearity::AllenCahn,
        "log" => Nonlinearity::LogType { a: e.need("a")? },
        "power" => Nonlinearity::Power {
            p: e.need("p")?,
            q: e.need("q")?,
        },
        "zero" => Nonlinearity::Zero,
        "custom" => Nonlinearity::Custom {
            coeffs: e.coefficients()?,
        },
        other => return Err(format!("unknown nonlinearity {other:?}")),
    };
    let nl = e.done(nl)?;
    nl.validate().map_err(|err| err.to_string())?;
    Ok(nl)
}

fn parse_weight(s: &str) -> Result<Weight, String> {
    let mut e = Entry::parse(s)?;
    let w = match e.name.as_str() {
        "zero" => Weight::Zero,
        "linear" => Weight::Linear { a: e.need("a")? },
        "gaussian" => Weight::Gaussian { s: e.need("s")? },
        "polynomial" => Weight::Polynomial(e.coefficients()?),
        other => return Err(format!("unknown weight {other:?}")),
    };
    e.done(w)
}

fn parse_warp(s: &str) -> Result<Warp, String> {
    let mut e = Entry::parse(s)?;
    let w = match e.name.as_str() {
        "euclidean" => Warp::Euclidean,
        "hyperbolic" => Warp::Hyperbolic,
        "polynomial" => Warp::Polynomial(e.coefficients()?),
        other => return Err(format!("unknown warp {other:?}")),
    };
    e.done(w)
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    let mut e = Entry::parse(s)?;
    let b = match e.name.as_str() {
        "neumann" => Boundary::Neumann,
        "periodic" => Boundary::Periodic,
        "dirichlet" => Boundary::Dirichlet(e.need("value")?),
        other => return Err(format!("unknown boundary {other:?}")),
    };
    e.done(b)
}

fn parse_exact(e: &mut Entry) -> Result<Option<ExactSolution>, String> {
    Ok(Some(match e.name.as_str() {
        "gaussian_heat" => ExactSolution::GaussianHeat {
            shift: e.need("shift")?,
        },
        "exp_linear" => ExactSolution::ExpLinear { a: e.need("a")? },
        "log_flow" => ExactSolution::LogFlow {
            a: e.need("a")?,
            d: e.need("d")?,
        },
        "tanh" => ExactSolution::TanhProfile,
        _ => return Ok(None),
    }))
}

pub fn parse_exact_family(s: &str) -> Result<ExactSolution, String> {
    let mut e = Entry::parse(s)?;
    if e.name == "constant" {
        let v = e.need("value")?;
        return e.done(ExactSolution::Constant { v });
    }
    match parse_exact(&mut e)? {
        Some(x) => e.done(x),
        None => Err(format!("unknown exact family {:?}", e.name)),
    }
}

/// Initial data: plain data, or a closed-form family evaluated at the start
/// time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    Data(InitialData),
    Family(ExactSolution),
}

pub fn parse_initial(s: &str) -> Result<InitialSpec, String> {
    let mut e = Entry::parse(s)?;
    let spec = match e.name.as_str() {
        "constant" => InitialSpec::Data(InitialData::Constant {
            value: e.need("value")?,
        }),
        "uniform" => {
            let lo = e.need("lo")?;
            let hi = e.need("hi")?;
            let seed = e.or("seed", 0.0);
            if !(lo <= hi) {
                return Err(format!("uniform needs lo <= hi, got {lo} > {hi}"));
            }
            if seed < 0.0 || seed.fract() != 0.0 || seed > 2f64.powi(53) {
                return Err(format!(
                    "uniform seed must be a non-negative integer, got {seed}"
                ));
            }
            InitialSpec::Data(InitialData::Uniform {
                lo,
                hi,
                seed: seed as u64,
            })
        }
        _ => match parse_exact(&mut e)? {
            Some(x) => InitialSpec::Family(x),
            None => return Err(format!("unknown initial data {:?}", e.name)),
        },
    };
    e.done(spec)
}

fn parse_claim(s: &str) -> Result<Claim, String> {
    let mut e = Entry::parse(s)?;
    let c = match e.name.as_str() {
        "constant" => Claim::ConvergesToConstant(Target::Value(e.need("value")?)),
        "mean" => Claim::ConvergesToConstant(Target::InitialMean),
        "no_such_solution" => Claim::NoSuchSolution,
        "formula_limit" => Claim::FormulaLimit(e.need("value")?),
        other => return Err(format!("unknown claim {other:?}")),
    };
    e.done(c)
}

fn parse_growth(s: &str) -> Result<(f64, f64), String> {
    let mut e = Entry::parse(s)?;
    if e.name != "growth" {
        return Err(format!("expected growth{{n1=.., n2=..}}, got {:?}", e.name));
    }
    let g = (e.need("n1")?, e.need("n2")?);
    e.done(g)
}

/// Keys of one section, consumed as they are read so leftovers can be
/// reported.
struct Section<'a> {
    name: String,
    keys: BTreeMap<&'a str, &'a str>,
}

impl<'a> Section<'a> {
    fn new(name: &str, props: &'a Properties) -> Result<Self, ConfigError> {
        let mut keys = BTreeMap::new();
        for (k, v) in props.iter() {
            if keys.insert(k, v).is_some() {
                return Err(ConfigError::Key {
                    section: name.into(),
                    key: k.into(),
                    msg: "given twice".into(),
                });
            }
        }
        Ok(Self {
            name: name.to_string(),
            keys,
        })
    }

    fn err(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::Key {
            section: self.name.clone(),
            key: key.into(),
            msg: msg.into(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.keys.remove(key)
    }

    fn parsed<T>(
        &mut self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            Some(v) => parse(v).map(Some).map_err(|m| self.err(key, m)),
            None => Ok(None),
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parsed(key, |v| {
            parse_number(v).ok_or_else(|| format!("not a number: {v:?}"))
        })
    }

    fn required<T>(&self, key: &str, v: Option<T>) -> Result<T, ConfigError> {
        v.ok_or_else(|| ConfigError::Missing {
            section: self.name.clone(),
            key: key.into(),
        })
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.number(key)? {
            None => Ok(default),
            Some(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e9 => Ok(v as usize),
            Some(v) => Err(self.err(key, format!("expected a non-negative integer, got {v}"))),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.keys.keys().next() {
            Some(k) => Err(self.err(k, "unknown key")),
            None => Ok(()),
        }
    }
}

fn read_space(sec: &mut Section) -> Result<(ModelSpace, usize), ConfigError> {
    let kind = sec.raw("kind").unwrap_or("line").trim().to_string();
    let radial = match kind.as_str() {
        "line" => false,
        "euclidean" | "hyperbolic" | "warped" => true,
        other => return Err(sec.err("kind", format!("unknown space kind {other:?}"))),
    };
    let dim = sec.count("dimension", if radial { 2 } else { 1 })?;
    let weight = sec.parsed("weight", parse_weight)?.unwrap_or(Weight::Zero);
    let warp = sec.parsed("warp", parse_warp)?;
    let warp = match (kind.as_str(), warp) {
        ("line", Some(_)) => return Err(sec.err("warp", "a line has no warping function")),
        ("line", None) => None,
        ("warped", Some(w @ Warp::Polynomial(_))) => Some(w),
        ("warped", _) => {
            return Err(sec.err("warp", "warped spaces need warp = polynomial{c1=1, ...}"))
        }
        (_, Some(_)) => return Err(sec.err("warp", format!("{kind} spaces fix their warp"))),
        ("euclidean", None) => Some(Warp::Euclidean),
        (_, None) => Some(Warp::Hyperbolic),
    };
    let lo = sec.number("lo")?;
    let lo = if radial {
        lo.unwrap_or(0.0)
    } else {
        sec.required("lo", lo)?
    };
    let hi = sec.number("hi")?;
    let hi = sec.required("hi", hi)?;
    let left = sec
        .parsed("left", parse_boundary)?
        .unwrap_or(Boundary::Neumann);
    let right = sec
        .parsed("right", parse_boundary)?
        .unwrap_or(Boundary::Neumann);
    let nodes = sec.count("nodes", DEFAULT_NODES)?;
    let domain = Domain::new(lo, hi, left, right);
    let space = match warp {
        None => ModelSpace::line(dim, weight, domain),
        Some(w) => ModelSpace::radial(dim, w, weight, domain),
    }
    .map_err(|e| ConfigError::Section(sec.name.clone(), e.to_string()))?;
    space
        .grid(nodes)
        .map_err(|e| sec.err("nodes", e.to_string()))?;
    Ok((space, nodes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Sample the reference family.
    Exact,
    /// Evolve the initial data.
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpec {
    pub start: f64,
    pub duration: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySpec {
    /// `None` selects from the ε-window at run time.
    pub eps: Option<f64>,
    pub c_v: f64,
    pub source: Source,
    pub r_probe: f64,
    /// Largest accepted c_empirical; unchecked when absent.
    pub c_max: Option<f64>,
}

/// A fully resolved run configuration; every default is materialised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub space: Option<ModelSpace>,
    pub nodes: usize,
    pub nl: Option<Nonlinearity>,
    pub initial: Option<InitialSpec>,
    /// Closed form compared against, given or inferred.
    pub exact: Option<ExactSolution>,
    pub time: Option<TimeSpec>,
    pub verify: VerifySpec,
    pub scenarios: Vec<ScenarioConfig>,
}

/// Spatially constant solutions with a closed form: u' = a u log u and
/// u' = 0.
fn infer_exact(nl: &Nonlinearity, initial: &InitialSpec, t_start: f64) -> Option<ExactSolution> {
    match (nl, initial) {
        (_, InitialSpec::Family(f)) => Some(*f),
        (Nonlinearity::LogType { a }, InitialSpec::Data(InitialData::Constant { value }))
            if *value > 0.0 =>
        {
            Some(ExactSolution::LogFlow {
                a: *a,
                d: value.ln() * (-a * t_start).exp(),
            })
        }
        (Nonlinearity::Zero, InitialSpec::Data(InitialData::Constant { value })) => {
            Some(ExactSolution::Constant { v: *value })
        }
        _ => None,
    }
}

fn read_scenario(name: &str, mut sec: Section) -> Result<ScenarioConfig, ConfigError> {
    let (space, nodes) = read_space(&mut sec)?;
    let nl = sec.parsed("f", parse_nonlinearity)?;
    let nl = sec.required("f", nl)?;
    let claim = sec.parsed("claim", parse_claim)?;
    let claim = sec.required("claim", claim)?;
    let m = sec.number("m")?;
    let m = sec.required("m", m)?;
    let big_m = sec.number("M")?;
    let big_m = sec.required("M", big_m)?;
    let mut cfg = ScenarioConfig::new(name, space, nl, claim, URange { m, big_m });
    cfg.nodes = nodes;
    if let Some(h) = sec.number("horizon")? {
        cfg.horizon = h;
    }
    if let Some(dt) = sec.number("dt")? {
        cfg.dt = dt;
    }
    match sec.parsed("u0", parse_initial)? {
        Some(InitialSpec::Data(d)) => cfg.initial = Some(d),
        Some(InitialSpec::Family(_)) => {
            return Err(sec.err("u0", "scenarios take constant or uniform initial data"))
        }
        None => {}
    }
    cfg.exact = sec.parsed("exact", parse_exact_family)?;
    cfg.grad_tol = sec.number("grad_tol")?.unwrap_or(DEFAULT_GRAD_TOL);
    cfg.range_tol = sec.number("range_tol")?.unwrap_or(DEFAULT_RANGE_TOL);
    cfg.growth = sec.parsed("growth", parse_growth)?;
    cfg.eps = sec.number("eps")?;
    if let Some(note) = sec.raw("note") {
        cfg.notes.push(note.trim().to_string());
    }
    let section = sec.name.clone();
    sec.finish()?;
    cfg.validate()
        .map_err(|e| ConfigError::Section(section, e.to_string()))?;
    Ok(cfg)
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let opt = ParseOption {
            enabled_quote: false,
            enabled_escape: false,
            ..Default::default()
        };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| ConfigError::Syntax {
            line: e.line,
            col: e.col,
            msg: e.msg.to_string(),
        })?;
        let mut seen = Vec::new();
        let mut cfg = RunConfig {
            space: None,
            nodes: DEFAULT_NODES,
            nl: None,
            initial: None,
            exact: None,
            time: None,
            verify: VerifySpec {
                eps: None,
                c_v: DEFAULT_C_V,
                source: Source::Exact,
                r_probe: DEFAULT_R_PROBE,
                c_max: None,
            },
            scenarios: Vec::new(),
        };
        let mut source = None;
        let mut r_probe = None;
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(ConfigError::Key {
                        section: "".into(),
                        key: k.into(),
                        msg: "keys must belong to a section".into(),
                    });
                }
                continue;
            };
            if seen.iter().any(|s: &String| s == name) {
                return Err(ConfigError::DuplicateSection(name.into()));
            }
            seen.push(name.to_string());
            let mut sec = Section::new(name, props)?;
            match name {
                "space" => {
                    let (space, nodes) = read_space(&mut sec)?;
                    cfg.space = Some(space);
                    cfg.nodes = nodes;
                }
                "nonlinearity" => {
                    let nl = sec.parsed("f", parse_nonlinearity)?;
                    cfg.nl = Some(sec.required("f", nl)?);
                }
                "initial" => {
                    let u0 = sec.parsed("u0", parse_initial)?;
                    cfg.initial = Some(sec.required("u0", u0)?);
                    cfg.exact = sec.parsed("exact", parse_exact_family)?;
                }
                "time" => {
                    let start = sec.number("start")?.unwrap_or(0.0);
                    let duration = sec.number("duration")?;
                    let duration = sec.required("duration", duration)?;
                    let dt = sec.number("dt")?;
                    let dt = sec.required("dt", dt)?;
                    if !(duration > 0.0) {
                        return Err(sec.err("duration", "must be positive"));
                    }
                    if !(dt > 0.0) {
                        return Err(sec.err("dt", "must be positive"));
                    }
                    cfg.time = Some(TimeSpec {
                        start,
                        duration,
                        dt,
                    });
                }
                "verify" => {
                    if let Some(eps) = sec.number("eps")? {
                        if !(eps > 0.0 && eps < 1.0) {
                            return Err(sec.err("eps", "must lie in (0, 1)"));
                        }
                        cfg.verify.eps = Some(eps);
                    }
                    if let Some(c) = sec.number("c_v")? {
                        if !(c > 0.0) {
                            return Err(sec.err("c_v", "must be positive"));
                        }
                        cfg.verify.c_v = c;
                    }
                    source = sec.parsed("source", |v| match v.trim() {
                        "exact" => Ok(Source::Exact),
                        "solve" => Ok(Source::Solve),
                        other => Err(format!("expected exact or solve, got {other:?}")),
                    })?;
                    r_probe = sec.number("r_probe")?;
                    cfg.verify.c_max = sec.number("c_max")?;
                }
                other => match other.strip_prefix("scenario.") {
                    Some(id) if !id.is_empty() => {
                        cfg.scenarios.push(read_scenario(id, sec)?);
                        continue;
                    }
                    _ => return Err(ConfigError::UnknownSection(other.into())),
                },
            }
            sec.finish()?;
        }
        if let (Some(nl), Some(u0)) = (&cfg.nl, &cfg.initial) {
            if cfg.exact.is_none() {
                let t0 = cfg.time.map_or(0.0, |t| t.start);
                cfg.exact = infer_exact(nl, u0, t0);
            }
        }
        if let Some(exact) = &cfg.exact {
            if let (Some(nl), Some(space)) = (&cfg.nl, &cfg.space) {
                if exact.nonlinearity() != *nl && !matches!(exact, ExactSolution::Constant { .. }) {
                    return Err(ConfigError::Key {
                        section: "initial".into(),
                        key: "exact".into(),
                        msg: format!("{exact:?} does not solve the {} equation", nl.name()),
                    });
                }
                exact
                    .check_compatible(space)
                    .map_err(|e| ConfigError::Key {
                        section: "initial".into(),
                        key: "exact".into(),
                        msg: e.to_string(),
                    })?;
            }
        }
        cfg.verify.source = source.unwrap_or(if cfg.exact.is_some() {
            Source::Exact
        } else {
            Source::Solve
        });
        if cfg.verify.source == Source::Exact && cfg.exact.is_none() && cfg.space.is_some() {
            return Err(ConfigError::Key {
                section: "verify".into(),
                key: "source".into(),
                msg: "source = exact needs a closed-form family in [initial]".into(),
            });
        }
        let radial = cfg.space.as_ref().is_some_and(ModelSpace::is_radial);
        cfg.verify.r_probe = r_probe.unwrap_or(if radial { DEFAULT_R_PROBE } else { 0.0 });
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::from_str(&text)
    }

    pub fn require_space(&self) -> Result<&ModelSpace, ConfigError> {
        self.space.as_ref().ok_or_else(|| missing_section("space"))
    }

    pub fn require_nl(&self) -> Result<&Nonlinearity, ConfigError> {
        self.nl.as_ref().ok_or_else(|| ConfigError::Missing {
            section: "nonlinearity".into(),
            key: "f".into(),
        })
    }

    pub fn require_initial(&self) -> Result<&InitialSpec, ConfigError> {
        self.initial.as_ref().ok_or_else(|| ConfigError::Missing {
            section: "initial".into(),
            key: "u0".into(),
        })
    }

    pub fn require_time(&self) -> Result<TimeSpec, ConfigError> {
        self.time.ok_or_else(|| missing_section("time"))
    }
}

fn missing_section(name: &str) -> ConfigError {
    ConfigError::Section(name.into(), "section is required for this command".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_grammar() {
        for (s, v) in [
            ("1", 1.0),
            ("-2.5", -2.5),
            (".5", 0.5),
            ("3.", 3.0),
            ("1e-3", 1e-3),
            ("+2E2", 200.0),
        ] {
            assert_eq!(parse_number(s), Some(v), "{s}");
        }
        for s in [
            "", "inf", "nan", "-", "e5", "1e", "0x10", "1.2.3", "1_0", "infinity",
        ] {
            assert_eq!(parse_number(s), None, "{s}");
        }
    }

    #[test]
    fn catalog_entries() {
        assert_eq!(
            parse_nonlinearity("log{a=-1}"),
            Ok(Nonlinearity::LogType { a: -1.0 })
        );
        assert_eq!(
            parse_nonlinearity(" fisher "),
            Ok(Nonlinearity::Fisher { c: 1.0 })
        );
        assert_eq!(
            parse_nonlinearity("custom{c1=1, c3=-1}"),
            Ok(Nonlinearity::Custom {
                coeffs: vec![0.0, 1.0, 0.0, -1.0]
            })
        );
        assert!(parse_nonlinearity("power{p=2}")
            .unwrap_err()
            .contains("needs q"));
        assert!(parse_nonlinearity("fisher{k=1}")
            .unwrap_err()
            .contains("unknown parameter k"));
        assert!(parse_nonlinearity("kpp")
            .unwrap_err()
            .contains("unknown nonlinearity"));
        assert!(parse_nonlinearity("log{a=1").is_err());
    }

    const SOLVE: &str = "
[space]
kind = line
lo = -10
hi = 10
nodes = 101

[nonlinearity]
f = log{a=-1}

[initial]
u0 = constant{value=0.6}

[time]
duration = 1
dt = 0.01
";

    #[test]
    fn run_config_materialises_defaults() {
        let cfg = RunConfig::from_str(SOLVE).unwrap();
        assert_eq!(cfg.nodes, 101);
        assert_eq!(cfg.time.unwrap().start, 0.0);
        assert_eq!(cfg.verify.c_v, DEFAULT_C_V);
        assert_eq!(cfg.verify.source, Source::Exact);
        assert_eq!(cfg.verify.r_probe, 0.0);
        let Some(ExactSolution::LogFlow { a, d }) = cfg.exact else {
            panic!("{:?}", cfg.exact)
        };
        assert_eq!(a, -1.0);
        assert_eq!(d, 0.6f64.ln());
    }

    #[test]
    fn errors_name_the_key() {
        let bad = SOLVE.replace("log{a=-1}", "sine");
        let err = RunConfig::from_str(&bad).unwrap_err();
        assert!(
            matches!(&err, ConfigError::Key { section, key, .. } if section == "nonlinearity" && key == "f")
        );
        assert!(err.to_string().contains("[nonlinearity] f"));

        let bad = SOLVE.replace("nodes = 101", "nodes = 101\nnode = 3");
        let err = RunConfig::from_str(&bad).unwrap_err();
        assert_eq!(err.to_string(), "[space] node: unknown key");

        let bad = SOLVE.replace("dt = 0.01", "");
        assert_eq!(
            RunConfig::from_str(&bad).unwrap_err(),
            ConfigError::Missing {
                section: "time".into(),
                key: "dt".into()
            }
        );
        let bad = SOLVE.replace("duration = 1", "duration = inf");
        assert!(RunConfig::from_str(&bad)
            .unwrap_err()
            .to_string()
            .contains("duration"));
        let bad = format!("{SOLVE}\n[extra]\nx = 1\n");
        assert_eq!(
            RunConfig::from_str(&bad).unwrap_err(),
            ConfigError::UnknownSection("extra".into())
        );
    }

    #[test]
    fn scenario_sections() {
        let text = "
[scenario.ac]
kind = line
lo = 0
hi = 6.283185307179586
left = periodic
right = periodic
nodes = 64
f = allen_cahn
claim = constant{value=1}
m = 0.3
M = 1
u0 = uniform{lo=0.3, hi=0.9, seed=4}
growth = growth{n1=1, n2=1}
";
        let cfg = RunConfig::from_str(text).unwrap();
        assert_eq!(cfg.scenarios.len(), 1);
        let s = &cfg.scenarios[0];
        assert_eq!(s.name, "ac");
        assert_eq!(s.nodes, 64);
        assert_eq!(s.u_range, URange { m: 0.3, big_m: 1.0 });
        assert_eq!(
            s.initial,
            Some(InitialData::Uniform {
                lo: 0.3,
                hi: 0.9,
                seed: 4
            })
        );
        assert_eq!(s.growth, Some((1.0, 1.0)));
        assert!(cfg.space.is_none());

        let err = RunConfig::from_str(&text.replace("M = 1\n", "")).unwrap_err();
        assert_eq!(
            err,
            ConfigError::Missing {
                section: "scenario.ac".into(),
                key: "M".into()
            }
        );
    }

    #[test]
    fn radial_defaults() {
        let text = "[space]\nkind = euclidean\ndimension = 3\nhi = 8\nweight = gaussian{s=0.5}\n";
        let cfg = RunConfig::from_str(text).unwrap();
        let space = cfg.space.unwrap();
        assert!(space.is_radial());
        assert_eq!(space.domain().lo, 0.0);
        assert_eq!(cfg.verify.r_probe, DEFAULT_R_PROBE);
        assert!(RunConfig::from_str(&text.replace("euclidean", "warped")).is_err());
    }
}
