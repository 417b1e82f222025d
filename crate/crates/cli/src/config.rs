//! Run configuration: a flat key=value layer (config file, then flags) resolved
//! into typed settings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use lrosc::classical::{catalog, Frequency, CATALOG};
use lrosc::expr::{parse_constant, substitute_params, ParseError};
use lrosc::invariant::{InvariantConstants, QuadratureRule};
use lrosc::oracle::default_solver;
use lrosc::simulation::{BasisChoice, Beta0Policy, FramePolicy};
use lrosc::{OscillatorModel, QuadratureConfig, Scenario, SolverConfig, StateSpec, TimeFunction};
use num_complex::Complex;

/// Keys accepted in config files and mirrored by long flags.
pub const KEYS: &[&str] = &[
    "model",
    "m",
    "omega",
    "m0",
    "Omega",
    "gamma",
    "mu",
    "nu",
    "F",
    "mass",
    "omega-sq",
    "force",
    "state",
    "beta0",
    "invariant",
    "basis",
    "t0",
    "t1",
    "dt",
    "ellipse-every",
    "ellipse-out",
    "abs-tol",
    "rel-tol",
    "quad-tol",
    "max-panel",
    "drift-rule",
    "output",
    "tol",
    "oracle-tol",
];

/// Numeric model parameters that also have dedicated flags.
const NAMED_PARAMS: &[&str] = &["m", "omega", "m0", "Omega", "gamma", "mu", "nu", "F"];

/// Keys that name files; left out of the metadata echo so output does not
/// depend on where it is written.
const PATH_KEYS: &[&str] = &["output", "ellipse-out"];

/// Invalid input, reported with the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
    /// Source text and byte offset for parse errors.
    pub caret: Option<(String, usize)>,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.to_string(),
            message: message.into(),
            caret: None,
        }
    }

    fn core(field: &str, err: lrosc::Error, source: &str) -> Self {
        let caret = match &err {
            lrosc::Error::Parse(p) => Some((source.to_string(), p.offset())),
            _ => None,
        };
        ConfigError {
            field: field.to_string(),
            message: err.to_string(),
            caret,
        }
    }

    fn parse(field: &str, err: ParseError, source: &str) -> Self {
        ConfigError::core(field, lrosc::Error::Parse(err), source)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)?;
        if let Some((src, offset)) = &self.caret {
            let col = src[..(*offset).min(src.len())].chars().count();
            write!(f, "\n  {src}\n  {}^", " ".repeat(col))?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// Raw settings. Later layers overwrite earlier ones key by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub values: BTreeMap<String, String>,
    /// Extra model parameters (`[params]` section or `--param`).
    pub params: BTreeMap<String, String>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::new(key, "unknown setting"));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn set_param(&mut self, assignment: &str) -> Result<()> {
        let (name, value) = assignment.split_once('=').ok_or_else(|| {
            ConfigError::new("param", format!("expected NAME=VALUE, got `{assignment}`"))
        })?;
        let name = name.trim();
        if name.is_empty()
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            || name == "t"
        {
            return Err(ConfigError::new(
                "param",
                format!("invalid parameter name `{name}`"),
            ));
        }
        self.params
            .insert(name.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `key = value` lines; `[section]` headers group keys and are otherwise
    /// ignored, except `[params]` whose entries are model parameters.
    /// `#` and `;` start comments.
    pub fn parse_file_contents(text: &str, origin: &str) -> Result<Settings> {
        let mut s = Settings::default();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let at = format!("{origin}:{}", n + 1);
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(&at, "unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(&at, format!("expected key = value, got `{line}`"))
            })?;
            let (key, value) = (key.trim(), unquote(value.trim()));
            if section == "params" {
                s.set_param(&format!("{key}={value}"))
                    .map_err(|e| ConfigError::new(&at, e.message))?;
            } else {
                s.set(key, value)
                    .map_err(|e| ConfigError::new(&at, format!("unknown setting `{}`", e.field)))?;
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Settings::parse_file_contents(&text, &path.display().to_string())
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        for (k, v) in &other.params {
            self.params.insert(k.clone(), v.clone());
        }
    }

    /// Settings as `key = value` lines for the output header.
    pub fn echo(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .values
            .iter()
            .filter(|(k, _)| !PATH_KEYS.contains(&k.as_str()))
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        lines.extend(self.params.iter().map(|(k, v)| format!("params.{k} = {v}")));
        lines
    }
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .unwrap_or(v)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Catalog {
        name: String,
        params: BTreeMap<String, f64>,
        force: Option<String>,
    },
    Expr {
        mass: String,
        /// `(source, is_squared)`.
        frequency: (String, bool),
        force: String,
        params: BTreeMap<String, f64>,
    },
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub state: StateSpec,
    pub beta0: Beta0Policy<f64>,
    pub frame: FramePolicy<f64>,
    pub basis: BasisChoice,
    pub solver: SolverConfig,
    pub quadrature: QuadratureConfig,
    pub ellipse_every: Option<f64>,
    pub ellipse_out: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub tol: f64,
    pub oracle: SolverConfig,
}

fn constant(field: &str, src: &str) -> Result<f64> {
    parse_constant(src).map_err(|e| ConfigError::core(field, e, src))
}

fn positive(field: &str, src: &str) -> Result<f64> {
    let v = constant(field, src)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(
            field,
            format!("must be positive, got {v}"),
        ))
    }
}

fn list(field: &str, src: &str, n: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = src.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(ConfigError::new(
            field,
            format!("expected {n} comma-separated values, got `{src}`"),
        ));
    }
    parts.iter().map(|p| constant(field, p)).collect()
}

pub fn parse_state(src: &str) -> Result<StateSpec> {
    let field = "state";
    let src = src.trim();
    if src == "vacuum" {
        return Ok(StateSpec::vacuum());
    }
    if let Some(n) = src.strip_prefix("number:") {
        let n: u32 = n.trim().parse().map_err(|_| {
            ConfigError::new(
                field,
                format!("number state needs a non-negative integer, got `{n}`"),
            )
        })?;
        return Ok(StateSpec::Number(n));
    }
    if let Some(rest) = src.strip_prefix("coherent:") {
        let v = list(field, rest, 2)?;
        return StateSpec::coherent(v[0], v[1]).map_err(|e| ConfigError::new(field, e.to_string()));
    }
    Err(ConfigError::new(
        field,
        format!("expected vacuum, number:N or coherent:MAG,DELTA, got `{src}`"),
    ))
}

pub fn parse_beta0(src: &str) -> Result<Beta0Policy<f64>> {
    match src.trim() {
        "matched" => Ok(Beta0Policy::Matched),
        "zero" => Ok(Beta0Policy::Zero),
        other => {
            let v = list("beta0", other, 2)?;
            Ok(Beta0Policy::Explicit(Complex::new(v[0], v[1])))
        }
    }
}

pub fn parse_invariant(src: &str) -> Result<FramePolicy<f64>> {
    let field = "invariant";
    let src = src.trim();
    if src == "hamiltonian" {
        return Ok(FramePolicy::HamiltonianMatched);
    }
    if let Some(rest) = src.strip_prefix("initial:") {
        let v = list(field, rest, 3)?;
        return Ok(FramePolicy::Initial {
            g_minus: v[0],
            g_zero: v[1],
            g_plus: v[2],
        });
    }
    let v = list(field, src, 3)?;
    InvariantConstants::new(v[0], v[1], v[2])
        .map(FramePolicy::Constants)
        .map_err(|e| ConfigError::new(field, e.to_string()))
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<RunConfig> {
        let get = |k: &str| s.get(k);
        let t0 = get("t0")
            .map(|v| constant("t0", v))
            .transpose()?
            .unwrap_or(0.0);
        let t1 = match get("t1") {
            Some(v) => constant("t1", v)?,
            None => return Err(ConfigError::new("t1", "required")),
        };
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(ConfigError::new(
                "t1",
                format!("must be greater than t0 (t0 = {t0}, t1 = {t1})"),
            ));
        }
        let dt = match get("dt") {
            Some(v) => positive("dt", v)?,
            None => (t1 - t0) / 100.0,
        };
        let model = resolve_model(s)?;

        let mut solver = SolverConfig::default();
        if let Some(v) = get("abs-tol") {
            solver.abs_tol = positive("abs-tol", v)?;
        }
        if let Some(v) = get("rel-tol") {
            solver.rel_tol = positive("rel-tol", v)?;
        }
        let mut quadrature = QuadratureConfig::default();
        if let Some(v) = get("quad-tol") {
            quadrature.tol = positive("quad-tol", v)?;
        }
        if let Some(v) = get("max-panel") {
            quadrature.max_panel = Some(positive("max-panel", v)?);
        }
        if let Some(v) = get("drift-rule") {
            quadrature.drift_rule = match v {
                "adaptive" => QuadratureRule::Adaptive,
                "simpson" => QuadratureRule::Simpson,
                other => {
                    return Err(ConfigError::new(
                        "drift-rule",
                        format!("expected adaptive or simpson, got `{other}`"),
                    ))
                }
            };
        }
        let basis = match get("basis").unwrap_or("auto") {
            "auto" => BasisChoice::Auto,
            "numeric" => BasisChoice::Numeric,
            other => {
                return Err(ConfigError::new(
                    "basis",
                    format!("expected auto or numeric, got `{other}`"),
                ))
            }
        };
        let mut oracle = default_solver();
        if let Some(v) = get("oracle-tol") {
            let tol = positive("oracle-tol", v)?;
            oracle = SolverConfig::with_tolerance(tol);
        }
        Ok(RunConfig {
            model,
            t0,
            t1,
            dt,
            state: get("state")
                .map(parse_state)
                .transpose()?
                .unwrap_or_else(StateSpec::vacuum),
            beta0: get("beta0")
                .map(parse_beta0)
                .transpose()?
                .unwrap_or_default(),
            frame: get("invariant")
                .map(parse_invariant)
                .transpose()?
                .unwrap_or_default(),
            basis,
            solver,
            quadrature,
            ellipse_every: get("ellipse-every")
                .map(|v| positive("ellipse-every", v))
                .transpose()?,
            ellipse_out: get("ellipse-out").map(PathBuf::from),
            output: get("output").map(PathBuf::from),
            tol: get("tol")
                .map(|v| positive("tol", v))
                .transpose()?
                .unwrap_or(1e-6),
            oracle,
        })
    }

    pub fn build_model(&self) -> Result<OscillatorModel> {
        match &self.model {
            ModelSpec::Catalog {
                name,
                params,
                force,
            } => {
                let model = catalog(name, params, self.t0, self.t1)
                    .map_err(|e| ConfigError::new("model", e.to_string()))?;
                match force {
                    None => Ok(model),
                    Some(src) => {
                        let f = expression("force", src, &BTreeMap::new())?;
                        model
                            .with_force(f)
                            .map_err(|e| ConfigError::new("force", e.to_string()))
                    }
                }
            }
            ModelSpec::Expr {
                mass,
                frequency,
                force,
                params,
            } => {
                let m = expression("mass", mass, params)?;
                let w = if frequency.1 {
                    Frequency::OmegaSq(expression("omega-sq", &frequency.0, params)?)
                } else {
                    Frequency::Omega(expression("omega", &frequency.0, params)?)
                };
                let f = expression("force", force, params)?;
                OscillatorModel::new(m, w, f, self.t0, self.t1)
                    .map_err(|e| ConfigError::new("model", e.to_string()))
            }
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let mut s = Scenario::new(self.build_model()?);
        s.basis = self.basis;
        s.frame = self.frame;
        s.beta0 = self.beta0;
        s.solver = self.solver;
        s.quadrature = self.quadrature;
        Ok(s)
    }
}

fn expression(field: &str, src: &str, params: &BTreeMap<String, f64>) -> Result<TimeFunction> {
    let pairs: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let text = substitute_params(src, &pairs);
    lrosc::expr::parse(&text)
        .map(|e| TimeFunction::Expr(std::sync::Arc::new(e)))
        .map_err(|e| ConfigError::parse(field, e, &text))
}

fn resolve_model(s: &Settings) -> Result<ModelSpec> {
    let name = s
        .get("model")
        .ok_or_else(|| ConfigError::new("model", "required (constant, pulsating or expr)"))?;
    let mut params = BTreeMap::new();
    for (k, v) in &s.params {
        params.insert(k.clone(), constant(&format!("params.{k}"), v)?);
    }
    if name == "expr" {
        for &k in NAMED_PARAMS.iter().filter(|&&k| k != "omega") {
            if let Some(v) = s.get(k) {
                params.insert(k.to_string(), constant(k, v)?);
            }
        }
        let mass = s
            .get("mass")
            .ok_or_else(|| ConfigError::new("mass", "required for model expr"))?;
        let frequency = match (s.get("omega"), s.get("omega-sq")) {
            (Some(w), None) => (w.to_string(), false),
            (None, Some(w2)) => (w2.to_string(), true),
            _ => {
                return Err(ConfigError::new(
                    "omega",
                    "model expr needs exactly one of omega and omega-sq",
                ))
            }
        };
        return Ok(ModelSpec::Expr {
            mass: mass.to_string(),
            frequency,
            force: s.get("force").unwrap_or("0").to_string(),
            params,
        });
    }
    let entry = CATALOG.iter().find(|e| e.name == name).ok_or_else(|| {
        ConfigError::new(
            "model",
            format!("unknown model `{name}`; expected constant, pulsating or expr"),
        )
    })?;
    for key in ["mass", "omega-sq"] {
        if s.get(key).is_some() {
            return Err(ConfigError::new(
                key,
                format!("only used with model expr, not `{name}`"),
            ));
        }
    }
    for &k in NAMED_PARAMS {
        if let Some(v) = s.get(k) {
            params.insert(k.to_string(), constant(k, v)?);
        }
    }
    for k in params.keys() {
        if !entry.params.contains(&k.as_str()) && !entry.optional.contains(&k.as_str()) {
            return Err(ConfigError::new(
                k,
                format!("not a parameter of model `{name}`"),
            ));
        }
    }
    for &k in entry.params {
        if !params.contains_key(k) {
            return Err(ConfigError::new(k, format!("required by model `{name}`")));
        }
    }
    Ok(ModelSpec::Catalog {
        name: name.to_string(),
        params,
        force: s.get("force").map(str::to_string),
    })
}
