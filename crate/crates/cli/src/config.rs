//! Flat `key=value` run configuration.
//!
//! ```text
//! # closed-form single mode
//! domain.length=1
//! domain.omega_lo=0
//! domain.omega_hi=1
//! problem.y0=mode:1
//! problem.r=0.1
//! problem.M=0.5
//! problem.tau=0
//! sweep.M_values=0.3,0.5,0.7
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown or repeated keys are
//! errors. Emission is canonical: every key, fixed order, defaults resolved.

use std::collections::BTreeMap;
use std::fmt;

use heat_impulse::{
    ControlSpace, DomainSpec, InitialState, OracleGrid, ProblemSpec, SpectralBasis, SweepGrid,
    Tolerances,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub m_values: Vec<f64>,
    pub tau_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub length: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub modes: usize,
    pub control_space: ControlSpace,
    pub y0: InitialState,
    pub r: f64,
    pub bound: f64,
    pub tau: f64,
    pub tolerances: Tolerances,
    pub sweep: Option<SweepAxes>,
    pub oracle: OracleGrid,
    pub output: Option<String>,
}

const KEYS: &[&str] = &[
    "domain.length",
    "domain.omega_lo",
    "domain.omega_hi",
    "discretization.modes",
    "discretization.control_space",
    "problem.y0",
    "problem.r",
    "problem.M",
    "problem.tau",
    "tol.time",
    "tol.secular",
    "tol.cert",
    "sweep.M_values",
    "sweep.tau_values",
    "oracle.directions",
    "oracle.radii",
    "oracle.time_step",
    "output.path",
];

/// Raw entries with the line each came from.
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.remove(key)
    }

    fn float(&mut self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        match self.take(key) {
            Some((line, v)) => parse_f64(&v).map_err(|m| ConfigError::at(line, format!("{key}: {m}"))),
            None => default.ok_or_else(|| ConfigError::general(format!("missing required key `{key}`"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            Some((line, v)) => v
                .parse::<usize>()
                .map_err(|e| ConfigError::at(line, format!("{key}: `{v}`: {e}"))),
            None => Ok(default),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<(usize, Vec<f64>)>, ConfigError> {
        match self.take(key) {
            Some((line, v)) => {
                let vals = v
                    .split(',')
                    .map(|p| parse_f64(p.trim()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|m| ConfigError::at(line, format!("{key}: {m}")))?;
                Ok(Some((line, vals)))
            }
            None => Ok(None),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

/// Splits `text` into `key -> (line, value)`, rejecting unknown or repeated keys.
/// Keys are matched after stripping `prefix`; lines without it are ignored
/// when `prefix` is non-empty.
pub(crate) fn scan(text: &str, prefix: &str) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected key=value, got `{trimmed}`")))?;
        let key = key.trim();
        let Some(key) = key.strip_prefix(prefix) else {
            continue;
        };
        if out.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
            return Err(ConfigError::at(line, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_prefixed(text, "")
    }

    pub(crate) fn parse_prefixed(text: &str, prefix: &str) -> Result<Self, ConfigError> {
        let raw = scan(text, prefix)?;
        for (key, (line, _)) in &raw {
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::at(*line, format!("unknown key `{prefix}{key}`")));
            }
        }
        let mut e = Entries(raw);
        let length = e.float("domain.length", Some(1.0))?;
        let omega_lo = e.float("domain.omega_lo", Some(0.0))?;
        let omega_hi = e.float("domain.omega_hi", Some(length))?;
        let modes = e.usize("discretization.modes", heat_impulse::min_time::DEFAULT_MODES)?;
        let control_space = match e.take("discretization.control_space") {
            Some((line, v)) => ControlSpace::parse(&v).ok_or_else(|| {
                ConfigError::at(line, format!("control_space must be `actuator` or `truncated`, got `{v}`"))
            })?,
            None => ControlSpace::default(),
        };
        let y0 = match e.take("problem.y0") {
            Some((line, v)) => v
                .parse::<InitialState>()
                .map_err(|m| ConfigError::at(line, format!("problem.y0: {m}")))?,
            None => return Err(ConfigError::general("missing required key `problem.y0`")),
        };
        let r = e.float("problem.r", None)?;
        let bound = e.float("problem.M", None)?;
        let tau = e.float("problem.tau", Some(0.0))?;
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            time: e.float("tol.time", Some(defaults.time))?,
            secular: e.float("tol.secular", Some(defaults.secular))?,
            cert: e.float("tol.cert", Some(defaults.cert))?,
        };
        let m_values = e.list("sweep.M_values")?;
        let tau_values = e.list("sweep.tau_values")?;
        let sweep = match (m_values, tau_values) {
            (None, None) => None,
            (Some((_, m)), None) => Some(SweepAxes { m_values: m, tau_values: vec![tau] }),
            (None, Some((_, t))) => Some(SweepAxes { m_values: vec![bound], tau_values: t }),
            (Some((_, m)), Some((_, t))) => Some(SweepAxes { m_values: m, tau_values: t }),
        };
        let og = OracleGrid::default();
        let oracle = OracleGrid {
            directions: e.usize("oracle.directions", og.directions)?,
            radii: e.usize("oracle.radii", og.radii)?,
            time_step: e.float("oracle.time_step", Some(og.time_step))?,
        };
        let output = e.take("output.path").map(|(_, v)| v);

        let cfg = RunConfig {
            length,
            omega_lo,
            omega_hi,
            modes,
            control_space,
            y0,
            r,
            bound,
            tau,
            tolerances,
            sweep,
            oracle,
            output,
        };
        cfg.problem_spec().map_err(ConfigError::general)?;
        Ok(cfg)
    }

    /// Canonical text form; `parse(emit(c)) == c`.
    pub fn emit(&self) -> String {
        self.emit_prefixed("")
    }

    pub(crate) fn emit_prefixed(&self, prefix: &str) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut lines = vec![
            ("domain.length", self.length.to_string()),
            ("domain.omega_lo", self.omega_lo.to_string()),
            ("domain.omega_hi", self.omega_hi.to_string()),
            ("discretization.modes", self.modes.to_string()),
            ("discretization.control_space", self.control_space.name().to_string()),
            ("problem.y0", self.y0.to_string()),
            ("problem.r", self.r.to_string()),
            ("problem.M", self.bound.to_string()),
            ("problem.tau", self.tau.to_string()),
            ("tol.time", self.tolerances.time.to_string()),
            ("tol.secular", self.tolerances.secular.to_string()),
            ("tol.cert", self.tolerances.cert.to_string()),
        ];
        if let Some(s) = &self.sweep {
            lines.push(("sweep.M_values", list(&s.m_values)));
            lines.push(("sweep.tau_values", list(&s.tau_values)));
        }
        lines.push(("oracle.directions", self.oracle.directions.to_string()));
        lines.push(("oracle.radii", self.oracle.radii.to_string()));
        lines.push(("oracle.time_step", self.oracle.time_step.to_string()));
        if let Some(p) = &self.output {
            lines.push(("output.path", p.clone()));
        }
        lines.into_iter().map(|(k, v)| format!("{prefix}{k}={v}\n")).collect()
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, String> {
        let domain = DomainSpec::new(self.length, self.omega_lo, self.omega_hi).map_err(|e| e.to_string())?;
        let basis = SpectralBasis::new(self.length, self.modes).map_err(|e| e.to_string())?;
        let y0 = self.y0.to_field(&basis).map_err(|e| e.to_string())?;
        let spec = ProblemSpec {
            y0,
            domain,
            r: self.r,
            bound: self.bound,
            tau: self.tau,
            n_modes: self.modes,
            control_space: self.control_space,
            tolerances: self.tolerances,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid, String> {
        let axes = self
            .sweep
            .as_ref()
            .ok_or("sweep needs `sweep.M_values` and/or `sweep.tau_values`")?;
        let grid = SweepGrid {
            m_values: axes.m_values.clone(),
            tau_values: axes.tau_values.clone(),
            base: self.problem_spec()?,
        };
        grid.validate().map_err(|e| e.to_string())?;
        Ok(grid)
    }

    /// Replaces the seed of a `random:` preset.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.y0 = self.y0.with_seed(s);
        }
        self
    }
}
