//! Flat `key=value` run configuration.
//!
//! ```text
//! # comment
//! builtin.name=wedge
//! builtin.tip=0.002
//! particles.dx=0.01
//! clean.max_passes=20
//! ```
//!
//! Lengths left at `auto` are derived from `particles.dx` when the run starts;
//! [`PipelineConfig::resolved_text`] writes every key with its effective value.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::builtin::{BuiltinName, BuiltinParams};
use crate::cleaner::{DEFAULT_EPSILON_FACTOR, DEFAULT_LIMIT_FACTOR, DEFAULT_MAX_PASSES, DEFAULT_WINDOW_RADIUS};
use crate::geometry::io::SurfaceFormat;
use crate::levelset::DEFAULT_REINIT_ITERS;
use crate::relaxation::{DEFAULT_DT_MAX, DEFAULT_ITERATIONS};
use crate::{Error, Result};

/// Default ratio `l_c / Δx`, which makes the fine cell spacing equal `Δx`.
pub const DEFAULT_LC_RATIO: f64 = 4.0;

/// Every recognised key except the open-ended `builtin.<param>` family.
pub const KEYS: &[&str] = &[
    "input.path",
    "input.format",
    "builtin.name",
    "domain",
    "levelset.lc",
    "levelset.reinit_iters",
    "particles.dx",
    "clean.enabled",
    "clean.max_passes",
    "clean.epsilon",
    "clean.d_limit",
    "clean.window_radius",
    "confinement.enabled",
    "confinement.epsilon",
    "relax.iterations",
    "relax.p0",
    "relax.dt_max",
    "output.dir",
    "threads",
];

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySource {
    File { path: PathBuf, format: Option<SurfaceFormat> },
    Builtin { name: BuiltinName, params: BuiltinParams },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub source: GeometrySource,
    /// Explicit `(min, max)` box; `None` pads the geometry bounds by `4 l_c`.
    pub domain: Option<(Vec<f64>, Vec<f64>)>,
    /// Coarse spacing; `None` means `4 Δx`.
    pub lc: Option<f64>,
    pub reinit_iters: usize,
    pub dx: f64,
    pub clean: bool,
    pub max_passes: usize,
    /// Cut-cell band width; `None` means `0.75 l_f`.
    pub clean_epsilon: Option<f64>,
    /// Redistance cap; `None` means `3 l_f`.
    pub d_limit: Option<f64>,
    pub window_radius: usize,
    pub confinement: bool,
    /// Heaviside smoothing width; `None` means `0.75 l_f`.
    pub confinement_epsilon: Option<f64>,
    pub iterations: usize,
    pub p0: f64,
    pub dt_max: f64,
    pub output_dir: PathBuf,
    /// Worker threads, 0 for the rayon default.
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            source: GeometrySource::Builtin {
                name: BuiltinName::Circle,
                params: BuiltinParams::new(),
            },
            domain: None,
            lc: None,
            reinit_iters: DEFAULT_REINIT_ITERS,
            dx: 0.05,
            clean: true,
            max_passes: DEFAULT_MAX_PASSES,
            clean_epsilon: None,
            d_limit: None,
            window_radius: DEFAULT_WINDOW_RADIUS as usize,
            confinement: true,
            confinement_epsilon: None,
            iterations: DEFAULT_ITERATIONS,
            p0: 1.0,
            dt_max: DEFAULT_DT_MAX,
            output_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Configuration(msg.into())
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| config_err(format!("invalid value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(config_err(format!("invalid value '{value}' for {key}: expected true or false"))),
    }
}

fn parse_auto(key: &str, value: &str) -> Result<Option<f64>> {
    if value.trim() == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn parse_domain(value: &str) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    if value.trim() == "auto" {
        return Ok(None);
    }
    let v: Vec<f64> = value
        .split(',')
        .map(|s| parse("domain", s))
        .collect::<Result<_>>()?;
    if v.len() != 4 && v.len() != 6 {
        return Err(config_err(format!(
            "domain needs 4 (2D) or 6 (3D) comma-separated numbers min..,max.., got {}",
            v.len()
        )));
    }
    let d = v.len() / 2;
    Ok(Some((v[..d].to_vec(), v[d..].to_vec())))
}

fn auto_text(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| x.to_string())
}

/// Splits `key=value` lines, skipping blanks and `#` comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

impl PipelineConfig {
    /// Builds a config from ordered pairs; later pairs override earlier ones.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut c = Self::default();
        let mut input: Option<PathBuf> = None;
        let mut format: Option<SurfaceFormat> = None;
        let mut builtin: Option<BuiltinName> = None;
        let mut params = BuiltinParams::new();
        for (key, value) in pairs {
            match key {
                "input.path" => input = Some(PathBuf::from(value)),
                "input.format" => format = if value == "auto" { None } else { Some(value.parse()?) },
                "builtin.name" => builtin = Some(value.parse()?),
                "domain" => c.domain = parse_domain(value)?,
                "levelset.lc" => c.lc = parse_auto(key, value)?,
                "levelset.reinit_iters" => c.reinit_iters = parse(key, value)?,
                "particles.dx" => c.dx = parse(key, value)?,
                "clean.enabled" => c.clean = parse_bool(key, value)?,
                "clean.max_passes" => c.max_passes = parse(key, value)?,
                "clean.epsilon" => c.clean_epsilon = parse_auto(key, value)?,
                "clean.d_limit" => c.d_limit = parse_auto(key, value)?,
                "clean.window_radius" => c.window_radius = parse(key, value)?,
                "confinement.enabled" => c.confinement = parse_bool(key, value)?,
                "confinement.epsilon" => c.confinement_epsilon = parse_auto(key, value)?,
                "relax.iterations" => c.iterations = parse(key, value)?,
                "relax.p0" => c.p0 = parse(key, value)?,
                "relax.dt_max" => c.dt_max = parse(key, value)?,
                "output.dir" => c.output_dir = PathBuf::from(value),
                "threads" => c.threads = parse(key, value)?,
                other => match other.strip_prefix("builtin.") {
                    Some(param) if !param.is_empty() => params = params.with(param, value),
                    _ => return Err(config_err(format!("unknown configuration key '{other}'"))),
                },
            }
        }
        c.source = match (input, builtin) {
            (Some(_), Some(_)) => {
                return Err(config_err("input.path and builtin.name are mutually exclusive"));
            }
            (Some(path), None) => {
                if !params.0.is_empty() {
                    return Err(config_err("builtin.<param> keys require builtin.name"));
                }
                GeometrySource::File { path, format }
            }
            (None, Some(name)) => GeometrySource::Builtin { name, params },
            (None, None) => return Err(config_err("either input.path or builtin.name is required")),
        };
        c.validate()?;
        Ok(c)
    }

    /// Parses a config file body and then applies `overrides` in order.
    pub fn from_text(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        Self::from_pairs(
            pairs
                .iter()
                .chain(overrides)
                .map(|(k, v)| (k.as_str(), v.as_str())),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive, got {v}")))
            }
        };
        positive("particles.dx", self.dx)?;
        positive("relax.p0", self.p0)?;
        positive("relax.dt_max", self.dt_max)?;
        for (name, v) in [
            ("levelset.lc", self.lc),
            ("clean.epsilon", self.clean_epsilon),
            ("clean.d_limit", self.d_limit),
            ("confinement.epsilon", self.confinement_epsilon),
        ] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if let Some((min, max)) = &self.domain {
            if min.iter().zip(max).any(|(a, b)| a.partial_cmp(b) != Some(std::cmp::Ordering::Less)) {
                return Err(config_err("domain min must be below max on every axis"));
            }
        }
        Ok(())
    }

    pub fn lc(&self) -> f64 {
        self.lc.unwrap_or(DEFAULT_LC_RATIO * self.dx)
    }

    pub fn lf(&self) -> f64 {
        self.lc() / 4.0
    }

    pub fn clean_epsilon(&self) -> f64 {
        self.clean_epsilon.unwrap_or(DEFAULT_EPSILON_FACTOR * self.lf())
    }

    pub fn d_limit(&self) -> f64 {
        self.d_limit.unwrap_or(DEFAULT_LIMIT_FACTOR * self.lf())
    }

    pub fn confinement_epsilon(&self) -> f64 {
        self.confinement_epsilon.unwrap_or(DEFAULT_EPSILON_FACTOR * self.lf())
    }

    /// Every key with its effective value, one `key=value` per line. `domain`
    /// is the box actually used by the run.
    pub fn resolved_text(&self, domain: (&[f64], &[f64])) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        match &self.source {
            GeometrySource::File { path, format } => {
                put("input.path", path.display().to_string());
                put("input.format", format.map_or("auto", |f| f.name()).to_string());
            }
            GeometrySource::Builtin { name, params } => {
                put("builtin.name", name.as_str().to_string());
                for (k, v) in &params.0 {
                    put(&format!("builtin.{k}"), v.clone());
                }
            }
        }
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        put("domain", format!("{},{}", join(domain.0), join(domain.1)));
        put("levelset.lc", self.lc().to_string());
        put("levelset.reinit_iters", self.reinit_iters.to_string());
        put("particles.dx", self.dx.to_string());
        put("clean.enabled", self.clean.to_string());
        put("clean.max_passes", self.max_passes.to_string());
        put("clean.epsilon", self.clean_epsilon().to_string());
        put("clean.d_limit", self.d_limit().to_string());
        put("clean.window_radius", self.window_radius.to_string());
        put("confinement.enabled", self.confinement.to_string());
        put("confinement.epsilon", self.confinement_epsilon().to_string());
        put("relax.iterations", self.iterations.to_string());
        put("relax.p0", self.p0.to_string());
        put("relax.dt_max", self.dt_max.to_string());
        put("output.dir", self.output_dir.display().to_string());
        put("threads", self.threads.to_string());
        out
    }

    /// Unresolved form: `auto` where a value is derived at run time.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        match &self.source {
            GeometrySource::File { path, format } => {
                put("input.path", path.display().to_string());
                put("input.format", format.map_or("auto", |f| f.name()).to_string());
            }
            GeometrySource::Builtin { name, params } => {
                put("builtin.name", name.as_str().to_string());
                for (k, v) in &params.0 {
                    put(&format!("builtin.{k}"), v.clone());
                }
            }
        }
        let domain = self.domain.as_ref().map_or_else(
            || "auto".to_string(),
            |(a, b)| a.iter().chain(b).map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        );
        put("domain", domain);
        put("levelset.lc", auto_text(self.lc));
        put("levelset.reinit_iters", self.reinit_iters.to_string());
        put("particles.dx", self.dx.to_string());
        put("clean.enabled", self.clean.to_string());
        put("clean.max_passes", self.max_passes.to_string());
        put("clean.epsilon", auto_text(self.clean_epsilon));
        put("clean.d_limit", auto_text(self.d_limit));
        put("clean.window_radius", self.window_radius.to_string());
        put("confinement.enabled", self.confinement.to_string());
        put("confinement.epsilon", auto_text(self.confinement_epsilon));
        put("relax.iterations", self.iterations.to_string());
        put("relax.p0", self.p0.to_string());
        put("relax.dt_max", self.dt_max.to_string());
        put("output.dir", self.output_dir.display().to_string());
        put("threads", self.threads.to_string());
        out
    }
}
