//! Flat `key = value` configuration files.
//!
//! ```text
//! # comments start with '#'
//! model.kind = bourgeois_cahen
//! model.a = 1
//! model.b = 1
//! points.count = 5
//! points.seed = 7
//! points.box = 1.0
//! directions.count = 1
//! directions.seed = 11
//! r_max = 7
//! checks = structure, preferred, qr, parity
//! tol.parity = 1e-8
//! geodesic.T = 0.5
//! ```
//!
//! Lists are comma separated; several points are separated by `;`.
//! Matrices are given row-major as a single comma list.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geodesics::GeodesicOptions;
use crate::models::{default_conformal_factor, ModelSpec, Polynomial};
use crate::reduction::preset_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    Structure,
    Preferred,
    Qr,
    RicciType,
    Parity,
    Pullback,
    CrossCheck,
    Curvature,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::Structure,
        CheckKind::Preferred,
        CheckKind::Qr,
        CheckKind::RicciType,
        CheckKind::Parity,
        CheckKind::Pullback,
        CheckKind::CrossCheck,
        CheckKind::Curvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Structure => "structure",
            CheckKind::Preferred => "preferred",
            CheckKind::Qr => "qr",
            CheckKind::RicciType => "ricci_type",
            CheckKind::Parity => "parity",
            CheckKind::Pullback => "pullback",
            CheckKind::CrossCheck => "cross_check",
            CheckKind::Curvature => "curvature",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CheckKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = CheckKind::ALL.iter().map(|c| c.name()).collect();
                format!("unknown check `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone)]
pub enum ModelChoice {
    Catalog(ModelSpec),
    Reduced { a: DMatrix<f64>, seed: u64, label: String },
}

impl ModelChoice {
    pub fn dim(&self) -> usize {
        match self {
            ModelChoice::Catalog(spec) => spec.dim(),
            ModelChoice::Reduced { a, .. } => a.nrows() - 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    List(Vec<Vec<f64>>),
    Random {
        count: usize,
        seed: u64,
        /// Half-width of the sampling box around `center`.
        half_width: f64,
        center: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackOptions {
    pub radius: f64,
    pub rays: usize,
    pub fd_step: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub model: ModelChoice,
    pub points: Sampler,
    pub directions: Sampler,
    pub r_max: usize,
    pub checks: Vec<CheckKind>,
    /// Per-check threshold overrides, keyed by the `tol.` suffix.
    pub tolerances: BTreeMap<String, f64>,
    pub geodesic: GeodesicOptions,
    pub fit_degree: Option<usize>,
    pub pullback: PullbackOptions,
    pub output: Option<PathBuf>,
    /// SHA-256 of the configuration text.
    pub hash: String,
}

impl CheckConfig {
    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }
}

/// Raw key/value pairs with their line numbers.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

fn config_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(line_no, line, "expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(config_error(line_no, key, "empty key"));
            }
            let value = value.trim().trim_matches('"').to_string();
            if entries.insert(key.to_string(), (line_no, value)).is_some() {
                return Err(config_error(line_no, key, "duplicate key"));
            }
        }
        Ok(RawConfig { entries })
    }

    fn get(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| config_error(*line, key, format!("cannot parse `{v}`"))),
        }
    }

    fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => parse_list(v)
                .map(Some)
                .map_err(|m| config_error(*line, key, m)),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.get(key).map_or(0, |(l, _)| *l)
    }
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number")))
        .collect()
}

const TOP_KEYS: &[&str] = &[
    "points",
    "points.count",
    "points.seed",
    "points.box",
    "points.center",
    "directions",
    "directions.count",
    "directions.seed",
    "r_max",
    "checks",
    "geodesic.T",
    "geodesic.tol",
    "geodesic.grid_nodes",
    "geodesic.fit_degree",
    "pullback.radius",
    "pullback.rays",
    "pullback.fd_step",
    "pullback.seed",
    "output",
];

const MODEL_FIELDS: &[&str] = &["kind", "n", "kappa", "a", "b", "f", "seed", "scale", "preset", "A"];

fn known_model_key(rest: &str) -> bool {
    if MODEL_FIELDS.contains(&rest) {
        return true;
    }
    for factor in ["factor1.", "factor2."] {
        if let Some(inner) = rest.strip_prefix(factor) {
            return known_model_key(inner);
        }
    }
    false
}

fn parse_model_spec(raw: &RawConfig, prefix: &str) -> Result<ModelSpec> {
    let key = |f: &str| format!("{prefix}.{f}");
    let kind_key = key("kind");
    let (line, kind) = raw
        .get(&kind_key)
        .cloned()
        .ok_or_else(|| config_error(0, &kind_key, "missing model kind"))?;
    let spec = match kind.as_str() {
        "flat" => ModelSpec::Flat {
            n: raw.parsed_or(&key("n"), 1)?,
        },
        "constant_curvature" => ModelSpec::ConstantCurvature {
            kappa: raw.parsed_or(&key("kappa"), 1.0)?,
        },
        "bourgeois_cahen" => ModelSpec::BourgeoisCahen {
            a: raw.parsed_or(&key("a"), 1.0)?,
            b: raw.parsed_or(&key("b"), 1.0)?,
        },
        "bourgeois_cahen_printed" => ModelSpec::BourgeoisCahenPrinted {
            a: raw.parsed_or(&key("a"), 1.0)?,
            b: raw.parsed_or(&key("b"), 1.0)?,
        },
        "conformal_kahler" => {
            let f = match raw.get(&key("f")) {
                None => default_conformal_factor(),
                Some((l, text)) => {
                    Polynomial::parse(2, text).map_err(|e| config_error(*l, &key("f"), e.to_string()))?
                }
            };
            ModelSpec::ConformalKahler { f }
        }
        "polynomial" => ModelSpec::Polynomial {
            n: raw.parsed_or(&key("n"), 2)?,
            seed: raw.parsed_or(&key("seed"), 1)?,
            scale: raw.parsed_or(&key("scale"), 0.5)?,
        },
        "product" => ModelSpec::Product(
            Box::new(parse_model_spec(raw, &key("factor1"))?),
            Box::new(parse_model_spec(raw, &key("factor2"))?),
        ),
        other => return Err(config_error(line, &kind_key, format!("unknown model kind `{other}`"))),
    };
    Ok(spec)
}

fn parse_model(raw: &RawConfig) -> Result<ModelChoice> {
    let kind = raw
        .get("model.kind")
        .map(|(_, v)| v.clone())
        .ok_or_else(|| config_error(0, "model.kind", "missing model kind"))?;
    if kind != "reduced" {
        return Ok(ModelChoice::Catalog(parse_model_spec(raw, "model")?));
    }
    let seed = raw.parsed_or("model.seed", 1u64)?;
    let n: usize = raw.parsed_or("model.n", 2)?;
    match (raw.get("model.A"), raw.get("model.preset")) {
        (Some(_), Some(_)) => Err(config_error(
            raw.line("model.A"),
            "model.A",
            "give either model.A or model.preset, not both",
        )),
        (Some((line, _)), None) => {
            let values = raw.list("model.A")?.unwrap_or_default();
            let m = (values.len() as f64).sqrt().round() as usize;
            if m * m != values.len() || m < 4 || m % 2 != 0 {
                return Err(config_error(
                    *line,
                    "model.A",
                    format!("expected an even square matrix of size ≥ 4, got {} entries", values.len()),
                ));
            }
            Ok(ModelChoice::Reduced {
                a: DMatrix::from_row_slice(m, m, &values),
                seed,
                label: "custom".into(),
            })
        }
        (None, Some((line, preset))) => {
            let a = preset_matrix(preset, n).map_err(|e| config_error(*line, "model.preset", e.to_string()))?;
            Ok(ModelChoice::Reduced {
                a,
                seed,
                label: preset.clone(),
            })
        }
        (None, None) => Err(config_error(0, "model.preset", "reduced model needs model.A or model.preset")),
    }
}

fn parse_sampler(raw: &RawConfig, name: &str, dim: usize, default_count: usize) -> Result<Sampler> {
    if let Some((line, text)) = raw.get(name) {
        let mut list = Vec::new();
        for chunk in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let v = parse_list(chunk).map_err(|m| config_error(*line, name, m))?;
            if v.len() != dim {
                return Err(config_error(
                    *line,
                    name,
                    format!("entry `{chunk}` has {} components, model dimension is {dim}", v.len()),
                ));
            }
            list.push(v);
        }
        if list.is_empty() {
            return Err(config_error(*line, name, "empty list"));
        }
        return Ok(Sampler::List(list));
    }
    let count = raw.parsed_or(&format!("{name}.count"), default_count)?;
    if count == 0 {
        return Err(config_error(raw.line(&format!("{name}.count")), &format!("{name}.count"), "must be positive"));
    }
    let seed = raw.parsed_or(&format!("{name}.seed"), 0u64)?;
    let half_width = raw.parsed_or(&format!("{name}.box"), 1.0)?;
    let center = if name == "points" {
        match raw.list("points.center")? {
            Some(c) if c.len() != dim => {
                return Err(config_error(raw.line("points.center"), "points.center", "wrong dimension"))
            }
            other => other,
        }
    } else {
        None
    };
    Ok(Sampler::Random {
        count,
        seed,
        half_width,
        center,
    })
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<CheckConfig> {
    use sha2::{Digest, Sha256};

    let raw = RawConfig::parse(text)?;
    for (key, (line, _)) in &raw.entries {
        let ok = TOP_KEYS.contains(&key.as_str())
            || key.strip_prefix("model.").is_some_and(known_model_key)
            || key
                .strip_prefix("tol.")
                .is_some_and(|k| k.split('.').next().is_some_and(|c| c.parse::<CheckKind>().is_ok()));
        if !ok {
            return Err(config_error(*line, key, "unknown key"));
        }
    }
    let model = parse_model(&raw)?;
    let dim = model.dim();
    let points = parse_sampler(&raw, "points", dim, 1)?;
    let directions = parse_sampler(&raw, "directions", dim, 1)?;

    let r_max: usize = raw.parsed_or("r_max", 7)?;
    if r_max < 3 || r_max % 2 == 0 {
        return Err(config_error(raw.line("r_max"), "r_max", "must be odd and at least 3"));
    }

    let checks = match raw.get("checks") {
        None => vec![CheckKind::Structure, CheckKind::Preferred, CheckKind::Qr],
        Some((line, text)) => {
            let mut out = Vec::new();
            for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let c: CheckKind = item.parse().map_err(|m: String| config_error(*line, "checks", m))?;
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            out.sort();
            out
        }
    };

    let mut tolerances = BTreeMap::new();
    for (key, (line, value)) in &raw.entries {
        if let Some(name) = key.strip_prefix("tol.") {
            let v: f64 = value
                .parse()
                .map_err(|_| config_error(*line, key, format!("cannot parse `{value}`")))?;
            if !(v >= 0.0) {
                return Err(config_error(*line, key, "tolerance must be non-negative"));
            }
            tolerances.insert(name.to_string(), v);
        }
    }

    let defaults = GeodesicOptions::default();
    let geodesic = GeodesicOptions {
        t_max: raw.parsed_or("geodesic.T", defaults.t_max)?,
        tol: raw.parsed_or("geodesic.tol", defaults.tol)?,
        nodes: raw.parsed_or("geodesic.grid_nodes", defaults.nodes)?,
    };
    if geodesic.nodes < 3 || geodesic.nodes % 2 == 0 {
        return Err(config_error(raw.line("geodesic.grid_nodes"), "geodesic.grid_nodes", "must be odd and at least 3"));
    }
    if !(geodesic.t_max > 0.0) {
        return Err(config_error(raw.line("geodesic.T"), "geodesic.T", "must be positive"));
    }
    let fit_degree = raw.parsed("geodesic.fit_degree")?;

    let radius = raw.parsed_or("pullback.radius", 0.3)?;
    let pullback = PullbackOptions {
        radius,
        rays: raw.parsed_or("pullback.rays", 4)?,
        fd_step: raw.parsed_or("pullback.fd_step", radius * 1e-4)?,
        seed: raw.parsed_or("pullback.seed", 0)?,
    };

    let output = raw.get("output").map(|(_, v)| PathBuf::from(v));
    let hash = format!("{:x}", Sha256::digest(text.as_bytes()));

    Ok(CheckConfig {
        model,
        points,
        directions,
        r_max,
        checks,
        tolerances,
        geodesic,
        fit_degree,
        pullback,
        output,
        hash,
    })
}
