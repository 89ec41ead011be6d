//! `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;

use blab_core::experiments::{Experiment, ExperimentKind, Settings};
use blab_core::geometry::standard_exhaustions;
use blab_core::{OperatorWord, Resolution};

/// Keys accepted in a config file.
pub const KEYS: [&str; 17] = [
    "experiment",
    "exhaustion",
    "length",
    "word",
    "symbol",
    "quad.n_radial",
    "quad.n_angular",
    "truncation",
    "band",
    "points",
    "p_list",
    "tolerance",
    "lp_tolerance",
    "radii",
    "clamp_levels",
    "seed",
    "output",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line, when the problem is tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line: Some(line), message: message.into() }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output: PathBuf,
    /// Duplicate-key notices collected while parsing.
    pub warnings: Vec<String>,
}

pub const DEFAULT_OUTPUT: &str = "blab-output";

fn number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| err(line, format!("malformed value `{v}` for {key}")))
}

fn positive_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<f64> =
        v.split(',').map(|t| number::<f64>(line, key, t.trim())).collect::<Result<_, _>>()?;
    if items.is_empty() || items.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(err(line, format!("{key} needs positive finite numbers, got `{v}`")));
    }
    Ok(items)
}

fn positive(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = number(line, key, v)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(err(line, format!("{key} must be positive, got `{v}`")));
    }
    Ok(x)
}

/// Parses and validates a config. Blank lines and `#` comments are
/// ignored; a repeated key overrides the earlier one with a warning.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: Vec<(usize, &str, &str)> = Vec::new();
    let mut warnings = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(line, format!("expected `key = value`, got `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(line, format!("unknown key `{key}`; known keys: {}", KEYS.join(", "))));
        }
        if value.is_empty() {
            return Err(err(line, format!("empty value for {key}")));
        }
        if let Some(prev) = entries.iter().position(|e| e.1 == key) {
            warnings.push(format!("line {line}: duplicate key `{key}` overrides line {}", entries[prev].0));
            entries.remove(prev);
        }
        entries.push((line, key, value));
    }

    let Some(&(kind_line, _, kind_text)) = entries.iter().find(|e| e.1 == "experiment") else {
        return Err(ConfigError { line: None, message: "missing required key `experiment`".into() });
    };
    let kind: ExperimentKind = kind_text.parse().map_err(|e| err(kind_line, format!("{e}")))?;
    let mut exp = Experiment::new(kind);
    let mut s = Settings::default();
    let mut output = PathBuf::from(DEFAULT_OUTPUT);
    let (mut n_radial, mut n_angular) = (None, None);

    for &(line, key, v) in &entries {
        match key {
            "experiment" => {}
            "exhaustion" => exp.exhaustion = Some(v.to_string()),
            "length" => exp.length = Some(number(line, key, v)?),
            "word" | "symbol" => {
                v.parse::<OperatorWord>().map_err(|e| err(line, format!("{e}")))?;
                exp.word = Some(v.to_string());
            }
            "quad.n_radial" => n_radial = Some((line, number::<usize>(line, key, v)?)),
            "quad.n_angular" => n_angular = Some((line, number::<usize>(line, key, v)?)),
            "truncation" => {
                s.truncation = number(line, key, v)?;
                if s.truncation == 0 {
                    return Err(err(line, "truncation must be at least 1"));
                }
            }
            "band" => {
                let b = positive_list(line, key, v)?;
                let [lo, hi] = b.as_slice() else {
                    return Err(err(line, format!("band needs two radii `lo, hi`, got `{v}`")));
                };
                if lo > hi {
                    return Err(err(line, format!("band lower radius above upper radius in `{v}`")));
                }
                s.band = Some((*lo, *hi));
            }
            "points" => s.points = number(line, key, v)?,
            "p_list" => s.p_list = positive_list(line, key, v)?,
            "tolerance" => s.tolerance = Some(positive(line, key, v)?),
            "lp_tolerance" => s.lp_tolerance = Some(positive(line, key, v)?),
            "radii" => exp.radii = Some(positive_list(line, key, v)?),
            "clamp_levels" => exp.clamp_levels = Some(positive_list(line, key, v)?),
            "seed" => s.seed = number(line, key, v)?,
            "output" => output = PathBuf::from(v),
            _ => unreachable!("keys are checked above"),
        }
    }
    if n_radial.is_some() || n_angular.is_some() {
        let line = n_radial.or(n_angular).map(|p| p.0).unwrap_or(0);
        let nr = n_radial.map(|p| p.1).unwrap_or(s.resolution.n_radial());
        let na = n_angular.map(|p| p.1).unwrap_or(s.resolution.n_angular);
        s.resolution = Resolution::from_totals(nr, na).map_err(|e| err(line, format!("{e}")))?;
    }
    if let Some(&(line, _, name)) = entries.iter().find(|e| e.1 == "exhaustion") {
        standard_exhaustions(name, 2).map_err(|e| err(line, format!("{e}")))?;
    }
    exp.settings = s;
    Ok(RunConfig { experiment: exp, output, warnings })
}
