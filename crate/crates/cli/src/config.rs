//! Flat `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment. Unspecified keys take the
//! defaults of [`RunConfig::new`] for the chosen equation.

use rmz_core::driver::{InitialCondition, Variant};
use rmz_core::{Equation, RunConfig, SolveVariant};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: cannot parse `{value}` for key `{key}`: {reason}")]
    Value {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: key `{key}`: {message}")]
    Invalid { line: usize, key: String, message: String },
}

impl ConfigError {
    pub fn line(&self) -> usize {
        match self {
            ConfigError::Syntax { line, .. }
            | ConfigError::UnknownKey { line, .. }
            | ConfigError::Duplicate { line, .. }
            | ConfigError::Value { line, .. }
            | ConfigError::Invalid { line, .. } => *line,
        }
    }
}

const KEYS: &[&str] = &[
    "equation",
    "N",
    "order",
    "variant",
    "solve",
    "TOL",
    "rel_tol",
    "abs_tol",
    "t_end",
    "initial_condition",
    "sample_interval",
    "svd_cutoff",
    "drop_row",
    "coefficients",
    "blowup_factor",
];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn err(&self, reason: impl ToString) -> ConfigError {
        ConfigError::Value {
            line: self.line,
            key: self.key.to_string(),
            value: self.value.to_string(),
            reason: reason.to_string(),
        }
    }

    fn float(&self) -> Result<f64, ConfigError> {
        self.value.parse::<f64>().map_err(|e| self.err(e))
    }

    fn usize(&self) -> Result<usize, ConfigError> {
        self.value.parse::<usize>().map_err(|e| self.err(e))
    }
}

pub fn parse_equation(s: &str) -> Option<Equation> {
    match s {
        "burgers" => Some(Equation::Burgers),
        "euler3d" | "euler" => Some(Equation::Euler3d),
        _ => None,
    }
}

pub fn parse_variant(s: &str) -> Option<Variant> {
    match s {
        "full" => Some(Variant::Full),
        "rmz" => Some(Variant::Rmz),
        "tmodel" | "t-model" => Some(Variant::TModel),
        "mz-unrenormalized" | "unrenormalized" => Some(Variant::Unrenormalized),
        _ => None,
    }
}

fn parse_solve(s: &str) -> Option<SolveVariant> {
    match s {
        "full-solve" => Some(SolveVariant::FullSolve),
        "pinned-markovian" | "pinned" => Some(SolveVariant::PinnedMarkovian),
        _ => None,
    }
}

fn parse_ic(s: &str) -> Option<InitialCondition> {
    match s {
        "sine" | "sin" => Some(InitialCondition::Sine),
        "taylor-green" => Some(InitialCondition::TaylorGreen),
        _ => None,
    }
}

/// Parses a configuration and validates the result.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: body.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        entries.push(Entry { line, key, value });
    }

    // the equation decides the remaining defaults
    let equation = match entries.iter().find(|e| e.key == "equation") {
        Some(e) => parse_equation(e.value).ok_or_else(|| e.err("expected burgers or euler3d"))?,
        None => Equation::Burgers,
    };
    let mut cfg = RunConfig::new(equation);
    for e in &entries {
        match e.key {
            "equation" => {}
            "N" => cfg.resolved = e.usize()?,
            "order" => cfg.order = e.usize()?,
            "variant" => {
                cfg.variant = parse_variant(e.value).ok_or_else(|| e.err("expected full, rmz, tmodel or mz-unrenormalized"))?
            }
            "solve" => cfg.solve = parse_solve(e.value).ok_or_else(|| e.err("expected full-solve or pinned-markovian"))?,
            "TOL" => cfg.switch_tol = e.float()?,
            "rel_tol" => cfg.rel_tol = e.float()?,
            "abs_tol" => cfg.abs_tol = e.float()?,
            "t_end" => cfg.t_end = e.float()?,
            "initial_condition" => {
                cfg.initial_condition = parse_ic(e.value).ok_or_else(|| e.err("expected sine or taylor-green"))?
            }
            "sample_interval" => cfg.sample_interval = e.float()?,
            "svd_cutoff" => cfg.svd_cutoff = e.float()?,
            "drop_row" => cfg.drop_row = Some(e.usize()?),
            "coefficients" => {
                let values = e
                    .value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|err| e.err(err)))
                    .collect::<Result<Vec<_>, _>>()?;
                cfg.forced_coefficients = Some(values);
            }
            "blowup_factor" => cfg.blowup_factor = e.float()?,
            _ => unreachable!("key list and match arms disagree"),
        }
    }

    cfg.validate().map_err(|err| {
        let message = match err {
            rmz_core::Error::InvalidConfig(m) => m,
            other => other.to_string(),
        };
        let key = blame(&message);
        let line = entries.iter().find(|e| e.key == key).map(|e| e.line).unwrap_or(0);
        ConfigError::Invalid {
            line,
            key: key.to_string(),
            message,
        }
    })?;
    Ok(cfg)
}

/// Key responsible for a validation message.
fn blame(message: &str) -> &'static str {
    let table = [
        ("N must", "N"),
        ("order", "order"),
        ("initial condition", "initial_condition"),
        ("t_end", "t_end"),
        ("sample_interval", "sample_interval"),
        ("integrator", "rel_tol"),
        ("TOL", "TOL"),
        ("forced coefficients", "coefficients"),
        ("drop_row", "drop_row"),
    ];
    table
        .iter()
        .find(|(needle, _)| message.contains(needle))
        .map(|(_, key)| *key)
        .unwrap_or("equation")
}

/// Writes every field of `cfg` in the format read by [`parse_config`].
pub fn format_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "equation = {}", cfg.equation.name());
    let _ = writeln!(s, "N = {}", cfg.resolved);
    let _ = writeln!(s, "order = {}", cfg.order);
    let _ = writeln!(s, "variant = {}", cfg.variant.name());
    let _ = writeln!(s, "solve = {}", cfg.solve.name());
    let _ = writeln!(s, "TOL = {:e}", cfg.switch_tol);
    let _ = writeln!(s, "rel_tol = {:e}", cfg.rel_tol);
    let _ = writeln!(s, "abs_tol = {:e}", cfg.abs_tol);
    let _ = writeln!(s, "t_end = {}", cfg.t_end);
    let _ = writeln!(s, "initial_condition = {}", cfg.initial_condition.name());
    let _ = writeln!(s, "sample_interval = {}", cfg.sample_interval);
    let _ = writeln!(s, "svd_cutoff = {:e}", cfg.svd_cutoff);
    if let Some(r) = cfg.drop_row {
        let _ = writeln!(s, "drop_row = {r}");
    }
    if let Some(a) = &cfg.forced_coefficients {
        let list: Vec<String> = a.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "coefficients = {}", list.join(","));
    }
    let _ = writeln!(s, "blowup_factor = {}", cfg.blowup_factor);
    s
}
