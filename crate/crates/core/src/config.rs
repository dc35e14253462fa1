//! `key=value` experiment configuration.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::boost::StepSchedule;
use crate::loss::LossSpec;
use crate::stopping::StoppingRule;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn missing(key: &str, kind: ExperimentKind) -> Self {
        ConfigError {
            line: None,
            message: format!("'{key}' is required for {kind}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Gen,
    Train,
    Sweep,
    Bounds,
    Rademacher,
    Margin,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Gen,
        ExperimentKind::Train,
        ExperimentKind::Sweep,
        ExperimentKind::Bounds,
        ExperimentKind::Rademacher,
        ExperimentKind::Margin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Gen => "gen",
            ExperimentKind::Train => "train",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::Rademacher => "rademacher",
            ExperimentKind::Margin => "margin",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Option<ExperimentKind>,
    pub d: Option<u32>,
    pub m: Option<usize>,
    pub m_list: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub loss: LossSpec,
    pub schedule: StepSchedule,
    pub max_iters: usize,
    pub stop: StoppingRule,
    pub inner_tol: f64,
    pub n_seeds: usize,
    pub output: Option<String>,
    pub normalize_basis: bool,
    pub n_draws: usize,
    /// Margin instance CSV, relative to the config file.
    pub instance: Option<String>,
    pub h: Option<f64>,
    pub k: Option<usize>,
    /// Steps used to build the reference ensemble of the bounds experiment.
    pub reference_iters: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: None,
            d: None,
            m: None,
            m_list: None,
            seed: None,
            loss: LossSpec::LeastSquares,
            schedule: StepSchedule::Power {
                scale: 1.0,
                exponent: 0.6667,
            },
            max_iters: 1000,
            stop: StoppingRule::None,
            inner_tol: 1e-10,
            n_seeds: 20,
            output: None,
            normalize_basis: false,
            n_draws: 10_000,
            instance: None,
            h: None,
            k: None,
            reference_iters: None,
        }
    }
}

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse::<T>()
        .map_err(|_| ConfigError::at(line, format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError::at(
            line,
            format!("invalid boolean '{value}' for '{key}'"),
        )),
    }
}

/// Parse `key=value` lines. `#` starts a comment; blank lines are ignored.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    let mut loss_name: Option<(usize, String)> = None;
    let mut p: Option<(usize, f64)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::at(
                line,
                format!("expected key=value, got '{content}'"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("empty value for '{key}'")));
        }
        match key {
            "experiment" => {
                cfg.experiment = Some(
                    value
                        .parse()
                        .map_err(|e: String| ConfigError::at(line, e))?,
                )
            }
            "d" => {
                let d: u32 = parse(line, key, value)?;
                if d == 0 {
                    return Err(ConfigError::at(line, "d must be at least 1"));
                }
                cfg.d = Some(d);
            }
            "m" => cfg.m = Some(positive(line, key, parse(line, key, value)?)?),
            "m_list" => {
                let list = value
                    .trim_start_matches('[')
                    .trim_end_matches(']')
                    .split(',')
                    .map(|t| {
                        parse::<usize>(line, key, t.trim()).and_then(|m| positive(line, key, m))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                cfg.m_list = Some(list);
            }
            "seed" => cfg.seed = Some(parse(line, key, value)?),
            "loss" => loss_name = Some((line, value.to_string())),
            "p" => p = Some((line, parse(line, key, value)?)),
            "schedule" => {
                cfg.schedule = value
                    .parse()
                    .map_err(|e| ConfigError::at(line, format!("{e}")))?
            }
            "max_iters" => cfg.max_iters = parse(line, key, value)?,
            "stop" => {
                cfg.stop = value
                    .parse()
                    .map_err(|e| ConfigError::at(line, format!("{e}")))?
            }
            "inner_tol" => {
                let tol: f64 = parse(line, key, value)?;
                if !(tol >= 0.0) {
                    return Err(ConfigError::at(line, "inner_tol must be >= 0"));
                }
                cfg.inner_tol = tol;
            }
            "n_seeds" => cfg.n_seeds = positive(line, key, parse(line, key, value)?)?,
            "output" => cfg.output = Some(value.to_string()),
            "normalize_basis" => cfg.normalize_basis = parse_bool(line, key, value)?,
            "n_draws" => cfg.n_draws = positive(line, key, parse(line, key, value)?)?,
            "instance" => cfg.instance = Some(value.to_string()),
            "h" => {
                let h: f64 = parse(line, key, value)?;
                if !(h.is_finite() && h > 0.0) {
                    return Err(ConfigError::at(line, "h must be positive"));
                }
                cfg.h = Some(h);
            }
            "K" => cfg.k = Some(parse(line, key, value)?),
            "reference_iters" => cfg.reference_iters = Some(parse(line, key, value)?),
            _ => return Err(ConfigError::at(line, format!("unknown key '{key}'"))),
        }
        if seen.contains(&key) {
            return Err(ConfigError::at(line, format!("duplicate key '{key}'")));
        }
        seen.push(key);
    }
    cfg.loss = match (loss_name, p) {
        (None, None) => LossSpec::LeastSquares,
        (None, Some((line, _))) => return Err(ConfigError::at(line, "'p' needs loss=p_norm")),
        (Some((line, name)), p) => {
            let spec = if name.contains(':') {
                if p.is_some() {
                    return Err(ConfigError::at(
                        line,
                        "give p either inline or as 'p', not both",
                    ));
                }
                name.parse::<LossSpec>()
            } else {
                LossSpec::from_name(&name, p.map(|(_, v)| v))
            }
            .map_err(|e| ConfigError::at(line, format!("{e}")))?;
            if let (Some((p_line, _)), false) = (p, matches!(spec, LossSpec::PNorm { .. })) {
                return Err(ConfigError::at(p_line, "'p' needs loss=p_norm"));
            }
            spec
        }
    };
    if let Some(kind) = cfg.experiment {
        cfg.require(kind)?;
    }
    Ok(cfg)
}

fn positive(line: usize, key: &str, v: usize) -> Result<usize, ConfigError> {
    if v == 0 {
        Err(ConfigError::at(line, format!("'{key}' must be at least 1")))
    } else {
        Ok(v)
    }
}

impl RunConfig {
    /// Check that every key `kind` needs is present and consistent.
    pub fn require(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        if let Some(declared) = self.experiment {
            if declared != kind {
                return Err(ConfigError {
                    line: None,
                    message: format!(
                        "config declares experiment={declared}, but {kind} was requested"
                    ),
                });
            }
        }
        use ExperimentKind::*;
        if kind != Margin && self.seed.is_none() {
            return Err(ConfigError::missing("seed", kind));
        }
        if matches!(kind, Gen | Train | Sweep | Bounds) && self.d.is_none() {
            return Err(ConfigError::missing("d", kind));
        }
        match kind {
            Gen | Train | Bounds if self.m.is_none() => Err(ConfigError::missing("m", kind)),
            Sweep | Rademacher if self.m.is_none() && self.m_list.is_none() => {
                Err(ConfigError::missing("m or m_list", kind))
            }
            Margin if self.instance.is_none() => Err(ConfigError::missing("instance", kind)),
            Margin if self.h.is_none() => Err(ConfigError::missing("h", kind)),
            Margin if self.k.is_none() => Err(ConfigError::missing("K", kind)),
            Bounds if !self.schedule.is_restricted() => Err(ConfigError {
                line: None,
                message: "bounds needs a restricted schedule".into(),
            }),
            Bounds if self.normalize_basis => Err(ConfigError {
                line: None,
                message: "bounds does not support normalize_basis".into(),
            }),
            _ => Ok(()),
        }
    }

    /// Sample sizes of a sweep or Rademacher run.
    pub fn sizes(&self) -> Vec<usize> {
        match (&self.m_list, self.m) {
            (Some(list), _) => list.clone(),
            (None, Some(m)) => vec![m],
            (None, None) => Vec::new(),
        }
    }
}
