//! Experiment configuration documents.
//!
//! A document is a flat list of `key = value` lines. Keys use dotted section
//! prefixes, `#` starts a comment, values may be wrapped in double quotes.
//! A `preset` fills every field with the values of one of the reproduced
//! figures; any other key overrides the preset.
//!
//! | key | value |
//! |-----|-------|
//! | `preset` | `Fig1` … `Fig6` |
//! | `lattice.width`, `lattice.height` | integer ≥ 3 (default 40) |
//! | `steps` | integer > 0 (default 40000) |
//! | `threads` | worker threads per run, ≥ 1 (default 1) |
//! | `output_dir` | path (default `output`) |
//! | `output.plot_script` | `true`/`false`: also write a gnuplot script |
//! | `model.epsilon` | ε > 0 |
//! | `model.variant` | `NoThreshold` or `Threshold` |
//! | `model.c_thres` | (0, 1], default 0.7 |
//! | `model.decay_weight` | ≥ 0, default 0.1·ε |
//! | `model.threshold_mode` | `Magnitude` or `Signed` |
//! | `init.boundary` | `AllFourSides`, `TwoOppositeSidesX`, `TwoOppositeSidesY`, `None` |
//! | `init.interior` | `AllGround` or `RandomUnitCircle` |
//! | `init.excited_value` | `c,s`, default `1,0` |
//! | `init.seed` | u64, default 0 |
//! | `probes.sites` | `x,y; x,y; …` (default `10,10`) |
//! | `probes.pairs` | `x1,y1,x2,y2; …` (default `10,10,20,21`) |
//! | `probes.record_sum` | `true`/`false` (default true) |
//! | `probes.sample_stride` | integer ≥ 1 (default 1) |
//! | `analysis.transient_fraction` … `analysis.peak_prominence_sigma` | reals |
//! | `sweep.epsilons` | comma list of ε |
//! | `sweep.channel` | channel analysed by sweeps (default: first single-site channel) |
//!
//! Without a preset, `model.epsilon`, `model.variant` and `init.boundary` are
//! required.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::AnalysisParams;
use crate::dynamics::{ModelParams, ThresholdMode, Variant, DEFAULT_DECAY_RATIO, DEFAULT_THRESHOLD};
use crate::init::{Boundary, InitPattern, Interior};
use crate::lattice::{Qubit, SiteIndex};
use crate::observables::ProbeSpec;

/// ε grid used by the Fig6 preset.
pub const DEFAULT_SWEEP_EPSILONS: [f64; 8] = [0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8];

const REQUIRED_WITHOUT_PRESET: [&str; 3] = ["model.epsilon", "model.variant", "init.boundary"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig1,
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig1 => "Fig1",
            Preset::Fig2 => "Fig2",
            Preset::Fig3 => "Fig3",
            Preset::Fig4 => "Fig4",
            Preset::Fig5 => "Fig5",
            Preset::Fig6 => "Fig6",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset '{s}' (expected Fig1 … Fig6)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub width: usize,
    pub height: usize,
    pub steps: u64,
    pub model: ModelParams,
    pub init: InitPattern,
    pub probes: ProbeSpec,
    pub analysis: AnalysisParams,
    pub output_dir: PathBuf,
    pub preset: Option<Preset>,
    /// Worker threads inside one run; 1 steps sequentially.
    pub threads: usize,
    pub plot_script: bool,
    pub sweep_epsilons: Vec<f64>,
    pub sweep_channel: Option<String>,
    decay_explicit: bool,
}

impl ExperimentConfig {
    /// Fully expanded configuration of a figure preset.
    pub fn preset(preset: Preset) -> Self {
        let (model, boundary) = match preset {
            Preset::Fig1 | Preset::Fig2 => (ModelParams::no_threshold(0.01), Boundary::AllFourSides),
            Preset::Fig3 | Preset::Fig4 | Preset::Fig6 => {
                (ModelParams::threshold(0.01, DEFAULT_THRESHOLD), Boundary::AllFourSides)
            }
            Preset::Fig5 => (
                ModelParams::threshold(0.8, DEFAULT_THRESHOLD),
                Boundary::TwoOppositeSidesX,
            ),
        };
        let mut analysis = AnalysisParams::default();
        if preset == Preset::Fig5 {
            // only the last 500 of 40000 steps are examined
            analysis.transient_fraction = 0.9875;
        }
        ExperimentConfig {
            preset: Some(preset),
            model,
            init: InitPattern::new(boundary, Interior::AllGround),
            analysis,
            sweep_epsilons: if preset == Preset::Fig6 {
                DEFAULT_SWEEP_EPSILONS.to_vec()
            } else {
                Vec::new()
            },
            ..ExperimentConfig::base()
        }
    }

    fn base() -> Self {
        ExperimentConfig {
            width: 40,
            height: 40,
            steps: 40_000,
            model: ModelParams::threshold(0.01, DEFAULT_THRESHOLD),
            init: InitPattern::default(),
            probes: ProbeSpec::standard(40, 40).expect("default probes fit 40x40"),
            analysis: AnalysisParams::default(),
            output_dir: PathBuf::from("output"),
            preset: None,
            threads: 1,
            plot_script: false,
            sweep_epsilons: Vec::new(),
            sweep_channel: None,
            decay_explicit: false,
        }
    }

    /// Changes ε; an implicit decay weight follows it.
    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.model.epsilon = epsilon;
        if !self.decay_explicit {
            self.model.decay_weight = DEFAULT_DECAY_RATIO * epsilon;
        }
    }

    pub fn set_decay_weight(&mut self, decay_weight: f64) {
        self.model.decay_weight = decay_weight;
        self.decay_explicit = true;
    }

    /// Channel analysed by coupling sweeps.
    pub fn sweep_channel_name(&self) -> String {
        if let Some(name) = &self.sweep_channel {
            return name.clone();
        }
        match self.probes.single_sites.first() {
            Some(i) => format!("c_{}_{}", i.x(), i.y()),
            None => "sum_c".to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width < 3 || self.height < 3 {
            return Err(ConfigError::invalid(
                "lattice",
                format!("{}x{} is too small, both dimensions must be at least 3", self.width, self.height),
            ));
        }
        if self.steps == 0 {
            return Err(ConfigError::invalid("steps", "must be positive"));
        }
        if self.threads == 0 {
            return Err(ConfigError::invalid("threads", "must be at least 1"));
        }
        self.model
            .validate()
            .map_err(|e| ConfigError::invalid("model", e.to_string()))?;
        if self.init.excited_value.norm_deviation() >= 1e-12 {
            return Err(ConfigError::invalid("init.excited_value", "must be normalized"));
        }
        self.probes
            .validate(self.width, self.height)
            .map_err(|e| ConfigError::invalid("probes", e.to_string()))?;
        self.analysis
            .validate()
            .map_err(|e| ConfigError::invalid("analysis", e.to_string()))?;
        if let Some(eps) = self.sweep_epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(ConfigError::invalid(
                "sweep.epsilons",
                format!("every epsilon must be positive, got {eps}"),
            ));
        }
        Ok(())
    }

    /// Serializes to a document that parses back to the same configuration.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(p) = self.preset {
            line("preset", p.to_string());
        }
        line("lattice.width", self.width.to_string());
        line("lattice.height", self.height.to_string());
        line("steps", self.steps.to_string());
        line("threads", self.threads.to_string());
        line("output_dir", format!("\"{}\"", self.output_dir.display()));
        line("output.plot_script", self.plot_script.to_string());
        line("model.epsilon", format!("{:?}", self.model.epsilon));
        line("model.variant", self.model.variant.to_string());
        line("model.c_thres", format!("{:?}", self.model.c_thres));
        if self.decay_explicit {
            line("model.decay_weight", format!("{:?}", self.model.decay_weight));
        } else {
            line(
                "# model.decay_weight",
                format!("{:?} (derived from epsilon)", self.model.decay_weight),
            );
        }
        line("model.threshold_mode", self.model.threshold_mode.to_string());
        line("init.boundary", self.init.boundary.to_string());
        line("init.interior", self.init.interior.to_string());
        line(
            "init.excited_value",
            format!("{:?},{:?}", self.init.excited_value.c(), self.init.excited_value.s()),
        );
        line("init.seed", self.init.seed.to_string());
        line(
            "probes.sites",
            self.probes
                .single_sites
                .iter()
                .map(|i| format!("{},{}", i.x(), i.y()))
                .collect::<Vec<_>>()
                .join("; "),
        );
        line(
            "probes.pairs",
            self.probes
                .pairs
                .iter()
                .map(|(i, j)| format!("{},{},{},{}", i.x(), i.y(), j.x(), j.y()))
                .collect::<Vec<_>>()
                .join("; "),
        );
        line("probes.record_sum", self.probes.record_sum.to_string());
        line("probes.sample_stride", self.probes.sample_stride.to_string());
        let a = &self.analysis;
        line("analysis.transient_fraction", format!("{:?}", a.transient_fraction));
        line("analysis.static_tolerance", format!("{:?}", a.static_tolerance));
        line("analysis.periodic_cv_max", format!("{:?}", a.periodic_cv_max));
        line("analysis.aperiodic_cv_min", format!("{:?}", a.aperiodic_cv_min));
        line("analysis.peak_prominence_sigma", format!("{:?}", a.peak_prominence_sigma));
        if !self.sweep_epsilons.is_empty() {
            line(
                "sweep.epsilons",
                self.sweep_epsilons
                    .iter()
                    .map(|e| format!("{e:?}"))
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        if let Some(ch) = &self.sweep_channel {
            line("sweep.channel", ch.clone());
        }
        out
    }
}

/// One `key = value` assignment and where it came from (line 0 for overrides).
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits a document into assignments. Duplicate keys are rejected.
pub fn parse_document(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected 'key = value', found '{content}'"),
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Parse {
                line,
                message: format!("invalid key '{key}'"),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: unquote(value.trim()).to_string(),
        });
    }
    Ok(entries)
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(v)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then applies `key=value` overrides in order.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig, ConfigError> {
    let mut entries = parse_document(text)?;
    entries.extend(overrides.iter().map(|(k, v)| Entry {
        line: 0,
        key: k.trim().to_string(),
        value: unquote(v.trim()).to_string(),
    }));
    build(&entries)
}

/// Parses a `key=value` command-line override.
pub fn parse_override(arg: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = arg.split_once('=').ok_or_else(|| ConfigError::Parse {
        line: 0,
        message: format!("override '{arg}' is not of the form key=value"),
    })?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn build(entries: &[Entry]) -> Result<ExperimentConfig, ConfigError> {
    // the last preset assignment wins, and applies before any other key
    let preset = entries
        .iter()
        .rev()
        .find(|e| e.key == "preset")
        .map(|e| e.value.parse::<Preset>().map_err(|m| field_error(e, m)))
        .transpose()?;
    let mut cfg = match preset {
        Some(p) => ExperimentConfig::preset(p),
        None => {
            let present: HashSet<&str> = entries.iter().map(|e| e.key.as_str()).collect();
            let missing: Vec<&str> = REQUIRED_WITHOUT_PRESET
                .into_iter()
                .filter(|k| !present.contains(k))
                .collect();
            if !missing.is_empty() {
                return Err(ConfigError::invalid(
                    missing[0],
                    format!("required when no preset is given (missing: {})", missing.join(", ")),
                ));
            }
            ExperimentConfig::base()
        }
    };

    let mut sites: Option<Vec<(usize, usize)>> = None;
    let mut pairs: Option<Vec<(usize, usize, usize, usize)>> = None;
    let mut epsilon: Option<f64> = None;
    let mut decay: Option<f64> = None;

    for e in entries {
        let v = e.value.as_str();
        match e.key.as_str() {
            "preset" => {}
            "lattice.width" => cfg.width = num(e)?,
            "lattice.height" => cfg.height = num(e)?,
            "steps" => cfg.steps = num(e)?,
            "threads" => cfg.threads = num(e)?,
            "output_dir" => cfg.output_dir = PathBuf::from(v),
            "output.plot_script" => cfg.plot_script = num(e)?,
            "model.epsilon" => epsilon = Some(num(e)?),
            "model.variant" => cfg.model.variant = v.parse::<Variant>().map_err(|m| field_error(e, m))?,
            "model.c_thres" => cfg.model.c_thres = num(e)?,
            "model.decay_weight" => decay = Some(num(e)?),
            "model.threshold_mode" => {
                cfg.model.threshold_mode = v.parse::<ThresholdMode>().map_err(|m| field_error(e, m))?
            }
            "init.boundary" => cfg.init.boundary = v.parse::<Boundary>().map_err(|m| field_error(e, m))?,
            "init.interior" => cfg.init.interior = v.parse::<Interior>().map_err(|m| field_error(e, m))?,
            "init.excited_value" => {
                let parts = reals(e, v, ',')?;
                let [c, s] = parts[..] else {
                    return Err(field_error(e, "expected 'c,s'"));
                };
                if ((c * c + s * s) - 1.0).abs() > 1e-9 {
                    return Err(field_error(e, format!("({c}, {s}) is not normalized")));
                }
                cfg.init.excited_value = Qubit::new(c, s).map_err(|err| field_error(e, err.to_string()))?;
            }
            "init.seed" => cfg.init.seed = num(e)?,
            "probes.sites" => {
                sites = Some(
                    groups(e, 2)?
                        .into_iter()
                        .map(|g| (g[0], g[1]))
                        .collect(),
                )
            }
            "probes.pairs" => {
                pairs = Some(
                    groups(e, 4)?
                        .into_iter()
                        .map(|g| (g[0], g[1], g[2], g[3]))
                        .collect(),
                )
            }
            "probes.record_sum" => cfg.probes.record_sum = num(e)?,
            "probes.sample_stride" => cfg.probes.sample_stride = num(e)?,
            "analysis.transient_fraction" => cfg.analysis.transient_fraction = num(e)?,
            "analysis.static_tolerance" => cfg.analysis.static_tolerance = num(e)?,
            "analysis.periodic_cv_max" => cfg.analysis.periodic_cv_max = num(e)?,
            "analysis.aperiodic_cv_min" => cfg.analysis.aperiodic_cv_min = num(e)?,
            "analysis.peak_prominence_sigma" => cfg.analysis.peak_prominence_sigma = num(e)?,
            "sweep.epsilons" => cfg.sweep_epsilons = reals(e, v, ',')?,
            "sweep.channel" => cfg.sweep_channel = Some(v.to_string()),
            other => {
                return Err(if e.line > 0 {
                    ConfigError::Parse {
                        line: e.line,
                        message: format!("unknown key '{other}'"),
                    }
                } else {
                    ConfigError::invalid(other, "unknown key")
                })
            }
        }
    }

    if let Some(eps) = epsilon {
        cfg.set_epsilon(eps);
    }
    if let Some(d) = decay {
        cfg.set_decay_weight(d);
    }

    let (w, h) = (cfg.width, cfg.height);
    if w < 3 || h < 3 {
        return Err(ConfigError::invalid(
            "lattice",
            format!("{w}x{h} is too small, both dimensions must be at least 3"),
        ));
    }
    let site = |x: usize, y: usize, field: &str| {
        SiteIndex::new(x, y, w, h).map_err(|err| ConfigError::invalid(field, err.to_string()))
    };
    let sites = sites.unwrap_or_else(|| vec![(10, 10)]);
    let pairs = pairs.unwrap_or_else(|| vec![(10, 10, 20, 21)]);
    cfg.probes.single_sites = sites
        .into_iter()
        .map(|(x, y)| site(x, y, "probes.sites"))
        .collect::<Result<_, _>>()?;
    cfg.probes.pairs = pairs
        .into_iter()
        .map(|(a, b, c, d)| Ok((site(a, b, "probes.pairs")?, site(c, d, "probes.pairs")?)))
        .collect::<Result<_, ConfigError>>()?;

    cfg.validate()?;
    Ok(cfg)
}

fn field_error(e: &Entry, message: impl Into<String>) -> ConfigError {
    let message = message.into();
    if e.line > 0 {
        ConfigError::Parse {
            line: e.line,
            message: format!("{}: {message}", e.key),
        }
    } else {
        ConfigError::invalid(&e.key, message)
    }
}

fn num<T: FromStr>(e: &Entry) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    e.value
        .parse::<T>()
        .map_err(|err| field_error(e, format!("cannot parse '{}': {err}", e.value)))
}

fn reals(e: &Entry, v: &str, sep: char) -> Result<Vec<f64>, ConfigError> {
    v.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|err| field_error(e, format!("cannot parse '{s}': {err}")))
        })
        .collect()
}

fn groups(e: &Entry, arity: usize) -> Result<Vec<Vec<usize>>, ConfigError> {
    e.value
        .split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(|g| {
            let nums = g
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|err| field_error(e, format!("cannot parse '{s}': {err}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if nums.len() != arity {
                return Err(field_error(
                    e,
                    format!("'{g}' should have {arity} comma-separated coordinates"),
                ));
            }
            Ok(nums)
        })
        .collect()
}
