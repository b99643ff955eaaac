//! Regime classification and period estimation from recorded series.
//!
//! After discarding the initial transient, a series is `Static` when its
//! standard deviation is below `static_tolerance`. Otherwise peaks are strict
//! local maxima above `mean + peak_prominence_sigma·σ`, and the coefficient of
//! variation of the inter-peak intervals separates `Periodic` from
//! `Aperiodic`. Anything in between, or with fewer than five peaks, is
//! `Undetermined`.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::experiment::simulate;

/// Peaks required before a series is called periodic or aperiodic.
pub const MIN_CLASSIFIED_PEAKS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("series has {len} samples after the transient cut, need at least 3")]
    SeriesTooShort { len: usize },
    #[error("invalid analysis parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisParams {
    /// Leading fraction of the series discarded as transient, in `[0, 1)`.
    pub transient_fraction: f64,
    pub static_tolerance: f64,
    pub periodic_cv_max: f64,
    pub aperiodic_cv_min: f64,
    pub peak_prominence_sigma: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            transient_fraction: 0.25,
            static_tolerance: 1e-6,
            periodic_cv_max: 0.05,
            aperiodic_cv_min: 0.15,
            peak_prominence_sigma: 0.5,
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let p = self;
        if !(0.0..1.0).contains(&p.transient_fraction) {
            return Err(AnalysisError::InvalidParams(format!(
                "transient_fraction must lie in [0, 1), got {}",
                p.transient_fraction
            )));
        }
        if !(p.static_tolerance >= 0.0) {
            return Err(AnalysisError::InvalidParams(
                "static_tolerance must be non-negative".into(),
            ));
        }
        if !(p.periodic_cv_max >= 0.0 && p.periodic_cv_max < p.aperiodic_cv_min) {
            return Err(AnalysisError::InvalidParams(format!(
                "need 0 <= periodic_cv_max < aperiodic_cv_min, got {} and {}",
                p.periodic_cv_max, p.aperiodic_cv_min
            )));
        }
        if !p.peak_prominence_sigma.is_finite() {
            return Err(AnalysisError::InvalidParams(
                "peak_prominence_sigma must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Static,
    Periodic,
    Aperiodic,
    Undetermined,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Static => "Static",
            Classification::Periodic => "Periodic",
            Classification::Aperiodic => "Aperiodic",
            Classification::Undetermined => "Undetermined",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodEstimate {
    /// Mean inter-peak interval; `None` with fewer than two peaks.
    pub period_steps: Option<f64>,
    /// Coefficient of variation of the inter-peak intervals.
    pub cv: Option<f64>,
    pub n_peaks: usize,
    pub classification: Classification,
}

impl PeriodEstimate {
    pub fn undetermined() -> Self {
        PeriodEstimate {
            period_steps: None,
            cv: None,
            n_peaks: 0,
            classification: Classification::Undetermined,
        }
    }

    /// Converts a period measured in samples to time steps.
    pub fn scaled(mut self, stride: usize) -> Self {
        self.period_steps = self.period_steps.map(|p| p * stride as f64);
        self
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn post_transient<'a>(
    series: &'a [f64],
    params: &AnalysisParams,
) -> Result<(usize, &'a [f64]), AnalysisError> {
    params.validate()?;
    let cut = (series.len() as f64 * params.transient_fraction).floor() as usize;
    let window = &series[cut.min(series.len())..];
    if window.len() < 3 {
        return Err(AnalysisError::SeriesTooShort { len: window.len() });
    }
    Ok((cut, window))
}

/// Indices (into `series`) of strict local maxima in the post-transient window
/// that exceed `mean + peak_prominence_sigma·σ` of that window.
pub fn detect_peaks(series: &[f64], params: &AnalysisParams) -> Result<Vec<usize>, AnalysisError> {
    let (offset, window) = post_transient(series, params)?;
    let (mean, std) = mean_std(window);
    let level = mean + params.peak_prominence_sigma * std;
    Ok(window
        .windows(3)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0] && w[1] > w[2] && w[1] > level)
        .map(|(i, _)| offset + i + 1)
        .collect())
}

pub fn estimate_period(series: &[f64], params: &AnalysisParams) -> Result<PeriodEstimate, AnalysisError> {
    let (_, window) = post_transient(series, params)?;
    let (_, std) = mean_std(window);
    if std < params.static_tolerance {
        return Ok(PeriodEstimate {
            period_steps: None,
            cv: None,
            n_peaks: 0,
            classification: Classification::Static,
        });
    }
    let peaks = detect_peaks(series, params)?;
    let n_peaks = peaks.len();
    if n_peaks < 2 {
        return Ok(PeriodEstimate {
            n_peaks,
            ..PeriodEstimate::undetermined()
        });
    }
    let intervals: Vec<f64> = peaks.windows(2).map(|p| (p[1] - p[0]) as f64).collect();
    let (period, spread) = mean_std(&intervals);
    let cv = spread / period;
    let classification = if n_peaks < MIN_CLASSIFIED_PEAKS {
        Classification::Undetermined
    } else if cv <= params.periodic_cv_max {
        Classification::Periodic
    } else if cv >= params.aperiodic_cv_min {
        Classification::Aperiodic
    } else {
        Classification::Undetermined
    };
    Ok(PeriodEstimate {
        period_steps: Some(period),
        cv: Some(cv),
        n_peaks,
        classification,
    })
}

/// One row of a coupling sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub channel: String,
    pub estimate: PeriodEstimate,
    /// Set when the run for this ε failed; the estimate is then `Undetermined`.
    pub error: Option<String>,
}

/// Runs `scenario` once per ε and estimates the period of its sweep channel.
///
/// Rows run in parallel; the table keeps the order of `epsilons`.
pub fn sweep_periods(
    epsilons: &[f64],
    scenario: &ExperimentConfig,
    analysis: &AnalysisParams,
) -> Vec<SweepRow> {
    let channel = scenario.sweep_channel_name();
    epsilons
        .par_iter()
        .map(|&epsilon| {
            let mut config = scenario.clone();
            config.set_epsilon(epsilon);
            config.analysis = *analysis;
            let outcome = simulate(&config).map_err(|e| e.to_string()).and_then(|sim| {
                let series = sim
                    .record
                    .channel(&channel)
                    .ok_or_else(|| format!("no channel named {channel}"))?;
                estimate_period(series, analysis)
                    .map(|e| e.scaled(sim.record.sample_stride()))
                    .map_err(|e| e.to_string())
            });
            match outcome {
                Ok(estimate) => SweepRow {
                    epsilon,
                    channel: channel.clone(),
                    estimate,
                    error: None,
                },
                Err(err) => SweepRow {
                    epsilon,
                    channel: channel.clone(),
                    estimate: PeriodEstimate::undetermined(),
                    error: Some(err),
                },
            }
        })
        .collect()
}
