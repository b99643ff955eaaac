//! End-to-end runs: initialize, evolve, record, analyse, write files.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::analysis::{estimate_period, sweep_periods, AnalysisError, AnalysisParams, PeriodEstimate, SweepRow};
use crate::config::{ConfigError, ExperimentConfig};
use crate::dynamics::{par_step_into, step_into, Variant};
use crate::error::SimError;
use crate::init::init_lattice;
use crate::lattice::LatticeState;
use crate::observables::{RecordMeta, TimeSeriesRecord};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const ANALYSIS_FILE: &str = "analysis.csv";
pub const PERIODS_FILE: &str = "periods.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const PLOT_SCRIPT_FILE: &str = "plot.gp";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("analysis failed: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("could not start worker pool: {0}")]
    ThreadPool(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Result of evolving one configuration.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub record: TimeSeriesRecord,
    pub final_state: LatticeState,
    /// Largest `|c² + s² − 1|` seen on any site after any step.
    pub max_norm_deviation: f64,
}

/// Evolves `config.steps` steps from the configured initial state, recording
/// probes at step 0 and every `sample_stride` steps after.
pub fn simulate(config: &ExperimentConfig) -> Result<Simulation, RunError> {
    config.validate()?;
    if config.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| RunError::ThreadPool(e.to_string()))?;
        pool.install(|| evolve(config, true))
    } else {
        evolve(config, false)
    }
}

fn evolve(config: &ExperimentConfig, parallel: bool) -> Result<Simulation, RunError> {
    let meta = RecordMeta {
        width: config.width,
        height: config.height,
        model: config.model,
        init: config.init,
    };
    let mut record = TimeSeriesRecord::new(&config.probes, meta)?;
    let mut current = init_lattice(config.width, config.height, &config.init)?;
    let mut next = current.clone();
    let mut max_norm_deviation = current.max_norm_deviation();
    let stride = config.probes.sample_stride as u64;
    record.record(&current)?;
    for _ in 0..config.steps {
        if parallel {
            par_step_into(&current, &config.model, &mut next)?;
        } else {
            step_into(&current, &config.model, &mut next)?;
        }
        std::mem::swap(&mut current, &mut next);
        max_norm_deviation = max_norm_deviation.max(current.max_norm_deviation());
        if current.step_count() % stride == 0 {
            record.record(&current)?;
        }
    }
    Ok(Simulation {
        record,
        final_state: current,
        max_norm_deviation,
    })
}

/// Analysis outcome for one recorded channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelAnalysis {
    pub channel: String,
    pub estimate: Result<PeriodEstimate, AnalysisError>,
}

pub fn analyze(record: &TimeSeriesRecord, params: &AnalysisParams) -> Vec<ChannelAnalysis> {
    record
        .channels
        .iter()
        .map(|ch| ChannelAnalysis {
            channel: ch.name.clone(),
            estimate: estimate_period(&ch.values, params).map(|e| e.scaled(record.sample_stride())),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub config_echo: String,
    pub wall_time: Duration,
    pub channels: Vec<ChannelAnalysis>,
    pub sweep: Vec<SweepRow>,
    pub files: Vec<PathBuf>,
    pub max_norm_deviation: Option<f64>,
}

impl RunReport {
    pub fn classification(&self, channel: &str) -> Option<&PeriodEstimate> {
        self.channels
            .iter()
            .find(|c| c.channel == channel)
            .and_then(|c| c.estimate.as_ref().ok())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# run report");
        let _ = writeln!(out, "wall_time_s = {:.3}", self.wall_time.as_secs_f64());
        if let Some(dev) = self.max_norm_deviation {
            let _ = writeln!(out, "max_norm_deviation = {dev:e}");
        }
        if !self.channels.is_empty() {
            let _ = writeln!(out, "\n## channels");
            for ch in &self.channels {
                match &ch.estimate {
                    Ok(e) => {
                        let _ = writeln!(
                            out,
                            "{}: {} period={} cv={} peaks={}",
                            ch.channel,
                            e.classification,
                            opt(e.period_steps),
                            opt(e.cv),
                            e.n_peaks
                        );
                    }
                    Err(err) => {
                        let _ = writeln!(out, "{}: error: {err}", ch.channel);
                    }
                }
            }
        }
        if !self.sweep.is_empty() {
            let _ = writeln!(out, "\n## sweep");
            for row in &self.sweep {
                let _ = writeln!(
                    out,
                    "epsilon={} {}: {} period={} cv={}{}",
                    row.epsilon,
                    row.channel,
                    row.estimate.classification,
                    opt(row.estimate.period_steps),
                    opt(row.estimate.cv),
                    row.error.as_ref().map(|e| format!(" error: {e}")).unwrap_or_default()
                );
            }
        }
        let _ = writeln!(out, "\n## files");
        for f in &self.files {
            let _ = writeln!(out, "{}", f.display());
        }
        let _ = writeln!(out, "\n## config\n{}", self.config_echo);
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

/// Locale-independent decimal text with 17 significant digits; parses back
/// to the identical `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

pub fn write_timeseries_csv<W: Write>(record: &TimeSeriesRecord, mut w: W) -> io::Result<()> {
    let mut header = String::from("step");
    for ch in &record.channels {
        header.push(',');
        header.push_str(&ch.name);
    }
    w.write_all(header.as_bytes())?;
    w.write_all(b"\n")?;
    let mut line = String::new();
    for (row, step) in record.steps.iter().enumerate() {
        line.clear();
        let _ = write!(line, "{step}");
        for ch in &record.channels {
            line.push(',');
            line.push_str(&format_value(ch.values[row]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

/// Writes `step,<channel…>` rows with LF line endings.
pub fn emit_timeseries_csv(record: &TimeSeriesRecord, path: &Path) -> Result<(), RunError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_timeseries_csv(record, BufWriter::new(file)).map_err(io_err(path))
}

/// Columns of a parsed timeseries CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeseriesTable {
    pub names: Vec<String>,
    pub steps: Vec<u64>,
    pub columns: Vec<Vec<f64>>,
}

pub fn parse_timeseries_csv(text: &str) -> Result<TimeseriesTable, String> {
    let mut lines = text.split('\n').filter(|l| !l.is_empty());
    let header = lines.next().ok_or("missing header")?;
    let mut cols = header.split(',');
    if cols.next() != Some("step") {
        return Err("header must start with 'step'".into());
    }
    let names: Vec<String> = cols.map(str::to_string).collect();
    let mut table = TimeseriesTable {
        columns: vec![Vec::new(); names.len()],
        names,
        steps: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let step = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("row {}: bad step", i + 1))?;
        table.steps.push(step);
        let mut n = 0;
        for (col, field) in table.columns.iter_mut().zip(&mut fields) {
            col.push(field.parse().map_err(|e| format!("row {}: {e}", i + 1))?);
            n += 1;
        }
        if n != table.names.len() || fields.next().is_some() {
            return Err(format!("row {}: wrong number of fields", i + 1));
        }
    }
    Ok(table)
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(io_err(path))
}

fn analysis_csv(channels: &[ChannelAnalysis]) -> String {
    let mut out = String::from("channel,classification,period_steps,cv,n_peaks,error\n");
    for ch in channels {
        match &ch.estimate {
            Ok(e) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},",
                    ch.channel,
                    e.classification,
                    format_opt(e.period_steps),
                    format_opt(e.cv),
                    e.n_peaks
                );
            }
            Err(err) => {
                let _ = writeln!(out, "{},Undetermined,,,0,{}", ch.channel, csv_safe(&err.to_string()));
            }
        }
    }
    out
}

/// One row per ε: `epsilon,channel,classification,period_steps,cv,n_peaks,period_times_epsilon,error`.
pub fn periods_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("epsilon,channel,classification,period_steps,cv,n_peaks,period_times_epsilon,error\n");
    for row in rows {
        let e = &row.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_value(row.epsilon),
            row.channel,
            e.classification,
            format_opt(e.period_steps),
            format_opt(e.cv),
            e.n_peaks,
            format_opt(e.period_steps.map(|p| p * row.epsilon)),
            row.error.as_deref().map(csv_safe).unwrap_or_default()
        );
    }
    out
}

fn csv_safe(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

fn plot_script(record: &TimeSeriesRecord) -> String {
    let mut out = String::from(
        "# gnuplot script: gnuplot plot.gp\nset datafile separator ','\nset key autotitle columnhead\nset xlabel 'step'\nset terminal pngcairo size 1000,400\n",
    );
    for (i, ch) in record.channels.iter().enumerate() {
        let _ = writeln!(
            out,
            "set output '{name}.png'\nplot '{TIMESERIES_FILE}' using 1:{col} with lines",
            name = ch.name,
            col = i + 2
        );
    }
    out
}

fn prepare_output_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Simulates, analyses every channel, and writes the timeseries CSV, the
/// analysis CSV, an optional plot script and the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let sim = simulate(config)?;
    let channels = analyze(&sim.record, &config.analysis);

    let dir = &config.output_dir;
    prepare_output_dir(dir)?;
    let mut files = Vec::new();

    let ts = dir.join(TIMESERIES_FILE);
    emit_timeseries_csv(&sim.record, &ts)?;
    files.push(ts);

    let an = dir.join(ANALYSIS_FILE);
    write_text(&an, &analysis_csv(&channels))?;
    files.push(an);

    if config.plot_script {
        let gp = dir.join(PLOT_SCRIPT_FILE);
        write_text(&gp, &plot_script(&sim.record))?;
        files.push(gp);
    }

    let report_path = dir.join(REPORT_FILE);
    files.push(report_path.clone());
    let report = RunReport {
        config_echo: config.to_document(),
        wall_time: start.elapsed(),
        channels,
        sweep: Vec::new(),
        files,
        max_norm_deviation: Some(sim.max_norm_deviation),
    };
    write_text(&report_path, &report.to_text())?;
    Ok(report)
}

/// Runs one simulation per ε and writes the periods CSV and the report.
pub fn run_sweep(config: &ExperimentConfig, epsilons: &[f64]) -> Result<RunReport, RunError> {
    config.validate()?;
    if config.model.variant != Variant::Threshold {
        return Err(ConfigError::Validation {
            field: "model.variant".into(),
            message: "sweeps require the Threshold variant".into(),
        }
        .into());
    }
    if let Some(eps) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(ConfigError::Validation {
            field: "epsilons".into(),
            message: format!("every epsilon must be positive, got {eps}"),
        }
        .into());
    }
    let start = Instant::now();
    let rows = sweep_periods(epsilons, config, &config.analysis);

    let dir = &config.output_dir;
    prepare_output_dir(dir)?;
    let periods = dir.join(PERIODS_FILE);
    write_text(&periods, &periods_csv(&rows))?;
    let report_path = dir.join(REPORT_FILE);
    let report = RunReport {
        config_echo: config.to_document(),
        wall_time: start.elapsed(),
        channels: Vec::new(),
        sweep: rows,
        files: vec![periods, report_path.clone()],
        max_norm_deviation: None,
    };
    write_text(&report_path, &report.to_text())?;
    Ok(report)
}
