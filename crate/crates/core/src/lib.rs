//! Simulator for a toroidal lattice of qubit neurons coupled by small-step
//! c-NOT gates, with ground-state collapse, probe recording, regime
//! classification and figure-reproduction presets.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod init;
pub mod lattice;
pub mod observables;
pub mod rng;

pub use analysis::{
    detect_peaks, estimate_period, sweep_periods, AnalysisError, AnalysisParams, Classification,
    PeriodEstimate, SweepRow,
};
pub use config::{parse_config, ConfigError, ExperimentConfig, Preset};
pub use dynamics::{
    collapse_if_threshold, coupling_delta, decay_delta, oracle_step, step, ModelParams, StepDelta,
    ThresholdMode, Variant,
};
pub use error::SimError;
pub use experiment::{run_experiment, run_sweep, simulate, RunError, RunReport, Simulation};
pub use init::{init_lattice, random_unit_qubit, Boundary, InitPattern, Interior};
pub use lattice::{correlation, neighbors, renormalize, LatticeState, Qubit, SiteIndex};
pub use observables::{sum_c, ProbeSpec, TimeSeriesRecord};
