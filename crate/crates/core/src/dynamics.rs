//! One synchronous time step of the gated lattice.
//!
//! Every site is the target of the c-NOT gates of its four neighbors. A
//! controller with excited amplitude `c` moves a target `(c′, s′)` by
//! `ε·(−s′·c, c′·c)`, which is a small rotation of the target by
//! `arctan(ε·c)` scaled by `√(1 + ε²c²)`. All four increments are evaluated
//! on the time-t snapshot and summed, then:
//!
//! * `NoThreshold`: the ground projector adds `(−decay_weight·c, 0)`, and the
//!   sum is renormalized;
//! * `Threshold`: the sum is renormalized and a site whose excited amplitude
//!   crosses `c_thres` collapses to ground `(0, 1)`.
//!
//! A controller in the ground state contributes nothing, and the controller
//! itself is left unchanged by its own gates.

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::SimError;
use crate::lattice::{check_dimensions, neighbors, renormalize, LatticeState, Qubit, SiteIndex};

/// Default ground-decay weight of the no-threshold model, as a fraction of ε.
pub const DEFAULT_DECAY_RATIO: f64 = 0.1;

/// Threshold used throughout the threshold model experiments.
pub const DEFAULT_THRESHOLD: f64 = 0.7;

/// Largest lattice dimension accepted by [`oracle_step`].
pub const ORACLE_MAX_DIMENSION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Continuous small-step ground decay, no collapse.
    NoThreshold,
    /// Instantaneous collapse to ground once the threshold is crossed.
    Threshold,
}

/// How the excited amplitude is compared with `c_thres`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThresholdMode {
    /// `|c| ≥ c_thres`
    Magnitude,
    /// `c ≥ c_thres`
    Signed,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::NoThreshold => "NoThreshold",
            Variant::Threshold => "Threshold",
        }
    }
}

impl ThresholdMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdMode::Magnitude => "Magnitude",
            ThresholdMode::Signed => "Signed",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NoThreshold" => Ok(Variant::NoThreshold),
            "Threshold" => Ok(Variant::Threshold),
            other => Err(format!(
                "unknown model variant '{other}' (expected NoThreshold or Threshold)"
            )),
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Magnitude" => Ok(ThresholdMode::Magnitude),
            "Signed" => Ok(ThresholdMode::Signed),
            other => Err(format!(
                "unknown threshold mode '{other}' (expected Magnitude or Signed)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Coupling weight ε of each c-NOT gate.
    pub epsilon: f64,
    pub variant: Variant,
    /// Collapse threshold; only read by the `Threshold` variant.
    pub c_thres: f64,
    /// Per-step ground projector weight; only read by the `NoThreshold` variant.
    pub decay_weight: f64,
    pub threshold_mode: ThresholdMode,
}

impl ModelParams {
    pub fn no_threshold(epsilon: f64) -> Self {
        ModelParams {
            epsilon,
            variant: Variant::NoThreshold,
            c_thres: DEFAULT_THRESHOLD,
            decay_weight: DEFAULT_DECAY_RATIO * epsilon,
            threshold_mode: ThresholdMode::Magnitude,
        }
    }

    pub fn threshold(epsilon: f64, c_thres: f64) -> Self {
        ModelParams {
            epsilon,
            variant: Variant::Threshold,
            c_thres,
            decay_weight: DEFAULT_DECAY_RATIO * epsilon,
            threshold_mode: ThresholdMode::Magnitude,
        }
    }

    pub fn with_decay_weight(mut self, decay_weight: f64) -> Self {
        self.decay_weight = decay_weight;
        self
    }

    pub fn with_threshold_mode(mut self, mode: ThresholdMode) -> Self {
        self.threshold_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(SimError::InvalidParams(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if !(self.c_thres > 0.0 && self.c_thres <= 1.0) {
            return Err(SimError::InvalidParams(format!(
                "c_thres must lie in (0, 1], got {}",
                self.c_thres
            )));
        }
        if !(self.decay_weight >= 0.0 && self.decay_weight.is_finite()) {
            return Err(SimError::InvalidParams(format!(
                "decay_weight must be non-negative and finite, got {}",
                self.decay_weight
            )));
        }
        Ok(())
    }
}

/// Accumulated pre-normalization increment for one site.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepDelta {
    pub dc: f64,
    pub ds: f64,
}

impl AddAssign for StepDelta {
    #[inline]
    fn add_assign(&mut self, rhs: StepDelta) {
        self.dc += rhs.dc;
        self.ds += rhs.ds;
    }
}

/// Increment applied to `target` by the c-NOT gate of `controller`.
#[inline]
pub fn coupling_delta(controller: Qubit, target: Qubit, epsilon: f64) -> StepDelta {
    let w = epsilon * controller.c();
    StepDelta {
        dc: -w * target.s(),
        ds: w * target.c(),
    }
}

/// Small-step ground projector of the no-threshold model.
#[inline]
pub fn decay_delta(q: Qubit, decay_weight: f64) -> StepDelta {
    StepDelta {
        dc: -decay_weight * q.c(),
        ds: 0.0,
    }
}

#[inline]
fn crosses_threshold(c: f64, c_thres: f64, mode: ThresholdMode) -> bool {
    match mode {
        ThresholdMode::Magnitude => c.abs() >= c_thres,
        ThresholdMode::Signed => c >= c_thres,
    }
}

/// Collapses `q` to ground when its excited amplitude reaches the threshold.
/// Leaves `q` alone for the `NoThreshold` variant.
#[inline]
pub fn collapse_if_threshold(q: Qubit, params: &ModelParams) -> Qubit {
    if params.variant == Variant::Threshold
        && crosses_threshold(q.c(), params.c_thres, params.threshold_mode)
    {
        Qubit::GROUND
    } else {
        q
    }
}

#[inline]
fn update_site(
    target: Qubit,
    controllers: [Qubit; 4],
    params: &ModelParams,
) -> Result<Qubit, SimError> {
    let mut delta = StepDelta::default();
    for controller in controllers {
        delta += coupling_delta(controller, target, params.epsilon);
    }
    if params.variant == Variant::NoThreshold {
        delta += decay_delta(target, params.decay_weight);
    }
    let q = renormalize(target.c() + delta.dc, target.s() + delta.ds)?;
    Ok(collapse_if_threshold(q, params))
}

fn update_row(
    state: &LatticeState,
    y: usize,
    params: &ModelParams,
    row: &mut [Qubit],
) -> Result<(), SimError> {
    let (w, h) = (state.width(), state.height());
    let up = (y + h - 1) % h;
    let down = (y + 1) % h;
    for (x, out) in row.iter_mut().enumerate() {
        let left = (x + w - 1) % w;
        let right = (x + 1) % w;
        let controllers = [
            state.at(left, y),
            state.at(right, y),
            state.at(x, up),
            state.at(x, down),
        ];
        *out = update_site(state.at(x, y), controllers, params)?;
    }
    Ok(())
}

fn prepare_next(state: &LatticeState, next: &mut LatticeState) {
    if next.width() != state.width() || next.height() != state.height() {
        *next = state.clone();
    }
    next.set_step_count(state.step_count() + 1);
}

/// Advances `state` by one step, writing the result into `next`.
///
/// `next` is reshaped if its dimensions differ from `state`.
pub fn step_into(
    state: &LatticeState,
    params: &ModelParams,
    next: &mut LatticeState,
) -> Result<(), SimError> {
    params.validate()?;
    prepare_next(state, next);
    let w = state.width();
    for (y, row) in next.sites_mut().chunks_mut(w).enumerate() {
        update_row(state, y, params, row)?;
    }
    Ok(())
}

/// Row-parallel variant of [`step_into`] on the current rayon pool.
///
/// Each output site reads only the time-t snapshot, so the result is
/// bit-identical to the sequential step for any number of threads.
pub fn par_step_into(
    state: &LatticeState,
    params: &ModelParams,
    next: &mut LatticeState,
) -> Result<(), SimError> {
    params.validate()?;
    prepare_next(state, next);
    let w = state.width();
    next.sites_mut()
        .par_chunks_mut(w)
        .enumerate()
        .try_for_each(|(y, row)| update_row(state, y, params, row))
}

/// Returns the next snapshot; `state` is left untouched.
pub fn step(state: &LatticeState, params: &ModelParams) -> Result<LatticeState, SimError> {
    let mut next = state.clone();
    step_into(state, params, &mut next)?;
    Ok(next)
}

/// Reference step for small lattices, computed as an explicit rotation.
///
/// The four summed c-NOT increments on a site equal `√(1 + a²)` times its
/// rotation by `arctan(a)` with `a = ε·Σ c_neighbor`, so this path rotates
/// with `sin`/`cos` instead of accumulating increments. Decay and collapse
/// follow.
pub fn oracle_step(state: &LatticeState, params: &ModelParams) -> Result<LatticeState, SimError> {
    params.validate()?;
    let (w, h) = (state.width(), state.height());
    check_dimensions(w, h)?;
    if w > ORACLE_MAX_DIMENSION || h > ORACLE_MAX_DIMENSION {
        return Err(SimError::OracleTooLarge {
            width: w,
            height: h,
        });
    }
    let mut sites = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let idx = SiteIndex::new(x, y, w, h)?;
            let q = state.get(idx)?;
            let mut drive = 0.0;
            for n in neighbors(idx, w, h)? {
                drive += state.get(n)?.c();
            }
            let a = params.epsilon * drive;
            let (sin, cos) = a.atan().sin_cos();
            let rc = q.c() * cos - q.s() * sin;
            let rs = q.c() * sin + q.s() * cos;
            let rotated = match params.variant {
                Variant::NoThreshold if params.decay_weight > 0.0 => {
                    let scale = (1.0 + a * a).sqrt();
                    renormalize(scale * rc - params.decay_weight * q.c(), scale * rs)?
                }
                _ => Qubit::from_unit(rc, rs),
            };
            sites.push(collapse_if_threshold(rotated, params));
        }
    }
    let mut next = LatticeState::from_sites(w, h, sites)?;
    next.set_step_count(state.step_count() + 1);
    Ok(next)
}
