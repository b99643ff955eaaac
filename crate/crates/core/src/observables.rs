//! Per-step measurements: single-site excited amplitudes, the lattice-wide
//! sum of `c`, and pair overlaps.

use crate::dynamics::ModelParams;
use crate::error::SimError;
use crate::init::InitPattern;
use crate::lattice::{correlation, LatticeState, SiteIndex};

/// What to measure, and how often.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSpec {
    pub single_sites: Vec<SiteIndex>,
    pub pairs: Vec<(SiteIndex, SiteIndex)>,
    pub record_sum: bool,
    /// Record every `sample_stride`-th step.
    pub sample_stride: usize,
}

impl ProbeSpec {
    /// Site (10, 10), pair ⟨10,10|20,21⟩ and the global sum, every step.
    pub fn standard(width: usize, height: usize) -> Result<Self, SimError> {
        let a = SiteIndex::new(10, 10, width, height)?;
        let b = SiteIndex::new(20, 21, width, height)?;
        Ok(ProbeSpec {
            single_sites: vec![a],
            pairs: vec![(a, b)],
            record_sum: true,
            sample_stride: 1,
        })
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<(), SimError> {
        if self.sample_stride == 0 {
            return Err(SimError::InvalidParams("sample_stride must be positive".into()));
        }
        let all = self
            .single_sites
            .iter()
            .chain(self.pairs.iter().flat_map(|(a, b)| [a, b]));
        for idx in all {
            SiteIndex::new(idx.x(), idx.y(), width, height)?;
        }
        Ok(())
    }
}

/// Quantity tracked by one channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    Site(SiteIndex),
    Sum,
    Pair(SiteIndex, SiteIndex),
}

impl Probe {
    /// Column name: `c_x_y`, `sum_c` or `corr_x1_y1_x2_y2`.
    pub fn channel_name(&self) -> String {
        match self {
            Probe::Site(i) => format!("c_{}_{}", i.x(), i.y()),
            Probe::Sum => "sum_c".to_string(),
            Probe::Pair(i, j) => format!("corr_{}_{}_{}_{}", i.x(), i.y(), j.x(), j.y()),
        }
    }

    fn measure(&self, state: &LatticeState) -> Result<f64, SimError> {
        match *self {
            Probe::Site(i) => Ok(state.get(i)?.c()),
            Probe::Sum => Ok(sum_c(state)),
            Probe::Pair(i, j) => correlation(state, i, j),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub probe: Probe,
    pub name: String,
    pub values: Vec<f64>,
}

/// Run description carried alongside the recorded series.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordMeta {
    pub width: usize,
    pub height: usize,
    pub model: ModelParams,
    pub init: InitPattern,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesRecord {
    pub steps: Vec<u64>,
    pub channels: Vec<Channel>,
    pub meta: RecordMeta,
    stride: usize,
}

impl TimeSeriesRecord {
    /// Empty record with one channel per probe: sites, then the sum, then pairs.
    pub fn new(probes: &ProbeSpec, meta: RecordMeta) -> Result<Self, SimError> {
        probes.validate(meta.width, meta.height)?;
        let mut list: Vec<Probe> = probes.single_sites.iter().map(|&i| Probe::Site(i)).collect();
        if probes.record_sum {
            list.push(Probe::Sum);
        }
        list.extend(probes.pairs.iter().map(|&(i, j)| Probe::Pair(i, j)));
        let channels = list
            .into_iter()
            .map(|probe| Channel {
                name: probe.channel_name(),
                probe,
                values: Vec::new(),
            })
            .collect();
        Ok(TimeSeriesRecord {
            steps: Vec::new(),
            channels,
            meta,
            stride: probes.sample_stride,
        })
    }

    pub fn sample_stride(&self) -> usize {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Values of the channel called `name`.
    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|ch| ch.name == name)
            .map(|ch| ch.values.as_slice())
    }

    /// Appends one sample per channel. The state is only read.
    pub fn record(&mut self, state: &LatticeState) -> Result<(), SimError> {
        if state.width() != self.meta.width || state.height() != self.meta.height {
            return Err(SimError::RecordShapeMismatch {
                expected_width: self.meta.width,
                expected_height: self.meta.height,
                width: state.width(),
                height: state.height(),
            });
        }
        let step = state.step_count();
        if step % self.stride as u64 != 0 {
            return Err(SimError::StrideMisaligned {
                step,
                stride: self.stride,
            });
        }
        if self.steps.last().is_some_and(|&last| step <= last) {
            return Err(SimError::InvalidParams(format!(
                "step {step} recorded out of order"
            )));
        }
        // Measure everything before mutating so a failure leaves channels aligned.
        let samples = self
            .channels
            .iter()
            .map(|ch| ch.probe.measure(state))
            .collect::<Result<Vec<_>, _>>()?;
        for (ch, v) in self.channels.iter_mut().zip(samples) {
            ch.values.push(v);
        }
        self.steps.push(step);
        Ok(())
    }
}

/// Σ c over all sites, accumulated in row-major order.
pub fn sum_c(state: &LatticeState) -> f64 {
    state.sites().iter().map(|q| q.c()).sum()
}
