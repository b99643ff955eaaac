//! Qubit and lattice state types.
//!
//! A site holds a real two-component amplitude vector `(c, s)`: `c` is the
//! amplitude of the excited state |1⟩ and `s` the amplitude of the ground
//! state |0⟩. Ground is `(0, 1)`, fully excited is `(±1, 0)`.
//!
//! The lattice is a `width × height` torus; neighbor coordinates wrap modulo
//! the lattice dimensions.

use std::fmt;

use crate::error::SimError;

/// Norm tolerance every stored qubit satisfies: `|c² + s² − 1| < NORM_TOLERANCE`.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Squared norms below this are treated as a corrupted (zero) state.
pub const ZERO_NORM_SQ: f64 = 1e-30;

/// Smallest lattice dimension for which the four wrapped neighbors are distinct.
pub const MIN_DIMENSION: usize = 3;

/// A normalized real qubit `(c, s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qubit {
    c: f64,
    s: f64,
}

impl Qubit {
    pub const GROUND: Qubit = Qubit { c: 0.0, s: 1.0 };
    pub const EXCITED: Qubit = Qubit { c: 1.0, s: 0.0 };

    /// Builds a qubit from raw amplitudes, normalizing them.
    pub fn new(c: f64, s: f64) -> Result<Self, SimError> {
        renormalize(c, s)
    }

    /// Point on the unit circle at `angle` radians from the ground state:
    /// `(sin θ, cos θ)`.
    pub fn from_angle(angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Qubit { c: sin, s: cos }
    }

    /// Excited amplitude.
    #[inline]
    pub fn c(self) -> f64 {
        self.c
    }

    /// Ground amplitude.
    #[inline]
    pub fn s(self) -> f64 {
        self.s
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.c * self.c + self.s * self.s
    }

    /// Absolute deviation of the squared norm from one.
    #[inline]
    pub fn norm_deviation(self) -> f64 {
        (self.norm_sq() - 1.0).abs()
    }

    /// Inner product with another qubit.
    #[inline]
    pub fn overlap(self, other: Qubit) -> f64 {
        self.c * other.c + self.s * other.s
    }

    /// Constructs without normalizing. Callers guarantee the norm invariant.
    #[inline]
    pub(crate) fn from_unit(c: f64, s: f64) -> Self {
        Qubit { c, s }
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.c, self.s)
    }
}

/// Scales `(c, s)` to unit length.
pub fn renormalize(c: f64, s: f64) -> Result<Qubit, SimError> {
    let norm_sq = c * c + s * s;
    if !(norm_sq >= ZERO_NORM_SQ) || !norm_sq.is_finite() {
        return Err(SimError::ZeroNorm { c, s });
    }
    let n = norm_sq.sqrt();
    Ok(Qubit { c: c / n, s: s / n })
}

/// Bounds-checked `(x, y)` lattice coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteIndex {
    x: usize,
    y: usize,
}

impl SiteIndex {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Result<Self, SimError> {
        if x >= width || y >= height {
            return Err(SimError::IndexOutOfBounds {
                x,
                y,
                width,
                height,
            });
        }
        Ok(SiteIndex { x, y })
    }

    #[inline]
    pub fn x(self) -> usize {
        self.x
    }

    #[inline]
    pub fn y(self) -> usize {
        self.y
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

pub(crate) fn check_dimensions(width: usize, height: usize) -> Result<(), SimError> {
    if width < MIN_DIMENSION || height < MIN_DIMENSION {
        return Err(SimError::LatticeTooSmall { width, height });
    }
    Ok(())
}

/// The four von Neumann neighbors of `idx` on a `width × height` torus, in the
/// order left, right, up, down.
pub fn neighbors(idx: SiteIndex, width: usize, height: usize) -> Result<[SiteIndex; 4], SimError> {
    check_dimensions(width, height)?;
    let SiteIndex { x, y } = SiteIndex::new(idx.x, idx.y, width, height)?;
    let left = (x + width - 1) % width;
    let right = (x + 1) % width;
    let up = (y + height - 1) % height;
    let down = (y + 1) % height;
    Ok([
        SiteIndex { x: left, y },
        SiteIndex { x: right, y },
        SiteIndex { x, y: up },
        SiteIndex { x, y: down },
    ])
}

/// Snapshot of the whole lattice at one time step. Sites are stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    width: usize,
    height: usize,
    sites: Vec<Qubit>,
    step_count: u64,
}

impl LatticeState {
    /// Lattice with every site set to `q`.
    pub fn uniform(width: usize, height: usize, q: Qubit) -> Result<Self, SimError> {
        check_dimensions(width, height)?;
        Ok(LatticeState {
            width,
            height,
            sites: vec![q; width * height],
            step_count: 0,
        })
    }

    /// Lattice from explicit row-major sites. Every site must be normalized.
    pub fn from_sites(width: usize, height: usize, sites: Vec<Qubit>) -> Result<Self, SimError> {
        check_dimensions(width, height)?;
        if sites.len() != width * height {
            return Err(SimError::SiteCountMismatch {
                expected: width * height,
                actual: sites.len(),
            });
        }
        if let Some((i, q)) = sites
            .iter()
            .enumerate()
            .find(|(_, q)| q.norm_deviation() >= NORM_TOLERANCE)
        {
            return Err(SimError::NotNormalized {
                x: i % width,
                y: i / width,
                norm_sq: q.norm_sq(),
            });
        }
        Ok(LatticeState {
            width,
            height,
            sites,
            step_count: 0,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    #[inline]
    pub fn sites(&self) -> &[Qubit] {
        &self.sites
    }

    pub fn index(&self, x: usize, y: usize) -> Result<SiteIndex, SimError> {
        SiteIndex::new(x, y, self.width, self.height)
    }

    /// Qubit at `idx`, checked against this lattice's dimensions.
    pub fn get(&self, idx: SiteIndex) -> Result<Qubit, SimError> {
        let idx = self.index(idx.x, idx.y)?;
        Ok(self.sites[idx.y * self.width + idx.x])
    }

    #[inline]
    pub(crate) fn at(&self, x: usize, y: usize) -> Qubit {
        self.sites[y * self.width + x]
    }

    /// Replaces one site.
    pub fn set(&mut self, idx: SiteIndex, q: Qubit) -> Result<(), SimError> {
        let idx = self.index(idx.x, idx.y)?;
        self.sites[idx.y * self.width + idx.x] = q;
        Ok(())
    }

    pub(crate) fn sites_mut(&mut self) -> &mut [Qubit] {
        &mut self.sites
    }

    pub(crate) fn set_step_count(&mut self, step_count: u64) {
        self.step_count = step_count;
    }

    /// Largest `|c² + s² − 1|` over all sites.
    pub fn max_norm_deviation(&self) -> f64 {
        self.sites
            .iter()
            .map(|q| q.norm_deviation())
            .fold(0.0, f64::max)
    }
}

/// Overlap ⟨i|j⟩ = c_i·c_j + s_i·s_j of two sites.
pub fn correlation(state: &LatticeState, i: SiteIndex, j: SiteIndex) -> Result<f64, SimError> {
    Ok(state.get(i)?.overlap(state.get(j)?))
}
