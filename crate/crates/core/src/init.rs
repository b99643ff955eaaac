//! Initial lattice states: excited input on the periphery, ground or random
//! interior.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::SimError;
use crate::lattice::{check_dimensions, LatticeState, Qubit, NORM_TOLERANCE};
use crate::rng::XorShift64Star;

/// Which edge sites start excited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Rows `y = 0`, `y = H−1` and columns `x = 0`, `x = W−1`.
    AllFourSides,
    /// The two rows `y = 0` and `y = H−1`, which span the x direction.
    TwoOppositeSidesX,
    /// The two columns `x = 0` and `x = W−1`.
    TwoOppositeSidesY,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interior {
    AllGround,
    /// Uniform on the unit circle of the `(c, s)` plane.
    RandomUnitCircle,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::AllFourSides => "AllFourSides",
            Boundary::TwoOppositeSidesX => "TwoOppositeSidesX",
            Boundary::TwoOppositeSidesY => "TwoOppositeSidesY",
            Boundary::None => "None",
        }
    }

    fn contains(self, x: usize, y: usize, width: usize, height: usize) -> bool {
        let on_row = y == 0 || y == height - 1;
        let on_col = x == 0 || x == width - 1;
        match self {
            Boundary::AllFourSides => on_row || on_col,
            Boundary::TwoOppositeSidesX => on_row,
            Boundary::TwoOppositeSidesY => on_col,
            Boundary::None => false,
        }
    }

    /// Number of sites the pattern excites on a `width × height` lattice.
    pub fn excited_count(self, width: usize, height: usize) -> usize {
        match self {
            Boundary::AllFourSides => 2 * width + 2 * height - 4,
            Boundary::TwoOppositeSidesX => 2 * width,
            Boundary::TwoOppositeSidesY => 2 * height,
            Boundary::None => 0,
        }
    }
}

impl Interior {
    pub fn as_str(self) -> &'static str {
        match self {
            Interior::AllGround => "AllGround",
            Interior::RandomUnitCircle => "RandomUnitCircle",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Interior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AllFourSides" => Ok(Boundary::AllFourSides),
            "TwoOppositeSidesX" => Ok(Boundary::TwoOppositeSidesX),
            "TwoOppositeSidesY" => Ok(Boundary::TwoOppositeSidesY),
            "None" => Ok(Boundary::None),
            other => Err(format!(
                "unknown boundary pattern '{other}' (expected AllFourSides, TwoOppositeSidesX, TwoOppositeSidesY or None)"
            )),
        }
    }
}

impl FromStr for Interior {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AllGround" => Ok(Interior::AllGround),
            "RandomUnitCircle" => Ok(Interior::RandomUnitCircle),
            other => Err(format!(
                "unknown interior pattern '{other}' (expected AllGround or RandomUnitCircle)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitPattern {
    pub boundary: Boundary,
    pub interior: Interior,
    /// Value written to boundary sites.
    pub excited_value: Qubit,
    pub seed: u64,
}

impl Default for InitPattern {
    fn default() -> Self {
        InitPattern {
            boundary: Boundary::AllFourSides,
            interior: Interior::AllGround,
            excited_value: Qubit::EXCITED,
            seed: 0,
        }
    }
}

impl InitPattern {
    pub fn new(boundary: Boundary, interior: Interior) -> Self {
        InitPattern {
            boundary,
            interior,
            ..InitPattern::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Draws a qubit at a uniform angle θ ∈ [0, 2π) from ground: `(sin θ, cos θ)`.
pub fn random_unit_qubit(rng: &mut XorShift64Star) -> Qubit {
    Qubit::from_angle(TAU * rng.next_f64())
}

/// Builds the step-0 lattice for `pattern`.
///
/// Random interior values are drawn in row-major order, one per non-boundary
/// site, from a generator seeded with `pattern.seed`.
pub fn init_lattice(width: usize, height: usize, pattern: &InitPattern) -> Result<LatticeState, SimError> {
    check_dimensions(width, height)?;
    if pattern.excited_value.norm_deviation() >= NORM_TOLERANCE {
        return Err(SimError::InvalidParams(format!(
            "excited value {} is not normalized",
            pattern.excited_value
        )));
    }
    let mut rng = XorShift64Star::new(pattern.seed);
    let mut sites = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let q = if pattern.boundary.contains(x, y, width, height) {
                pattern.excited_value
            } else {
                match pattern.interior {
                    Interior::AllGround => Qubit::GROUND,
                    Interior::RandomUnitCircle => random_unit_qubit(&mut rng),
                }
            };
            sites.push(q);
        }
    }
    LatticeState::from_sites(width, height, sites)
}
