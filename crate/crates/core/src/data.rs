//! Initial-data builders: smooth compact bumps, rescaled ground states and
//! seeded random compact data.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::solitons::eval_w;
use crate::state::RadialState;

/// amplitude · (1 − x²)^6 with x = (r − center)/width, zero for |x| ≥ 1.
///
/// With `center = 0` the profile is even in r; off-centre bumps should keep
/// `center >= width` so that they vanish near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Bump {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() || !(center >= 0.0) {
            return Err(Error::Configuration(format!(
                "bad bump (amplitude {amplitude}, center {center}, width {width})"
            )));
        }
        if center > 0.0 && center < width {
            return Err(Error::Configuration("an off-centre bump must satisfy center >= width".into()));
        }
        Ok(Self { amplitude, center, width })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let x = (r - self.center) / self.width;
        if x.abs() >= 1.0 {
            0.0
        } else {
            let s = 1.0 - x * x;
            let s3 = s * s * s;
            self.amplitude * s3 * s3
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.center + self.width
    }
}

/// Initial-data descriptor shared by the library tests and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    Zero,
    /// Bump in u, zero velocity.
    Bump(Bump),
    /// Zero field, bump in the velocity.
    VelocityBump(Bump),
    /// amplitude · λ^{-(N-2)/2} W(r/λ), zero velocity.
    GroundState {
        amplitude: f64,
        lambda: f64,
    },
}

impl InitialData {
    pub fn sample(&self, grid: RadialGrid, dim: Dimension) -> Result<RadialState> {
        match *self {
            InitialData::Zero => Ok(RadialState::zero(grid)),
            InitialData::Bump(b) => RadialState::from_fn(grid, |r| b.eval(r), |_| 0.0),
            InitialData::VelocityBump(b) => RadialState::from_fn(grid, |_| 0.0, |r| b.eval(r)),
            InitialData::GroundState { amplitude, lambda } => {
                if !(lambda > 0.0) {
                    return Err(Error::Configuration(format!("lambda must be positive, got {lambda}")));
                }
                let s = amplitude * lambda.powf(-(dim.as_f64() - 2.0) / 2.0);
                RadialState::from_fn(grid, |r| s * eval_w(r / lambda, dim), |_| 0.0)
            }
        }
    }

    /// Radius outside which the data vanish; `None` for non-compact data.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            InitialData::Zero => Some(0.0),
            InitialData::Bump(b) | InitialData::VelocityBump(b) => Some(b.support_radius()),
            InitialData::GroundState { .. } => None,
        }
    }
}

/// Random compact data: one to three bumps in each component, all supported
/// in r <= `radius`.
pub fn random_compact_data<R: Rng>(rng: &mut R, grid: RadialGrid, radius: f64) -> Result<RadialState> {
    let draw = |rng: &mut R| -> Vec<Bump> {
        let count = rng.random_range(1..=3);
        (0..count)
            .map(|_| {
                let amplitude = rng.random_range(-1.0..1.0);
                if rng.random_bool(0.4) {
                    Bump { amplitude, center: 0.0, width: rng.random_range(0.3 * radius..radius) }
                } else {
                    let width = rng.random_range(0.15 * radius..0.45 * radius);
                    let center = rng.random_range(width..radius - width);
                    Bump { amplitude, center, width }
                }
            })
            .collect()
    };
    let u0 = draw(rng);
    let u1 = draw(rng);
    RadialState::from_fn(grid, |r| u0.iter().map(|b| b.eval(r)).sum(), |r| u1.iter().map(|b| b.eval(r)).sum())
}
