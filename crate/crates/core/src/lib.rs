//! Numerical laboratory for the focusing energy-critical wave equation
//! ∂_t²u − Δu = |u|^{4/(N−2)} u with radial data in dimensions N = 3, 4, 5.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod dimension;
pub mod energy;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod grid;
pub mod linear;
pub mod nonlinear;
pub mod quadrature;
pub mod radiation;
pub mod solitons;
pub mod state;

pub use dimension::Dimension;
pub use energy::{energy, sobolev_norms, EnergyBreakdown, SobolevNorms};
pub use error::{Error, Result};
pub use grid::RadialGrid;
pub use linear::{BoundaryPolicy, LinearEvolution, Method};
pub use nonlinear::{RunStatus, ScatteringPart, Trajectory};
pub use quadrature::{quadrature_region, RegionSpec, SpaceTimeSamples};
pub use radiation::{EtaRange, RadiationProfile};
pub use solitons::SolitonSpec;
pub use state::RadialState;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
