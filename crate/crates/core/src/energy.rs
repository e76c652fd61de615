//! Energies and the Sobolev-type norms entering the exterior defect.

use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::Result;
use crate::grid::RadialGrid;
use crate::quadrature::{radial_derivative, radial_integral_between};
use crate::state::RadialState;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// ½∫(∂_t u)²
    pub kinetic: f64,
    /// ½∫|∇u|²
    pub gradient: f64,
    /// (N-2)/(2N) ∫|u|^{2N/(N-2)}
    pub potential: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    /// Free-wave energy ½∫|∇u|² + ½∫(∂_t u)².
    pub fn linear(&self) -> f64 {
        self.kinetic + self.gradient
    }
}

/// Nonlinear energy of `state` over all of the grid.
pub fn energy(state: &RadialState, dim: Dimension) -> Result<EnergyBreakdown> {
    energy_between(state, dim, 0.0, f64::INFINITY)
}

/// Energy contained in the shell `lo <= |x| <= hi`.
pub fn energy_between(state: &RadialState, dim: Dimension, lo: f64, hi: f64) -> Result<EnergyBreakdown> {
    state.validate()?;
    Ok(energy_of_fields(&state.grid, &state.u, &state.v, dim, lo, hi))
}

pub(crate) fn energy_of_fields(
    grid: &RadialGrid,
    u: &[f64],
    v: &[f64],
    dim: Dimension,
    lo: f64,
    hi: f64,
) -> EnergyBreakdown {
    let du = radial_derivative(u, grid.dr());
    let sq: Vec<f64> = du.iter().map(|x| x * x).collect();
    let gradient = 0.5 * radial_integral_between(&sq, grid, dim, lo, hi);
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let kinetic = 0.5 * radial_integral_between(&sq, grid, dim, lo, hi);
    let pw: Vec<f64> = u.iter().map(|&x| dim.critical_power(x)).collect();
    let potential = dim.potential_coefficient() * radial_integral_between(&pw, grid, dim, lo, hi);
    EnergyBreakdown { kinetic, gradient, potential, total: kinetic + gradient - potential }
}

/// Free energy E_L(u, ∂_t u).
pub fn linear_energy(state: &RadialState, dim: Dimension) -> Result<f64> {
    Ok(energy(state, dim)?.linear())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SobolevNorms {
    /// ‖∇u‖_{L²}
    pub gradient: f64,
    /// ‖∂_t u‖_{L²}
    pub time_derivative: f64,
    /// ‖u‖_{L^{2N/(N-2)}}
    pub critical: f64,
    /// ‖u/r‖_{L²}
    pub hardy: f64,
}

pub fn sobolev_norms(state: &RadialState, dim: Dimension) -> Result<SobolevNorms> {
    let e = energy(state, dim)?;
    let grid = &state.grid;
    // u²/r² · r^{N-1} = u² r^{N-3}: the radial weight is applied by the
    // quadrature, so divide by r² away from the origin and use the finite
    // limit (u(0)² for N = 3, zero otherwise) at r = 0.
    let hardy: Vec<f64> = state
        .u
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let r = grid.node(i);
            if i == 0 {
                0.0
            } else {
                x * x / (r * r)
            }
        })
        .collect();
    let mut hardy_sq = radial_integral_between(&hardy, grid, dim, 0.0, f64::INFINITY);
    if dim.get() == 3 {
        // The trapezoid end weight at r = 0 sees r^{N-1} u²/r² = u(0)².
        hardy_sq += dim.sphere_area() * 0.5 * grid.dr() * state.u[0] * state.u[0];
    }
    let crit = dim.critical_exponent();
    Ok(SobolevNorms {
        gradient: (2.0 * e.gradient).sqrt(),
        time_derivative: (2.0 * e.kinetic).sqrt(),
        critical: (e.potential / dim.potential_coefficient()).powf(1.0 / crit),
        hardy: hardy_sq.sqrt(),
    })
}
