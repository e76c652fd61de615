use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Field and time derivative (u, ∂_t u) sampled on a radial grid at time `t`.
///
/// Samples represent an even function of r; the solvers never look at the odd part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub grid: RadialGrid,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl RadialState {
    pub fn new(grid: RadialGrid, t: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let s = Self { grid, t, u, v };
        s.validate()?;
        Ok(s)
    }

    pub fn zero(grid: RadialGrid) -> Self {
        Self { grid, t: 0.0, u: vec![0.0; grid.len()], v: vec![0.0; grid.len()] }
    }

    /// Samples `u0` and `u1` at the grid nodes.
    pub fn from_fn(grid: RadialGrid, u0: impl Fn(f64) -> f64, u1: impl Fn(f64) -> f64) -> Result<Self> {
        let u = grid.nodes().map(&u0).collect();
        let v = grid.nodes().map(&u1).collect();
        Self::new(grid, 0.0, u, v)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if self.u.len() != n || self.v.len() != n {
            return Err(Error::InvalidState(format!(
                "field lengths {} / {} do not match grid size {n}",
                self.u.len(),
                self.v.len()
            )));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidState("non-finite time".into()));
        }
        if let Some(i) = self.u.iter().chain(&self.v).position(|x| !x.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite sample at index {}", i % n)));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.u.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Largest node radius where either component is nonzero; `None` for the zero state.
    pub fn support_radius(&self) -> Option<f64> {
        (0..self.grid.len()).rev().find(|&i| self.u[i] != 0.0 || self.v[i] != 0.0).map(|i| self.grid.node(i))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            t: self.t,
            u: self.u.iter().map(|x| a * x).collect(),
            v: self.v.iter().map(|x| a * x).collect(),
        }
    }

    /// `self + b * other`, keeping `self.t`.
    pub fn axpy(&self, b: f64, other: &RadialState) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidState("states live on different grids".into()));
        }
        Ok(Self {
            grid: self.grid,
            t: self.t,
            u: self.u.iter().zip(&other.u).map(|(x, y)| x + b * y).collect(),
            v: self.v.iter().zip(&other.v).map(|(x, y)| x + b * y).collect(),
        })
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}
