use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum node count accepted by [`RadialGrid`].
pub const MIN_NODES: usize = 16;

/// Uniform radial grid r_i = i * dr, i = 0..n-1, with a node at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    dr: f64,
}

impl RadialGrid {
    /// Grid with `n` nodes spanning [0, r_max].
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        Ok(Self { r_max, n, dr: r_max / (n - 1) as f64 })
    }

    /// Grid with spacing `dr` reaching at least `r_max` (rounded to a whole number of cells).
    pub fn with_spacing(r_max: f64, dr: f64) -> Result<Self> {
        if !(dr.is_finite() && dr > 0.0) {
            return Err(Error::InvalidGrid(format!("dr must be positive, got {dr}")));
        }
        let cells = (r_max / dr - 1e-9).ceil().max(1.0) as usize;
        Self::new(cells as f64 * dr, cells + 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Same extent, half the spacing.
    pub fn refined(&self) -> Self {
        Self { r_max: self.r_max, n: 2 * self.n - 1, dr: self.dr / 2.0 }
    }

    /// Index of the cell [r_i, r_{i+1}] containing `r` together with the
    /// fractional offset, or `None` outside [0, r_max].
    pub fn locate(&self, r: f64) -> Option<(usize, f64)> {
        if !(r >= 0.0 && r <= self.r_max * (1.0 + 1e-14)) {
            return None;
        }
        let x = r / self.dr;
        let i = (x.floor() as usize).min(self.n - 2);
        Some((i, (x - i as f64).clamp(0.0, 1.0)))
    }

    /// Linear interpolation of nodal `values` at radius `r`.
    pub fn interpolate(&self, values: &[f64], r: f64) -> Option<f64> {
        debug_assert_eq!(values.len(), self.n);
        let (i, s) = self.locate(r)?;
        Some(values[i] + s * (values[i + 1] - values[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_endpoints() {
        let g = RadialGrid::new(2.0, 65).unwrap();
        assert_eq!(g.dr(), 2.0 / 64.0);
        assert_eq!(g.node(0), 0.0);
        assert!((g.node(64) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn with_spacing_keeps_dr_exact() {
        let g = RadialGrid::with_spacing(10.0, 1.0 / 256.0).unwrap();
        assert_eq!(g.dr(), 1.0 / 256.0);
        assert_eq!(g.len(), 2561);
        assert_eq!(g.r_max(), 10.0);
        let g = RadialGrid::with_spacing(10.1, 0.5).unwrap();
        assert_eq!(g.r_max(), 10.5);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(RadialGrid::new(1.0, 8).is_err());
        assert!(RadialGrid::new(-1.0, 64).is_err());
        assert!(RadialGrid::with_spacing(1.0, 0.0).is_err());
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = RadialGrid::new(4.0, 33).unwrap().refined();
        assert_eq!(g.len(), 65);
        assert_eq!(g.dr(), 4.0 / 64.0);
    }

    #[test]
    fn interpolation_is_exact_for_linear_data() {
        let g = RadialGrid::new(3.0, 31).unwrap();
        let v: Vec<f64> = g.nodes().map(|r| 2.0 * r - 1.0).collect();
        for &r in &[0.0, 0.05, 1.234, 2.99, 3.0] {
            assert!((g.interpolate(&v, r).unwrap() - (2.0 * r - 1.0)).abs() < 1e-13);
        }
        assert!(g.interpolate(&v, 3.2).is_none());
        assert!(g.interpolate(&v, -0.1).is_none());
    }
}
