//! Fixtures shared by the criterion benchmarks.

use wavecone_core::data::{Bump, InitialData};
use wavecone_core::{Dimension, RadialGrid, RadialState};

/// Unit-width bump of amplitude `amp` on [0, r_max] with spacing `dr`.
pub fn bump_state(dim: Dimension, r_max: f64, dr: f64, amp: f64) -> RadialState {
    let grid = RadialGrid::with_spacing(r_max, dr).expect("valid grid");
    InitialData::Bump(Bump::new(amp, 0.0, 1.0).expect("valid bump")).sample(grid, dim).expect("sampled bump")
}
