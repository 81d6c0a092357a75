//! Shared inputs for the criterion benchmarks.

use epi_core::{Angle, SpinModel};

/// Non-singular angles used across the benchmark groups.
pub fn angles() -> Vec<Angle> {
    (1..=32).map(|k| Angle::new(0.19 * k as f64)).collect()
}

pub fn models() -> [SpinModel; 2] {
    [SpinModel::new(1).expect("n = 1"), SpinModel::new(2).expect("n = 2")]
}
