#![allow(dead_code)]

use std::sync::Arc;

use kirchhoff_core::grid::{make_grid, DEFAULT_N, DEFAULT_R_MAX};
use kirchhoff_core::{RadialFunction, RadialGrid};
use proptest::prelude::*;

pub fn default_grid() -> Arc<RadialGrid> {
    make_grid(DEFAULT_R_MAX, DEFAULT_N).unwrap()
}

/// `(amplitude, center, width)` of one Gaussian bump.
pub type Bump = (f64, f64, f64);

pub fn bumps() -> impl Strategy<Value = Vec<Bump>> {
    prop::collection::vec((prop_oneof![0.2..3.0, -1.0..-0.2], 0.0..1.5, 0.4..1.2), 1..4)
}

/// Bumps whose sum stays positive: all amplitudes positive.
pub fn positive_bumps() -> impl Strategy<Value = Vec<Bump>> {
    prop::collection::vec((0.2..3.0, 0.0..1.5, 0.4..1.2), 1..4)
}

pub fn profile(grid: &Arc<RadialGrid>, bumps: &[Bump]) -> RadialFunction {
    RadialFunction::from_fn(grid.clone(), |r| bumps.iter().map(|&(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
