//! Numerical core for radial ground states of the Kirchhoff-type problem
//!
//! ```text
//! -(a + b∫|Du|²)Δu + V(x)u = λ|u|^{p-1}u   in ℝ³
//! ```
//!
//! Everything here is IO-free and builds without `std` (an allocator is
//! required). File formats, the command-line front end and parallel drivers
//! live in the `kirchhoff` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod error;
pub mod fiber;
pub mod functional;
pub mod grid;
mod linalg;
mod math;
mod newton;
pub mod nonexistence;
pub mod potential;
mod sizing;
pub mod solver;

pub use error::{Error, Result};
pub use functional::{EnergyBreakdown, ProblemParams};
pub use grid::{RadialFunction, RadialGrid};
pub use potential::PotentialSpec;
