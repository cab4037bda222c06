//! Simulation and macroscopic-dimension measurement for the tall peaks of
//! stochastic processes and stochastic PDEs.
//!
//! The crate has two halves. The geometry half pixelizes subsets of R^1 or
//! R^2 into integer cells organized by exponential shells and estimates
//! large-scale (macroscopic) Hausdorff and Minkowski dimensions from optimal
//! box covers. The simulation half produces trajectories and fields
//! (Brownian motion, its stationary log-scale reduction, the additive and
//! multiplicative stochastic heat equations with space-time white or
//! spatially correlated noise), thresholds them against growth gauges, and
//! feeds the resulting peak sets back into the geometry half to measure
//! dimension-versus-level spectra.

pub mod colored;
pub mod cover;
pub mod dimension;
pub mod fixtures;
pub mod skeleton;
pub mod error;
pub mod exceed;
pub mod rng;
pub mod shell;
pub mod field;
pub mod linear_she;
pub mod moments;
pub mod noise;
pub mod she1d;
pub mod stats;
pub mod svg;
pub mod sweep;
pub mod theory;
pub mod traj;

pub use error::{Error, Result};
