//! Noise specifications for the field solvers: space-time white noise, or
//! spatially colored noise built by smoothing white noise with a truncated
//! Gaussian bump. The bump's squared L2-norm is the spatial covariance at
//! lag zero, the single number the colored theory depends on.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Truncated Gaussian bump `h(x) = A exp(-|x|^2 / (2 w^2))` for `|x|` up to
/// the truncation radius, zero beyond: nonnegative and compactly supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub amplitude: f64,
    pub width: f64,
    pub truncation: f64,
}

impl BumpSpec {
    pub fn validate(&self) -> Result<()> {
        let BumpSpec { amplitude, width, truncation } = *self;
        if !amplitude.is_finite() || amplitude <= 0.0 {
            return Err(Error::input(format!("bump amplitude must be positive, got {amplitude}")));
        }
        if !width.is_finite() || width <= 0.0 {
            return Err(Error::input(format!("bump width must be positive, got {width}")));
        }
        if !truncation.is_finite() || truncation < width {
            return Err(Error::input(format!(
                "truncation radius {truncation} must be at least the bump width {width}"
            )));
        }
        Ok(())
    }

    /// Bump value at squared radius `r2`, zero beyond the truncation radius.
    pub fn eval_r2(&self, r2: f64) -> f64 {
        if r2 > self.truncation * self.truncation {
            0.0
        } else {
            self.amplitude * (-r2 / (2.0 * self.width * self.width)).exp()
        }
    }

    /// Untruncated squared L2-norm `A^2 (pi w^2)^{d/2}` in `d` dimensions:
    /// the covariance-at-zero the discrete kernel norm must reproduce.
    pub fn f_zero_continuum(&self, d: usize) -> f64 {
        self.amplitude * self.amplitude * (PI * self.width * self.width).powf(d as f64 / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    White,
    Colored(BumpSpec),
}

/// Which noise drives a solver, and which derived random stream feeds it.
/// Replicas share a master seed and differ in `stream_id`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub master_seed: u64,
    pub stream_id: u64,
}

impl NoiseSpec {
    pub fn white(master_seed: u64) -> NoiseSpec {
        NoiseSpec {
            kind: NoiseKind::White,
            master_seed,
            stream_id: 0,
        }
    }

    pub fn colored(bump: BumpSpec, master_seed: u64) -> NoiseSpec {
        NoiseSpec {
            kind: NoiseKind::Colored(bump),
            master_seed,
            stream_id: 0,
        }
    }

    pub fn with_stream(mut self, stream_id: u64) -> NoiseSpec {
        self.stream_id = stream_id;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            NoiseKind::White => Ok(()),
            NoiseKind::Colored(bump) => bump.validate(),
        }
    }
}
