//! Parabolic Anderson solver driven by noise that is white in time and
//! smoothly correlated in space, in one or two dimensions. Each step draws an
//! independent white Gaussian grid and smooths it by circular FFT convolution
//! with a truncated bump kernel, so the spatial covariance of the noise is
//! the kernel's autocorrelation; the multiplicative update is the exact-mean
//! lognormal kick of the positivity-preserving scheme.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::noise::{BumpSpec, NoiseKind, NoiseSpec};
use crate::rng;
use crate::she1d::snapshot_steps;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};

/// Cap on total lattice cells (time steps x sites) per run.
const CELL_BUDGET: u64 = 1 << 31;

/// Spatial autocovariance of the smoothed noise: the bump's autocorrelation,
/// which for a Gaussian bump of width `w` is its lag-zero mass times
/// `exp(-r^2 / (4 w^2))` (truncation changes this below 1e-14 of the peak).
pub fn bump_autocovariance(bump: &BumpSpec, d: usize, r: f64) -> f64 {
    bump.f_zero_continuum(d) * (-r * r / (4.0 * bump.width * bump.width)).exp()
}

/// Precomputed smoothing pipeline on a periodic grid: kernel spectrum plus
/// FFT plans. `ny == 1` covers the one-dimensional case.
struct ColoredSynth {
    nx: usize,
    ny: usize,
    kernel_hat: Vec<Complex<f64>>,
    planner: FftPlanner<f64>,
    /// Discrete lag-zero covariance: dx^d times the squared kernel norm.
    f_zero: f64,
    scale: f64,
}

impl ColoredSynth {
    fn new(d: usize, bump: &BumpSpec, dx: f64, nx: usize, ny: usize) -> Result<ColoredSynth> {
        let span_x = nx as f64 * dx;
        let span_y = ny as f64 * dx;
        if span_x <= 2.0 * bump.truncation || (d == 2 && span_y <= 2.0 * bump.truncation) {
            return Err(Error::input(format!(
                "domain extent must exceed twice the kernel truncation radius {}",
                bump.truncation
            )));
        }
        let mut kernel = vec![Complex::new(0.0, 0.0); nx * ny];
        let mut sq_norm = 0.0f64;
        for iy in 0..ny {
            let wy = iy.min(ny - iy) as f64 * dx;
            for ix in 0..nx {
                let wx = ix.min(nx - ix) as f64 * dx;
                let h = bump.eval_r2(wx * wx + wy * wy);
                kernel[iy * nx + ix] = Complex::new(h, 0.0);
                sq_norm += h * h;
            }
        }
        let cell = dx.powi(d as i32);
        let mut planner = FftPlanner::new();
        fft_grid(&mut kernel, nx, ny, &mut planner, false);
        Ok(ColoredSynth {
            nx,
            ny,
            kernel_hat: kernel,
            planner,
            f_zero: sq_norm * cell,
            scale: cell.sqrt() / (nx * ny) as f64,
        })
    }

    /// One spatial noise field with covariance equal to the kernel
    /// autocorrelation (variance `f_zero` at each site).
    fn sample(&mut self, rng: &mut ChaCha12Rng) -> Vec<f64> {
        let n = self.nx * self.ny;
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|_| Complex::new(StandardNormal.sample(rng), 0.0))
            .collect();
        fft_grid(&mut buf, self.nx, self.ny, &mut self.planner, false);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        fft_grid(&mut buf, self.nx, self.ny, &mut self.planner, true);
        buf.iter().map(|z| z.re * self.scale).collect()
    }
}

/// Row-column FFT over a grid stored row-major; unnormalized in both
/// directions (callers fold the 1/N into their own scaling).
fn fft_grid(
    buf: &mut [Complex<f64>],
    nx: usize,
    ny: usize,
    planner: &mut FftPlanner<f64>,
    inverse: bool,
) {
    let plan_x = if inverse {
        planner.plan_fft_inverse(nx)
    } else {
        planner.plan_fft_forward(nx)
    };
    for row in buf.chunks_exact_mut(nx) {
        plan_x.process(row);
    }
    if ny > 1 {
        let plan_y = if inverse {
            planner.plan_fft_inverse(ny)
        } else {
            planner.plan_fft_forward(ny)
        };
        let mut col = vec![Complex::new(0.0, 0.0); ny];
        for x in 0..nx {
            for (y, slot) in col.iter_mut().enumerate() {
                *slot = buf[y * nx + x];
            }
            plan_y.process(&mut col);
            for (y, value) in col.iter().enumerate() {
                buf[y * nx + x] = *value;
            }
        }
    }
}

/// Draw one correlated spatial noise field on the periodic grid `[0,
/// extent)^d` and report the discrete lag-zero covariance. This is exactly
/// the per-step noise the solver uses (before the sqrt(dt) time scaling).
pub fn sample_colored_noise(
    d: usize,
    bump: &BumpSpec,
    dx: f64,
    extent: f64,
    seed: u64,
    stream_id: u64,
) -> Result<(Field, f64)> {
    let (nx, ny) = grid_shape(d, dx, extent)?;
    bump.validate()?;
    let mut synth = ColoredSynth::new(d, bump, dx, nx, ny)?;
    let mut rng = rng::stream(seed, "colored_noise", stream_id);
    let values = synth.sample(&mut rng);
    let field = if d == 1 {
        Field::from_values_1d(0.0, dx, 0.0, values)?
    } else {
        Field::from_values_2d([0.0, 0.0], dx, 0.0, nx, ny, values)?
    };
    Ok((field, synth.f_zero))
}

fn grid_shape(d: usize, dx: f64, extent: f64) -> Result<(usize, usize)> {
    if d != 1 && d != 2 {
        return Err(Error::input(format!("dimension must be 1 or 2, got {d}")));
    }
    if !dx.is_finite() || dx <= 0.0 {
        return Err(Error::input(format!("grid step must be finite and positive, got {dx}")));
    }
    if !extent.is_finite() || extent <= 0.0 {
        return Err(Error::input(format!("extent must be finite and positive, got {extent}")));
    }
    let n_f = (extent / dx).round();
    if n_f < 4.0 || (n_f * dx - extent).abs() > 1e-9 * extent {
        return Err(Error::input(format!(
            "extent {extent} must be a whole number (>= 4) of grid steps {dx}"
        )));
    }
    let n = n_f as usize;
    Ok((n, if d == 1 { 1 } else { n }))
}

/// Solver output: snapshots plus the reported lag-zero noise covariance.
#[derive(Debug, Clone)]
pub struct ColoredRun {
    pub snapshots: Vec<Field>,
    /// Discrete lag-zero spatial covariance of the driving noise.
    pub f_zero: f64,
}

/// Integrate the multiplicative equation from flat initial data `u = 1` on
/// the periodic domain `[0, extent)^d` with spatially correlated noise.
/// `window`, if given, zeroes the noise outside the per-axis box (axis 1 is
/// ignored for `d = 1`) while drawing the identical realization.
pub fn solve_pam_colored(
    d: usize,
    noise: &NoiseSpec,
    dt: f64,
    dx: f64,
    t_end: f64,
    extent: f64,
    window: Option<[[f64; 2]; 2]>,
    snapshots: &[f64],
) -> Result<ColoredRun> {
    let bump = match noise.kind {
        NoiseKind::Colored(b) => b,
        NoiseKind::White => {
            return Err(Error::input(
                "this solver needs spatially colored noise; use the white-noise solver",
            ));
        }
    };
    bump.validate()?;
    let (nx, ny) = grid_shape(d, dx, extent)?;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::input(format!("time step must be finite and positive, got {dt}")));
    }
    let dt_max = dx * dx / (2.0 * d as f64);
    if dt > dt_max {
        return Err(Error::input(format!(
            "unstable time step: dt = {dt} exceeds the stability bound dx^2/(2d) = {dt_max}; \
             choose dt <= {dt_max}"
        )));
    }
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::input(format!("horizon must be positive, got {t_end}")));
    }
    let steps_f = (t_end / dt).round();
    if steps_f < 1.0 || (steps_f * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::input(format!(
            "horizon {t_end} must be a whole number of time steps {dt}"
        )));
    }
    let steps = steps_f as u64;
    let n_total = nx * ny;
    let cells = steps.saturating_mul(n_total as u64);
    if cells > CELL_BUDGET {
        return Err(Error::Resource {
            reason: "space-time lattice too large; coarsen the grid or shorten the run".into(),
            requested: cells,
            budget: CELL_BUDGET,
        });
    }
    let snap_steps = snapshot_steps(dt, t_end, snapshots)?;
    let mask: Option<Vec<bool>> = match window {
        None => None,
        Some(axes) => {
            let checked = |axis: usize| -> Result<[f64; 2]> {
                let [lo, hi] = axes[axis];
                if !(lo.is_finite() && hi.is_finite()) || lo >= hi || lo < 0.0 || hi > extent {
                    return Err(Error::input(format!(
                        "noise window [{lo}, {hi}] on axis {axis} must be a nonempty subinterval of [0, {extent}]"
                    )));
                }
                Ok([lo, hi])
            };
            let wx = checked(0)?;
            let wy = if d == 2 { checked(1)? } else { [0.0, 0.0] };
            Some(
                (0..n_total)
                    .map(|j| {
                        let x = (j % nx) as f64 * dx;
                        let y = (j / nx) as f64 * dx;
                        (wx[0]..=wx[1]).contains(&x) && (d == 1 || (wy[0]..=wy[1]).contains(&y))
                    })
                    .collect(),
            )
        }
    };

    let mut synth = ColoredSynth::new(d, &bump, dx, nx, ny)?;
    let f_zero = synth.f_zero;
    let mut rng = rng::stream(noise.master_seed, "pam_colored", noise.stream_id);
    let r = dt / (2.0 * dx * dx);
    let sqrt_dt = dt.sqrt();
    let drift = 0.5 * f_zero * dt;
    let mut u = vec![1.0f64; n_total];
    let mut next = vec![0.0f64; n_total];
    let mut out: Vec<Field> = Vec::with_capacity(snap_steps.len());
    let mut snap_iter = snap_steps.iter().peekable();
    let snapshot = |u: &[f64], t: f64| -> Result<Field> {
        if d == 1 {
            Field::from_values_1d(0.0, dx, t, u.to_vec())
        } else {
            Field::from_values_2d([0.0, 0.0], dx, t, nx, ny, u.to_vec())
        }
    };
    if snap_iter.peek() == Some(&&0) {
        snap_iter.next();
        out.push(snapshot(&u, 0.0)?);
    }
    for m in 1..=steps {
        if d == 1 {
            for j in 0..n_total {
                let left = u[(j + n_total - 1) % n_total];
                let right = u[(j + 1) % n_total];
                next[j] = u[j] + r * (right - 2.0 * u[j] + left);
            }
        } else {
            for iy in 0..ny {
                let up = (iy + ny - 1) % ny;
                let down = (iy + 1) % ny;
                for ix in 0..nx {
                    let j = iy * nx + ix;
                    let west = u[iy * nx + (ix + nx - 1) % nx];
                    let east = u[iy * nx + (ix + 1) % nx];
                    let north = u[up * nx + ix];
                    let south = u[down * nx + ix];
                    next[j] = u[j] + r * (west + east + north + south - 4.0 * u[j]);
                }
            }
        }
        let eta = synth.sample(&mut rng);
        for j in 0..n_total {
            if mask.as_ref().map_or(true, |w| w[j]) {
                next[j] *= (sqrt_dt * eta[j] - drift).exp();
            }
            if !(next[j] > 0.0 && next[j].is_finite()) {
                return Err(Error::domain(format!(
                    "positivity lost at step {m}, site {j}: value {}",
                    next[j]
                )));
            }
        }
        std::mem::swap(&mut u, &mut next);
        if snap_iter.peek() == Some(&&m) {
            snap_iter.next();
            out.push(snapshot(&u, m as f64 * dt)?);
        }
    }
    Ok(ColoredRun { snapshots: out, f_zero })
}
