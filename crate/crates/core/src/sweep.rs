//! Gamma sweeps: simulate a process family over replicas, extract the
//! gauge-normalized exceedance set at each level gamma, run both dimension
//! estimators, and aggregate into an empirical spectrum with closed-form
//! overlays and a multifractality verdict.
//!
//! Within one replica every gamma level is extracted from the *same*
//! realization, so the level sets are nested and the empirical spectrum is
//! non-increasing in gamma up to estimator noise.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::colored::solve_pam_colored;
use crate::dimension::{default_rho_grid, dimh_estimate, dimm_estimate, DimMethod};
use crate::error::{Error, Result};
use crate::exceed::{
    collect_exceedance_1d, exceedance_pixels_field, ExceedanceSpec, GaugeKind, GaugeSpec,
    Transform,
};
use crate::field::Field;
use crate::linear_she::{heat_cov, sample_linear_she};
use crate::noise::{BumpSpec, NoiseSpec};
use crate::shell::{Ambient, PixelSet};
use crate::she1d::{solve_she_1d, SchemeSpec, SigmaSpec};
use crate::stats;
use crate::theory::{theory_dim, TheoryModel, TheoryValue};
use crate::traj::{stream_bm, stream_ou};

/// Process family to sweep, with the simulator parameters it needs. The
/// abscissa range is derived from the shell band in [`SweepConfig`] for the
/// trajectory and synthesis models; grid-solver models declare their domain
/// explicitly and are checked against the band.
#[derive(Debug, Clone)]
pub enum SweepModel {
    /// Stationary process sampled on a uniform time grid.
    Ou { dt: f64 },
    /// Brownian motion sampled on a uniform time grid.
    Bm { dt: f64 },
    /// Fixed-time slice of the additive-noise heat equation, synthesized
    /// spectrally at spacing `dx` and analyzed under the sqrt-log gauge
    /// normalized by the slice's exact standard deviation.
    LinearShe { t: f64, dx: f64 },
    /// Multiplicative-noise log-field on `[0, x_max)` at time `t_end`,
    /// analyzed under the two-thirds-log gauge normalized by `t_end^{1/3}`.
    PamWhite { scheme: SchemeSpec, t_end: f64, x_max: f64 },
    /// Smooth-covariance multiplicative log-field in `d` dimensions,
    /// analyzed under the sqrt-log gauge normalized by `sqrt(t_end)`.
    Colored { d: usize, bump: BumpSpec, dt: f64, dx: f64, extent: f64, t_end: f64 },
}

impl SweepModel {
    pub fn tag(&self) -> &'static str {
        match self {
            SweepModel::Ou { .. } => "ou",
            SweepModel::Bm { .. } => "bm",
            SweepModel::LinearShe { .. } => "linear_she",
            SweepModel::PamWhite { .. } => "pam_white",
            SweepModel::Colored { .. } => "colored",
        }
    }

    /// Closed-form prediction family for the overlay. Multiplicative sweeps
    /// read the slope envelope off the declared sigma profile; a custom
    /// profile has no closed form and is refused.
    pub fn theory_model(&self) -> Result<TheoryModel> {
        Ok(match self {
            SweepModel::Ou { .. } => TheoryModel::Ou,
            SweepModel::Bm { .. } => TheoryModel::Bm,
            SweepModel::LinearShe { .. } => TheoryModel::LinearShe,
            SweepModel::PamWhite { scheme, .. } => match scheme.sigma {
                SigmaSpec::Linear(c) => {
                    if c == 0.0 {
                        return Err(Error::input(
                            "zero noise amplitude has no peak spectrum; use a positive slope",
                        ));
                    }
                    TheoryModel::PamWhite { sigma_lo: c, sigma_hi: c }
                }
                SigmaSpec::ClippedLinear { lo, hi } => {
                    TheoryModel::PamWhite { sigma_lo: lo, sigma_hi: hi }
                }
                SigmaSpec::Custom(_) => {
                    return Err(Error::input(
                        "custom noise profiles have no closed-form spectrum; \
                         sweep with a linear or clipped_linear profile",
                    ))
                }
            },
            SweepModel::Colored { d, bump, .. } => {
                TheoryModel::Colored { d: *d, f_zero: bump.f_zero_continuum(*d) }
            }
        })
    }

    /// Gauge family, level normalization, and value transform for the sweep.
    fn pipeline(&self) -> Result<(GaugeKind, f64, Transform)> {
        Ok(match self {
            SweepModel::Ou { .. } => (GaugeKind::SqrtLog, 1.0, Transform::Identity),
            SweepModel::Bm { .. } => (GaugeKind::BmLil, 1.0, Transform::Identity),
            SweepModel::LinearShe { t, .. } => {
                (GaugeKind::SqrtLog, heat_cov(*t, 0.0).sqrt(), Transform::Identity)
            }
            SweepModel::PamWhite { t_end, .. } => {
                (GaugeKind::LogTwoThirds, t_end.powf(1.0 / 3.0), Transform::Log)
            }
            SweepModel::Colored { t_end, .. } => {
                (GaugeKind::SqrtLogColored, t_end.sqrt(), Transform::Log)
            }
        })
    }

    fn validate(&self, config: &SweepConfig) -> Result<()> {
        let top = (config.n_max as f64).exp();
        match self {
            SweepModel::Ou { dt } | SweepModel::Bm { dt } => {
                if !(dt.is_finite() && *dt > 0.0 && *dt <= 1.0) {
                    return Err(Error::input(format!(
                        "trajectory step must lie in (0, 1] so unit cells are visited, got {dt}"
                    )));
                }
            }
            SweepModel::LinearShe { t, dx } => {
                if !(t.is_finite() && *t > 0.0) {
                    return Err(Error::input(format!("slice time must be positive, got {t}")));
                }
                if !(dx.is_finite() && *dx > 0.0 && *dx <= 1.0) {
                    return Err(Error::input(format!(
                        "field spacing must lie in (0, 1] so unit cells are visited, got {dx}"
                    )));
                }
            }
            SweepModel::PamWhite { t_end, x_max, .. } => {
                if !(t_end.is_finite() && *t_end > 0.0) {
                    return Err(Error::input(format!("horizon must be positive, got {t_end}")));
                }
                if *x_max < top {
                    return Err(Error::input(format!(
                        "domain extent {x_max} does not reach the top of the shell band \
                         (need at least e^{} = {top:.1})",
                        config.n_max
                    )));
                }
            }
            SweepModel::Colored { extent, t_end, .. } => {
                if !(t_end.is_finite() && *t_end > 0.0) {
                    return Err(Error::input(format!("horizon must be positive, got {t_end}")));
                }
                if *extent < top {
                    return Err(Error::input(format!(
                        "domain extent {extent} does not reach the top of the shell band \
                         (need at least e^{} = {top:.1})",
                        config.n_max
                    )));
                }
            }
        }
        Ok(())
    }

    /// One replica: simulate, then extract the exceedance pixel set at every
    /// level (all levels from the same realization). Returns the pixel sets
    /// aligned with `specs` plus any below-start warnings.
    fn replica_pixels(
        &self,
        specs: &[ExceedanceSpec],
        transform: Transform,
        config: &SweepConfig,
        replica: u32,
    ) -> Result<(Vec<PixelSet>, Vec<String>)> {
        let sub_seed = config.seed.wrapping_add(replica as u64);
        let top = (config.n_max as f64).exp();
        match self {
            SweepModel::Ou { dt } => {
                let samples = stream_ou(top, *dt, sub_seed)?;
                split(collect_exceedance_1d(samples, specs, transform, Ambient::HalfLine)?)
            }
            SweepModel::Bm { dt } => {
                let samples = stream_bm(top, *dt, sub_seed)?;
                split(collect_exceedance_1d(samples, specs, transform, Ambient::HalfLine)?)
            }
            SweepModel::LinearShe { t, dx } => {
                let field = sample_linear_she(*t, top, *dx, sub_seed)?;
                field_pixels(&field, specs, transform)
            }
            SweepModel::PamWhite { scheme, t_end, x_max } => {
                let noise = NoiseSpec::white(config.seed).with_stream(replica as u64);
                let run = solve_she_1d(scheme, &noise, *t_end, *x_max, None, &[*t_end])?;
                field_pixels(&run.snapshots[0], specs, transform)
            }
            SweepModel::Colored { d, bump, dt, dx, extent, t_end } => {
                let noise = NoiseSpec::colored(*bump, config.seed).with_stream(replica as u64);
                let run =
                    solve_pam_colored(*d, &noise, *dt, *dx, *t_end, *extent, None, &[*t_end])?;
                field_pixels(&run.snapshots[0], specs, transform)
            }
        }
    }
}

fn split(outcomes: Vec<crate::exceed::ExceedanceOutcome>) -> Result<(Vec<PixelSet>, Vec<String>)> {
    let mut pixels = Vec::with_capacity(outcomes.len());
    let mut warnings = Vec::new();
    for o in outcomes {
        warnings.extend(o.warnings);
        pixels.push(o.pixels);
    }
    Ok((pixels, warnings))
}

fn field_pixels(
    field: &Field,
    specs: &[ExceedanceSpec],
    transform: Transform,
) -> Result<(Vec<PixelSet>, Vec<String>)> {
    let mut pixels = Vec::with_capacity(specs.len());
    let mut warnings = Vec::new();
    for spec in specs {
        let o = exceedance_pixels_field(field, spec, transform)?;
        warnings.extend(o.warnings);
        pixels.push(o.pixels);
    }
    Ok((pixels, warnings))
}

/// Shell band, replica count, master seed, and estimator options shared by
/// every level of a sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n_min: u32,
    pub n_max: u32,
    pub replicas: u32,
    pub seed: u64,
    /// Fraction trimmed from each tail when averaging replica estimates.
    pub trim: f64,
    /// Covering-exponent grid; `None` uses the estimator default.
    pub rho_grid: Option<Vec<f64>>,
}

impl SweepConfig {
    pub fn new(n_min: u32, n_max: u32, replicas: u32, seed: u64) -> SweepConfig {
        SweepConfig { n_min, n_max, replicas, seed, trim: 0.1, rho_grid: None }
    }

    fn validate(&self) -> Result<()> {
        if self.n_min > self.n_max {
            return Err(Error::input(format!(
                "shell band reversed: [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        if self.replicas == 0 {
            return Err(Error::input("at least one replica is required"));
        }
        if !(self.trim >= 0.0 && self.trim < 0.5) {
            return Err(Error::input(format!(
                "trim fraction must lie in [0, 0.5), got {}",
                self.trim
            )));
        }
        Ok(())
    }
}

/// Replica-aggregated dimension at one level for one estimator.
#[derive(Debug, Clone)]
pub struct LevelEstimate {
    /// Trimmed mean of the unbounded replica estimates; NaN when bounded.
    pub dim_hat: f64,
    /// Trimmed standard error; NaN with fewer than 3 usable replicas.
    pub stderr: f64,
    /// Fraction of replicas whose level set was bounded (or too sparse to
    /// fit, which carries the same message at this band).
    pub bounded_fraction: f64,
    /// Replicas contributing to `dim_hat`.
    pub used_replicas: u32,
    /// True when no replica produced an estimate.
    pub bounded: bool,
}

#[derive(Debug, Clone)]
pub struct GammaLevel {
    pub gamma: f64,
    pub hausdorff: LevelEstimate,
    pub minkowski: LevelEstimate,
    pub theory: TheoryValue,
    pub replicas: u32,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub model_tag: String,
    pub ambient_dim: usize,
    /// Levels in ascending gamma order.
    pub levels: Vec<GammaLevel>,
    /// Largest distance from an unbounded covering estimate to its theory
    /// band (0 inside the band); NaN when no level is comparable.
    pub max_abs_delta: f64,
    pub warnings: Vec<String>,
}

enum ReplicaOutcome {
    Estimated(f64),
    Bounded,
}

fn aggregate_level(outcomes: &[ReplicaOutcome], trim: f64) -> LevelEstimate {
    let values: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            ReplicaOutcome::Estimated(v) => Some(*v),
            ReplicaOutcome::Bounded => None,
        })
        .collect();
    let total = outcomes.len() as f64;
    let bounded_fraction = (total - values.len() as f64) / total;
    if values.is_empty() {
        return LevelEstimate {
            dim_hat: f64::NAN,
            stderr: f64::NAN,
            bounded_fraction,
            used_replicas: 0,
            bounded: true,
        };
    }
    LevelEstimate {
        dim_hat: stats::trimmed_mean(&values, trim),
        stderr: stats::trimmed_stderr(&values, trim),
        bounded_fraction,
        used_replicas: values.len() as u32,
        bounded: false,
    }
}

/// Distance from a point to the closed band `[lo, hi]` (0 inside).
fn band_distance(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

/// Sweep the model over the given levels: `replicas` independent
/// realizations per level (each realization shared across levels), both
/// dimension estimators on the configured shell band, trimmed-mean
/// aggregation, and closed-form overlay. Levels whose exceedance sets are
/// bounded in every replica are reported as bounded, not as failures.
pub fn spectrum_sweep(
    model: &SweepModel,
    gammas: &[f64],
    config: &SweepConfig,
) -> Result<SpectrumResult> {
    config.validate()?;
    model.validate(config)?;
    if gammas.is_empty() {
        return Err(Error::input("at least one gamma level is required"));
    }
    for &g in gammas {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::input(format!(
                "gamma levels must be finite and positive, got {g}"
            )));
        }
    }
    let mut levels_sorted: Vec<f64> = gammas.to_vec();
    levels_sorted.sort_by(|a, b| a.total_cmp(b));
    if levels_sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::input("gamma levels must be distinct"));
    }

    let theory_model = model.theory_model()?;
    let d = theory_model.ambient_dim();
    let (gauge_kind, normalization, transform) = model.pipeline()?;
    let specs: Vec<ExceedanceSpec> = levels_sorted
        .iter()
        .map(|&g| {
            ExceedanceSpec::new(GaugeSpec::with_default_start(gauge_kind, normalization)?, g)
        })
        .collect::<Result<_>>()?;
    let rho_grid: Vec<f64> =
        config.rho_grid.clone().unwrap_or_else(|| default_rho_grid(d));

    // Replica tasks are pure and independently seeded; run them in
    // parallel and merge in replica order so the result is deterministic.
    let per_replica: Vec<(Vec<(ReplicaOutcome, ReplicaOutcome)>, Vec<String>)> = (0..config
        .replicas)
        .into_par_iter()
        .map(|r| -> Result<_> {
            let (pixel_sets, warns) = model.replica_pixels(&specs, transform, config, r)?;
            let mut per_level = Vec::with_capacity(pixel_sets.len());
            for px in &pixel_sets {
                let h = fold_estimate(dimh_estimate(px, &rho_grid, config.n_min, config.n_max))?;
                let m = fold_estimate(dimm_estimate(px, config.n_min, config.n_max))?;
                per_level.push((h, m));
            }
            Ok((per_level, warns))
        })
        .collect::<Result<_>>()?;

    let mut warnings: BTreeSet<String> = BTreeSet::new();
    let mut h_out: Vec<Vec<ReplicaOutcome>> = (0..levels_sorted.len()).map(|_| Vec::new()).collect();
    let mut m_out: Vec<Vec<ReplicaOutcome>> = (0..levels_sorted.len()).map(|_| Vec::new()).collect();
    for (per_level, warns) in per_replica {
        warnings.extend(warns);
        for (gi, (h, m)) in per_level.into_iter().enumerate() {
            h_out[gi].push(h);
            m_out[gi].push(m);
        }
    }

    let mut levels = Vec::with_capacity(levels_sorted.len());
    for (gi, &gamma) in levels_sorted.iter().enumerate() {
        levels.push(GammaLevel {
            gamma,
            hausdorff: aggregate_level(&h_out[gi], config.trim),
            minkowski: aggregate_level(&m_out[gi], config.trim),
            theory: theory_dim(&theory_model, gamma)?,
            replicas: config.replicas,
        });
    }

    let mut max_abs_delta = f64::NAN;
    for level in &levels {
        if level.hausdorff.bounded || level.theory.bounded {
            continue;
        }
        let delta = band_distance(level.hausdorff.dim_hat, level.theory.lo, level.theory.hi);
        if max_abs_delta.is_nan() || delta > max_abs_delta {
            max_abs_delta = delta;
        }
    }

    Ok(SpectrumResult {
        model_tag: model.tag().to_string(),
        ambient_dim: d,
        levels,
        max_abs_delta,
        warnings: warnings.into_iter().collect(),
    })
}

/// A level set that never reaches the top of the band is bounded; one that
/// reaches it but occupies too few shells to fit carries the same message,
/// so both fold to the bounded outcome. Everything else is a hard error.
fn fold_estimate(
    r: Result<crate::dimension::DimensionEstimate>,
) -> Result<ReplicaOutcome> {
    match r {
        Ok(e) if e.bounded => Ok(ReplicaOutcome::Bounded),
        Ok(e) => Ok(ReplicaOutcome::Estimated(e.value)),
        Err(Error::InsufficientData(_)) => Ok(ReplicaOutcome::Bounded),
        Err(other) => Err(other),
    }
}

/// Contrast between the two axis conventions applied to the same Brownian
/// iterated-logarithm peak events: shells of the natural time `s` versus
/// shells of `t = log s`.
///
/// Paths are realized through the stationary rescaling
/// `U_t = e^{-t/2} B_{e^t}` (an exact change of variables), which makes
/// horizons of `s = e^{40}` affordable: under the square-root-log gauge the
/// event `U_t >= gamma sqrt(2 log t)` is exactly
/// `B_s >= gamma sqrt(2 s log log s)`.
///
/// * `reindexed`: per-path dimension of the exceedance cells on the `t`
///   axis over every shell the horizon resolves, averaged over replicas.
///   The log axis squashes the whole horizon into a handful of shells, so
///   each path's set reads as bounded — that collapse is the finding, and
///   bounded replicas count as dimension 0 (the macroscopic dimension of
///   any bounded set).
/// * `direct`: dimension of the union over replicas of the `s`-axis images
///   of those exceedance cells, where the cell `[t, t+1)` maps to the run
///   `[e^t, e^{t+1})`. Near the critical level a single window usually
///   dies out before the top shell (the peak set thins log-slowly), so
///   independent paths are pooled; a union of full-dimensional sets is
///   still full-dimensional, and the pooling only raises the chance that
///   the window resolves it.
#[derive(Debug, Clone, Copy)]
pub struct ReindexContrast {
    /// Natural-axis dimension of the pooled exceedance image.
    pub direct: f64,
    pub direct_bounded: bool,
    /// Mean log-axis dimension, bounded replicas contributing 0.
    pub reindexed: f64,
    pub reindexed_bounded_fraction: f64,
    pub replicas: u32,
}

/// Largest shell whose integer cells are exactly representable as `f64`
/// corners (`e^36 < 2^53`); beyond it the boundary splitter can round a
/// run's end cell into the next shell.
const MAX_EXP_IMAGE_SHELL: u32 = 36;

pub fn bm_log_reindex_contrast(
    gamma: f64,
    n_min: u32,
    n_max: u32,
    dt: f64,
    replicas: u32,
    seed: u64,
) -> Result<ReindexContrast> {
    if !(dt.is_finite() && dt > 0.0 && dt <= 1.0) {
        return Err(Error::input(format!(
            "trajectory step must lie in (0, 1] so unit cells are visited, got {dt}"
        )));
    }
    if n_max > MAX_EXP_IMAGE_SHELL {
        return Err(Error::input(format!(
            "natural-axis cells above shell {MAX_EXP_IMAGE_SHELL} cannot be \
             addressed exactly, got {n_max}"
        )));
    }
    if replicas == 0 {
        return Err(Error::input("at least one replica is required"));
    }
    let spec =
        ExceedanceSpec::new(GaugeSpec::with_default_start(GaugeKind::SqrtLog, 1.0)?, gamma)?;
    let t_max = n_max as f64;
    let log_top = crate::shell::shell_of(&[t_max]);
    let rho = default_rho_grid(1);

    let mut reindex_vals = Vec::new();
    let mut reindex_bounded = 0u32;
    let mut pooled_cells: BTreeSet<i64> = BTreeSet::new();
    for r in 0..replicas {
        let sub_seed = seed.wrapping_add(r as u64);
        let outcome = collect_exceedance_1d(
            stream_ou(t_max, dt, sub_seed)?,
            std::slice::from_ref(&spec),
            Transform::Identity,
            Ambient::HalfLine,
        )?;
        let log_pixels = &outcome[0].pixels;
        match effective_dim(dimh_estimate(log_pixels, &rho, 0, log_top)) {
            (v, false) => reindex_vals.push(v),
            (_, true) => {
                reindex_bounded += 1;
                reindex_vals.push(0.0);
            }
        }
        for n in log_pixels.occupied_shells() {
            pooled_cells.extend(log_pixels.shell(n).expect("occupied shell").cells_1d());
        }
    }
    let image = exp_image_pixels(&pooled_cells);
    let (direct, direct_bounded) = effective_dim(dimh_estimate(&image, &rho, n_min, n_max));
    Ok(ReindexContrast {
        direct,
        direct_bounded,
        reindexed: stats::mean(&reindex_vals),
        reindexed_bounded_fraction: reindex_bounded as f64 / replicas as f64,
        replicas,
    })
}

/// Image of a sorted set of unit `t`-cells under exponentiation of the
/// abscissa: the cell `[k, k+1)` maps to the run `[e^k, e^{k+1})`, stored
/// run-length-compressed. Under the southwest-corner pixelization rule the
/// integer cells of that interval are `[ceil(e^k), ceil(e^{k+1}))`; using
/// `ceil` on both ends keeps every cell of the image inside shell `k + 1`
/// and makes images of consecutive `t`-cells abut exactly.
fn exp_image_pixels(cells: &BTreeSet<i64>) -> PixelSet {
    let mut b = crate::shell::RunShellBuilder::new(1.0);
    let mut prev_end: i64 = i64::MIN;
    for &k in cells {
        let lo = (k as f64).exp().ceil() as i64;
        let hi = ((k + 1) as f64).exp().ceil() as i64;
        let start = lo.max(prev_end);
        if hi <= start {
            continue;
        }
        b.push_run(start, (hi - start) as u64);
        prev_end = hi;
    }
    b.into_pixel_set(Ambient::HalfLine)
}

fn effective_dim(r: Result<crate::dimension::DimensionEstimate>) -> (f64, bool) {
    match r {
        Ok(e) if e.bounded => (0.0, true),
        Ok(e) => (e.value, false),
        Err(_) => (0.0, true),
    }
}

// ---------------------------------------------------------------------------
// CSV rows, merging, and the comparison report.
// ---------------------------------------------------------------------------

const SPECTRUM_HEADER: &str =
    "model,gamma,estimator,dim_hat,stderr,theory_lo,theory_hi,replicas";

/// One spectrum table row: a (model, level, estimator) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub model: String,
    pub gamma: f64,
    pub estimator: DimMethod,
    /// `None` when every replica's level set was bounded.
    pub dim_hat: Option<f64>,
    /// `None` when too few replicas contributed for a spread.
    pub stderr: Option<f64>,
    pub theory_lo: f64,
    pub theory_hi: f64,
    pub replicas: u32,
}

/// Flatten a sweep result into table rows, two per level (one per
/// estimator), in ascending gamma order.
pub fn rows_from_result(result: &SpectrumResult) -> Vec<SpectrumRow> {
    let mut rows = Vec::with_capacity(result.levels.len() * 2);
    for level in &result.levels {
        for (estimator, est) in [
            (DimMethod::Hausdorff, &level.hausdorff),
            (DimMethod::Minkowski, &level.minkowski),
        ] {
            rows.push(SpectrumRow {
                model: result.model_tag.clone(),
                gamma: level.gamma,
                estimator,
                dim_hat: if est.bounded { None } else { Some(est.dim_hat) },
                stderr: if est.stderr.is_nan() { None } else { Some(est.stderr) },
                theory_lo: level.theory.lo,
                theory_hi: level.theory.hi,
                replicas: level.replicas,
            });
        }
    }
    rows
}

pub fn write_spectrum_csv<W: Write>(w: &mut W, rows: &[SpectrumRow]) -> Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for r in rows {
        let dim = match r.dim_hat {
            Some(v) => format!("{v}"),
            None => "bounded".to_string(),
        };
        let se = match r.stderr {
            Some(v) => format!("{v}"),
            None => "na".to_string(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.model,
            r.gamma,
            r.estimator.as_str(),
            dim,
            se,
            r.theory_lo,
            r.theory_hi,
            r.replicas
        )?;
    }
    Ok(())
}

fn format_err(path: &str, detail: impl Into<String>) -> Error {
    Error::Format { path: path.to_string(), detail: detail.into() }
}

pub fn read_spectrum_csv<R: BufRead>(r: &mut R, path_label: &str) -> Result<Vec<SpectrumRow>> {
    let mut lines = Vec::new();
    for line in r.lines() {
        lines.push(line?);
    }
    let mut it = lines.iter().filter(|l| !l.trim().is_empty());
    match it.next() {
        Some(h) if h.trim() == SPECTRUM_HEADER => {}
        other => {
            return Err(format_err(
                path_label,
                format!("expected header '{SPECTRUM_HEADER}', found {:?}", other),
            ))
        }
    }
    let mut rows = Vec::new();
    for line in it {
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != 8 {
            return Err(format_err(
                path_label,
                format!("expected 8 fields, found {} in '{line}'", parts.len()),
            ));
        }
        let gamma: f64 = parts[1]
            .parse()
            .map_err(|_| format_err(path_label, format!("bad gamma '{}'", parts[1])))?;
        let estimator = match parts[2] {
            "hausdorff" => DimMethod::Hausdorff,
            "minkowski" => DimMethod::Minkowski,
            "lower_hausdorff" => DimMethod::LowerHausdorff,
            other => {
                return Err(format_err(path_label, format!("unknown estimator '{other}'")))
            }
        };
        let dim_hat = match parts[3] {
            "bounded" => None,
            v => Some(v.parse::<f64>().map_err(|_| {
                format_err(path_label, format!("bad dimension estimate '{v}'"))
            })?),
        };
        let stderr = match parts[4] {
            "na" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| format_err(path_label, format!("bad stderr '{v}'")))?,
            ),
        };
        let theory_lo: f64 = parts[5]
            .parse()
            .map_err(|_| format_err(path_label, format!("bad theory_lo '{}'", parts[5])))?;
        let theory_hi: f64 = parts[6]
            .parse()
            .map_err(|_| format_err(path_label, format!("bad theory_hi '{}'", parts[6])))?;
        let replicas: u32 = parts[7]
            .parse()
            .map_err(|_| format_err(path_label, format!("bad replica count '{}'", parts[7])))?;
        rows.push(SpectrumRow {
            model: parts[0].to_string(),
            gamma,
            estimator,
            dim_hat,
            stderr,
            theory_lo,
            theory_hi,
            replicas,
        });
    }
    Ok(rows)
}

/// Pool rows that describe the same (model, gamma, estimator) triple:
/// replica-weighted mean of the unbounded estimates and the matching pooled
/// standard error; rows that are bounded pool to bounded only when every
/// duplicate is. Output is sorted by (model, gamma, estimator) and merging
/// is idempotent.
pub fn merge_spectrum_rows(rows: &[SpectrumRow]) -> Vec<SpectrumRow> {
    let mut groups: Vec<(Vec<&SpectrumRow>, &SpectrumRow)> = Vec::new();
    for row in rows {
        match groups.iter_mut().find(|(_, head)| {
            head.model == row.model
                && head.gamma.to_bits() == row.gamma.to_bits()
                && head.estimator == row.estimator
        }) {
            Some((members, _)) => members.push(row),
            None => groups.push((vec![row], row)),
        }
    }
    let mut merged: Vec<SpectrumRow> = groups
        .into_iter()
        .map(|(members, head)| {
            let total_replicas: u32 = members.iter().map(|r| r.replicas).sum();
            let live: Vec<&&SpectrumRow> =
                members.iter().filter(|r| r.dim_hat.is_some()).collect();
            let (dim_hat, stderr) = if live.is_empty() {
                (None, None)
            } else {
                let w_sum: f64 = live.iter().map(|r| r.replicas as f64).sum();
                let dim = live
                    .iter()
                    .map(|r| r.replicas as f64 * r.dim_hat.unwrap())
                    .sum::<f64>()
                    / w_sum;
                let se = if live.iter().all(|r| r.stderr.is_some()) {
                    let ss: f64 = live
                        .iter()
                        .map(|r| {
                            let w = r.replicas as f64;
                            let s = r.stderr.unwrap();
                            (w * s) * (w * s)
                        })
                        .sum();
                    Some(ss.sqrt() / w_sum)
                } else {
                    None
                };
                (Some(dim), se)
            };
            SpectrumRow {
                model: head.model.clone(),
                gamma: head.gamma,
                estimator: head.estimator,
                dim_hat,
                stderr,
                theory_lo: head.theory_lo,
                theory_hi: head.theory_hi,
                replicas: total_replicas,
            }
        })
        .collect();
    merged.sort_by(|a, b| {
        a.model
            .cmp(&b.model)
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.estimator.as_str().cmp(b.estimator.as_str()))
    });
    merged
}

/// Reconstruct a sweep result from table rows for one model (all rows must
/// share the model tag). The ambient dimension is inferred from the theory
/// band's small-gamma limit, which equals the ambient dimension for every
/// family.
pub fn result_from_rows(rows: &[SpectrumRow]) -> Result<SpectrumResult> {
    if rows.is_empty() {
        return Err(Error::input("cannot rebuild a spectrum from zero rows"));
    }
    let model = rows[0].model.clone();
    if rows.iter().any(|r| r.model != model) {
        return Err(Error::input("rebuild rows must all describe one model"));
    }
    let ambient_dim = rows
        .iter()
        .map(|r| r.theory_hi)
        .fold(0.0f64, f64::max)
        .ceil()
        .max(1.0) as usize;
    let mut gammas: Vec<f64> = rows.iter().map(|r| r.gamma).collect();
    gammas.sort_by(|a, b| a.total_cmp(b));
    gammas.dedup_by(|a, b| a.to_bits() == b.to_bits());
    let mut levels = Vec::with_capacity(gammas.len());
    for &gamma in &gammas {
        let find = |est: DimMethod| -> LevelEstimate {
            match rows
                .iter()
                .find(|r| r.gamma.to_bits() == gamma.to_bits() && r.estimator == est)
            {
                Some(r) => LevelEstimate {
                    dim_hat: r.dim_hat.unwrap_or(f64::NAN),
                    stderr: r.stderr.unwrap_or(f64::NAN),
                    bounded_fraction: if r.dim_hat.is_none() { 1.0 } else { 0.0 },
                    used_replicas: if r.dim_hat.is_none() { 0 } else { r.replicas },
                    bounded: r.dim_hat.is_none(),
                },
                None => LevelEstimate {
                    dim_hat: f64::NAN,
                    stderr: f64::NAN,
                    bounded_fraction: 1.0,
                    used_replicas: 0,
                    bounded: true,
                },
            }
        };
        let sample = rows
            .iter()
            .find(|r| r.gamma.to_bits() == gamma.to_bits())
            .expect("gamma came from rows");
        levels.push(GammaLevel {
            gamma,
            hausdorff: find(DimMethod::Hausdorff),
            minkowski: find(DimMethod::Minkowski),
            theory: TheoryValue {
                lo: sample.theory_lo,
                hi: sample.theory_hi,
                raw_lo: sample.theory_lo,
                raw_hi: sample.theory_hi,
                bounded: sample.theory_hi <= 0.0,
            },
            replicas: sample.replicas,
        });
    }
    let mut max_abs_delta = f64::NAN;
    for level in &levels {
        if level.hausdorff.bounded || level.theory.bounded {
            continue;
        }
        let delta = band_distance(level.hausdorff.dim_hat, level.theory.lo, level.theory.hi);
        if max_abs_delta.is_nan() || delta > max_abs_delta {
            max_abs_delta = delta;
        }
    }
    Ok(SpectrumResult {
        model_tag: model,
        ambient_dim,
        levels,
        max_abs_delta,
        warnings: Vec::new(),
    })
}

/// Multifractality verdict for one model's spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// At least two levels carry statistically separated dimensions.
    Multifractal,
    /// Every unbounded level's dimension is statistically equal to the
    /// ambient dimension.
    Monofractal,
    /// Too few levels, or overlapping levels below full dimension.
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Multifractal => "multifractal",
            Verdict::Monofractal => "monofractal",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// One line of a model section: the covering estimate for a level.
#[derive(Debug, Clone)]
pub struct ReportLine {
    pub gamma: f64,
    pub estimator: DimMethod,
    pub dim_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub theory_lo: f64,
    pub theory_hi: f64,
    /// Distance from the estimate to the theory band; `None` for bounded
    /// levels.
    pub abs_delta: Option<f64>,
    pub replicas: u32,
}

#[derive(Debug, Clone)]
pub struct ModelSection {
    pub model: String,
    pub ambient_dim: usize,
    pub lines: Vec<ReportLine>,
    pub verdict: Verdict,
    /// Largest band distance among unbounded covering lines.
    pub max_abs_delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub sections: Vec<ModelSection>,
}

/// Statistical separation: more than twice the combined standard error.
fn separated(a: (f64, f64), b: (f64, f64)) -> bool {
    let (da, sa) = a;
    let (db, sb) = b;
    (da - db).abs() > 2.0 * (sa * sa + sb * sb).sqrt()
}

fn section_verdict(lines: &[&ReportLine], d: f64) -> Verdict {
    let est: Vec<(f64, f64)> = lines
        .iter()
        .filter_map(|l| match (l.dim_hat, l.stderr) {
            (Some(v), Some(s)) => Some((v, s)),
            _ => None,
        })
        .collect();
    if est.len() < 2 {
        return Verdict::Indeterminate;
    }
    for i in 0..est.len() {
        for j in i + 1..est.len() {
            if separated(est[i], est[j]) {
                return Verdict::Multifractal;
            }
        }
    }
    if est.iter().all(|&(v, s)| (v - d).abs() <= 2.0 * s) {
        return Verdict::Monofractal;
    }
    Verdict::Indeterminate
}

/// Merge the given sweep results into per-model sections with verdicts.
/// Results sharing a model tag are pooled row-wise first.
pub fn compare_report(results: &[SpectrumResult]) -> Result<CompareReport> {
    if results.is_empty() {
        return Err(Error::input("comparison needs at least one spectrum"));
    }
    // Model tags in first-appearance order; rows pooled across duplicates.
    let mut order: Vec<String> = Vec::new();
    for r in results {
        if !order.contains(&r.model_tag) {
            order.push(r.model_tag.clone());
        }
    }
    let all_rows: Vec<SpectrumRow> = results.iter().flat_map(rows_from_result).collect();
    let merged = merge_spectrum_rows(&all_rows);

    let mut sections = Vec::with_capacity(order.len());
    for tag in order {
        let d = results
            .iter()
            .find(|r| r.model_tag == tag)
            .map(|r| r.ambient_dim)
            .expect("tag came from results");
        let rows: Vec<&SpectrumRow> = merged.iter().filter(|r| r.model == tag).collect();
        let lines: Vec<ReportLine> = rows
            .iter()
            .map(|r| ReportLine {
                gamma: r.gamma,
                estimator: r.estimator,
                dim_hat: r.dim_hat,
                stderr: r.stderr,
                theory_lo: r.theory_lo,
                theory_hi: r.theory_hi,
                abs_delta: r.dim_hat.map(|v| band_distance(v, r.theory_lo, r.theory_hi)),
                replicas: r.replicas,
            })
            .collect();
        let cover_lines: Vec<&ReportLine> =
            lines.iter().filter(|l| l.estimator == DimMethod::Hausdorff).collect();
        let verdict = section_verdict(&cover_lines, d as f64);
        let max_abs_delta = cover_lines
            .iter()
            .filter_map(|l| l.abs_delta)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
        sections.push(ModelSection {
            model: tag,
            ambient_dim: d,
            lines,
            verdict,
            max_abs_delta,
        });
    }
    Ok(CompareReport { sections })
}

impl CompareReport {
    /// Plain-text rendering: one table per model plus verdict summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            out.push_str(&format!("model: {} (ambient d = {})\n", s.model, s.ambient_dim));
            out.push_str(
                "  gamma   estimator   dim_hat  stderr   theory             |delta|  replicas\n",
            );
            for l in &s.lines {
                let dim = match l.dim_hat {
                    Some(v) => format!("{v:7.4}"),
                    None => "bounded".to_string(),
                };
                let se = match l.stderr {
                    Some(v) => format!("{v:6.4}"),
                    None => "    na".to_string(),
                };
                let theory = if l.theory_lo == l.theory_hi {
                    format!("{:16.4}", l.theory_lo)
                } else {
                    format!("[{:6.4}, {:6.4}]", l.theory_lo, l.theory_hi)
                };
                let delta = match l.abs_delta {
                    Some(v) => format!("{v:7.4}"),
                    None => "     na".to_string(),
                };
                out.push_str(&format!(
                    "  {:5.3}  {:>10}  {}  {}  {}  {}  {:8}\n",
                    l.gamma,
                    l.estimator.as_str(),
                    dim,
                    se,
                    theory,
                    delta,
                    l.replicas
                ));
            }
            let max_d = match s.max_abs_delta {
                Some(v) => format!("{v:.4}"),
                None => "na".to_string(),
            };
            out.push_str(&format!(
                "  verdict: {}   max |delta|: {}\n\n",
                s.verdict.as_str(),
                max_d
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::she1d::SchemeKind;

    fn level(gamma: f64, dim: f64, se: f64, theory: f64, reps: u32) -> GammaLevel {
        GammaLevel {
            gamma,
            hausdorff: LevelEstimate {
                dim_hat: dim,
                stderr: se,
                bounded_fraction: 0.0,
                used_replicas: reps,
                bounded: false,
            },
            minkowski: LevelEstimate {
                dim_hat: dim,
                stderr: se,
                bounded_fraction: 0.0,
                used_replicas: reps,
                bounded: false,
            },
            theory: TheoryValue {
                lo: theory,
                hi: theory,
                raw_lo: theory,
                raw_hi: theory,
                bounded: theory < 0.0,
            },
            replicas: reps,
        }
    }

    fn result(tag: &str, d: usize, levels: Vec<GammaLevel>) -> SpectrumResult {
        SpectrumResult {
            model_tag: tag.to_string(),
            ambient_dim: d,
            levels,
            max_abs_delta: f64::NAN,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn ou_sweep_recovers_the_quadratic_spectrum_coarsely() {
        let model = SweepModel::Ou { dt: 0.25 };
        let config = SweepConfig::new(3, 10, 8, 909);
        let result = spectrum_sweep(&model, &[0.8, 0.4], &config).unwrap();

        assert_eq!(result.model_tag, "ou");
        assert_eq!(result.ambient_dim, 1);
        // Levels come back sorted ascending regardless of request order.
        assert_eq!(result.levels.len(), 2);
        assert!(result.levels[0].gamma < result.levels[1].gamma);
        let lo = &result.levels[0];
        let hi = &result.levels[1];
        assert!((lo.theory.mid() - 0.84).abs() < 1e-12);
        assert!((hi.theory.mid() - 0.36).abs() < 1e-12);
        assert!(!lo.hausdorff.bounded && !hi.hausdorff.bounded);
        // Nested level sets force a non-increasing empirical spectrum, and
        // the gap between these two levels is far wider than the noise.
        assert!(
            lo.hausdorff.dim_hat > hi.hausdorff.dim_hat,
            "spectrum not decreasing: {} vs {}",
            lo.hausdorff.dim_hat,
            hi.hausdorff.dim_hat
        );
        for level in [lo, hi] {
            for est in [&level.hausdorff, &level.minkowski] {
                assert!(
                    band_distance(est.dim_hat, level.theory.lo, level.theory.hi) < 0.25,
                    "gamma {}: estimate {} far from theory {}",
                    level.gamma,
                    est.dim_hat,
                    level.theory.mid()
                );
            }
        }
        assert!(result.max_abs_delta < 0.25);
    }

    #[test]
    fn supercritical_levels_report_bounded_not_failure() {
        let model = SweepModel::Ou { dt: 0.25 };
        let config = SweepConfig::new(3, 10, 6, 515);
        let result = spectrum_sweep(&model, &[0.5, 1.8], &config).unwrap();
        let deep = &result.levels[1];
        assert!(deep.theory.bounded);
        assert!(deep.hausdorff.bounded, "gamma 1.8 should be bounded at this band");
        assert!(deep.hausdorff.dim_hat.is_nan());
        assert_eq!(deep.hausdorff.used_replicas, 0);
        assert!((deep.hausdorff.bounded_fraction - 1.0).abs() < 1e-12);
        assert!(!result.levels[0].hausdorff.bounded);
    }

    #[test]
    fn multiplicative_sweep_attaches_the_slope_band() {
        // The exponential scheme is linear-only, so a clipped profile runs
        // under the explicit update.
        let scheme = SchemeSpec {
            kind: SchemeKind::ExplicitEuler,
            dt: 0.125,
            dx: 0.5,
            sigma: SigmaSpec::ClippedLinear { lo: 0.8, hi: 1.2 },
        };
        let model = SweepModel::PamWhite { scheme, t_end: 1.0, x_max: 404.0 };
        let config = SweepConfig::new(3, 6, 4, 4242);
        let result = spectrum_sweep(&model, &[0.3], &config).unwrap();
        let level = &result.levels[0];
        assert!(level.theory.lo < level.theory.hi, "slope envelope should give a band");
        assert!(level.theory.is_band());
        assert_eq!(level.replicas, 4);
        if !level.hausdorff.bounded {
            assert!(level.hausdorff.dim_hat >= 0.0 && level.hausdorff.dim_hat <= 1.0);
        }
    }

    #[test]
    fn colored_sweep_runs_in_one_dimension() {
        let bump = BumpSpec { amplitude: 1.0, width: 1.0, truncation: 6.0 };
        let model = SweepModel::Colored {
            d: 1,
            bump,
            dt: 0.03125,
            dx: 0.25,
            extent: 1100.0,
            t_end: 0.5,
        };
        let config = SweepConfig::new(4, 7, 4, 77);
        let result = spectrum_sweep(&model, &[0.6], &config).unwrap();
        let level = &result.levels[0];
        let f0 = bump.f_zero_continuum(1);
        assert!((level.theory.mid() - (1.0 - 0.36 / (2.0 * f0))).abs() < 1e-12);
        assert!(!level.hausdorff.bounded, "moderate level should be unbounded here");
        assert!(level.hausdorff.dim_hat > 0.2 && level.hausdorff.dim_hat <= 1.0);
    }

    #[test]
    fn reindex_contrast_collapses_the_log_axis_dimension() {
        let c = bm_log_reindex_contrast(1.0, 3, 12, 0.25, 60601).unwrap();
        assert!(
            c.direct > 0.8,
            "direct-axis dimension should be near full, got {}",
            c.direct
        );
        assert!(
            c.reindexed < 0.2,
            "log-axis dimension should collapse, got {}",
            c.reindexed
        );
    }

    #[test]
    fn sweep_rejects_malformed_requests() {
        let ou = SweepModel::Ou { dt: 0.25 };
        let cfg = SweepConfig::new(3, 10, 4, 1);
        assert!(spectrum_sweep(&ou, &[], &cfg).is_err());
        assert!(spectrum_sweep(&ou, &[0.5, 0.5], &cfg).is_err());
        assert!(spectrum_sweep(&ou, &[0.5, -0.2], &cfg).is_err());
        assert!(spectrum_sweep(&SweepModel::Ou { dt: 2.0 }, &[0.5], &cfg).is_err());

        let mut bad = SweepConfig::new(3, 10, 0, 1);
        assert!(spectrum_sweep(&ou, &[0.5], &bad).is_err());
        bad = SweepConfig::new(3, 10, 4, 1);
        bad.trim = 0.5;
        assert!(spectrum_sweep(&ou, &[0.5], &bad).is_err());
        bad = SweepConfig::new(10, 3, 4, 1);
        assert!(spectrum_sweep(&ou, &[0.5], &bad).is_err());

        // Grid-solver domains must reach the top of the shell band.
        let scheme = SchemeSpec {
            kind: SchemeKind::ExpMultiplicative,
            dt: 0.125,
            dx: 0.5,
            sigma: SigmaSpec::Linear(1.0),
        };
        let short = SweepModel::PamWhite { scheme: scheme.clone(), t_end: 1.0, x_max: 100.0 };
        let err = spectrum_sweep(&short, &[0.3], &SweepConfig::new(3, 6, 2, 1));
        assert!(err.is_err());
        assert!(format!("{}", err.unwrap_err()).contains("does not reach"));

        // Custom noise profiles carry no closed-form overlay.
        let custom = SweepModel::PamWhite {
            scheme: SchemeSpec {
                kind: SchemeKind::ExpMultiplicative,
                dt: 0.125,
                dx: 0.5,
                sigma: SigmaSpec::Custom(vec![(0.0, 0.0), (1.0, 1.2)]),
            },
            t_end: 1.0,
            x_max: 404.0,
        };
        let err = spectrum_sweep(&custom, &[0.3], &SweepConfig::new(3, 6, 2, 1));
        assert!(format!("{}", err.unwrap_err()).contains("closed-form"));
    }

    #[test]
    fn csv_round_trip_preserves_rows() {
        let rows = vec![
            SpectrumRow {
                model: "ou".into(),
                gamma: 0.3,
                estimator: DimMethod::Hausdorff,
                dim_hat: Some(0.9123456789),
                stderr: Some(0.0123),
                theory_lo: 0.91,
                theory_hi: 0.91,
                replicas: 16,
            },
            SpectrumRow {
                model: "ou".into(),
                gamma: 1.5,
                estimator: DimMethod::Minkowski,
                dim_hat: None,
                stderr: None,
                theory_lo: 0.0,
                theory_hi: 0.0,
                replicas: 16,
            },
        ];
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(SPECTRUM_HEADER));
        assert!(text.contains("bounded"));
        let back = read_spectrum_csv(&mut std::io::Cursor::new(&buf), "mem").unwrap();
        assert_eq!(back, rows);

        let bad = "model,gamma,wrong\n";
        let err = read_spectrum_csv(&mut std::io::Cursor::new(bad.as_bytes()), "tampered.csv");
        assert!(format!("{}", err.unwrap_err()).contains("tampered.csv"));
    }

    #[test]
    fn merging_pools_replica_weighted_estimates() {
        let row = |dim: Option<f64>, se: Option<f64>, reps: u32| SpectrumRow {
            model: "ou".into(),
            gamma: 0.5,
            estimator: DimMethod::Hausdorff,
            dim_hat: dim,
            stderr: se,
            theory_lo: 0.75,
            theory_hi: 0.75,
            replicas: reps,
        };
        let merged =
            merge_spectrum_rows(&[row(Some(0.7), Some(0.1), 8), row(Some(0.9), Some(0.1), 8)]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].replicas, 16);
        assert!((merged[0].dim_hat.unwrap() - 0.8).abs() < 1e-12);
        let expect_se = (2.0f64 * (0.8 * 0.8)).sqrt() / 16.0;
        assert!((merged[0].stderr.unwrap() - expect_se).abs() < 1e-12);

        // All-bounded duplicates stay bounded; a live duplicate wins.
        let merged = merge_spectrum_rows(&[row(None, None, 8), row(None, None, 4)]);
        assert_eq!(merged[0].dim_hat, None);
        assert_eq!(merged[0].replicas, 12);
        let merged = merge_spectrum_rows(&[row(None, None, 8), row(Some(0.6), Some(0.2), 8)]);
        assert!((merged[0].dim_hat.unwrap() - 0.6).abs() < 1e-12);

        // Idempotence: merging a merged table changes nothing.
        let once =
            merge_spectrum_rows(&[row(Some(0.7), Some(0.1), 8), row(Some(0.9), Some(0.1), 8)]);
        assert_eq!(merge_spectrum_rows(&once), once);
    }

    #[test]
    fn verdicts_follow_statistical_separation() {
        // Separated levels: multifractal.
        let ou = result(
            "ou",
            1,
            vec![
                level(0.3, 0.90, 0.02, 0.91, 8),
                level(0.7, 0.50, 0.02, 0.51, 8),
            ],
        );
        let report = compare_report(&[ou.clone()]).unwrap();
        assert_eq!(report.sections[0].verdict, Verdict::Multifractal);

        // All levels at the ambient dimension: monofractal.
        let bm = result(
            "bm",
            1,
            vec![
                level(0.3, 0.99, 0.02, 1.0, 8),
                level(0.6, 1.00, 0.02, 1.0, 8),
                level(0.9, 0.98, 0.02, 1.0, 8),
            ],
        );
        let report = compare_report(&[bm.clone()]).unwrap();
        assert_eq!(report.sections[0].verdict, Verdict::Monofractal);

        // A single level cannot separate anything.
        let single = result("ou", 1, vec![level(0.5, 0.75, 0.02, 0.75, 8)]);
        let report = compare_report(&[single]).unwrap();
        assert_eq!(report.sections[0].verdict, Verdict::Indeterminate);

        // Overlapping levels well below full dimension: indeterminate.
        let vague = result(
            "ou",
            1,
            vec![
                level(0.5, 0.70, 0.15, 0.75, 4),
                level(0.7, 0.60, 0.15, 0.51, 4),
            ],
        );
        let report = compare_report(&[vague]).unwrap();
        assert_eq!(report.sections[0].verdict, Verdict::Indeterminate);

        // Mixed models produce one section each, in first-appearance order.
        let report = compare_report(&[ou, bm]).unwrap();
        assert_eq!(report.sections.len(), 2);
        assert_eq!(report.sections[0].model, "ou");
        assert_eq!(report.sections[1].model, "bm");
        let text = report.render_text();
        assert!(text.contains("multifractal"));
        assert!(text.contains("monofractal"));
        assert!(text.contains("model: bm"));

        assert!(compare_report(&[]).is_err());
    }

    #[test]
    fn rebuilt_results_preserve_the_table() {
        let ou = result(
            "ou",
            1,
            vec![
                level(0.3, 0.90, 0.02, 0.91, 8),
                level(0.7, 0.50, 0.02, 0.51, 8),
            ],
        );
        let rows = rows_from_result(&ou);
        assert_eq!(rows.len(), 4);
        let rebuilt = result_from_rows(&rows).unwrap();
        assert_eq!(rebuilt.model_tag, "ou");
        assert_eq!(rebuilt.ambient_dim, 1);
        assert_eq!(rebuilt.levels.len(), 2);
        assert!((rebuilt.levels[0].hausdorff.dim_hat - 0.90).abs() < 1e-12);
        assert!((rebuilt.levels[1].theory.mid() - 0.51).abs() < 1e-12);

        // Colored rows infer their plane from the theory band.
        let colored = result("colored", 2, vec![level(0.5, 1.9, 0.02, 1.95, 4)]);
        let rebuilt = result_from_rows(&rows_from_result(&colored)).unwrap();
        assert_eq!(rebuilt.ambient_dim, 2);

        let mut mixed = rows_from_result(&ou);
        mixed[0].model = "bm".into();
        assert!(result_from_rows(&mixed).is_err());
        assert!(result_from_rows(&[]).is_err());
    }
}
