//! Moment and Lyapunov estimation for the simulated fields, intermittency
//! verdicts, tail-exponent fits, and an independent Monte Carlo oracle for
//! the moments of the spatially-correlated multiplicative equation based on
//! interacting Brownian paths.

use crate::colored::{bump_autocovariance, solve_pam_colored};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linear_she::sample_linear_she;
use crate::noise::{BumpSpec, NoiseSpec};
use crate::rng;
use crate::she1d::{solve_she_1d, SchemeSpec};
use crate::stats;
use rand_distr::{Distribution, StandardNormal};
use std::io::Write;

/// Largest moment order the lab will estimate: Monte Carlo means of the
/// multiplicative equation beyond k = 6 are dominated by unobserved rare
/// replicas at any desk-scale replica count.
pub const MAX_MOMENT_ORDER: f64 = 6.0;

/// Minimum replica count; below this, heavy-tailed moment estimates are
/// meaningless even with the dominance warning.
pub const MIN_REPLICAS: u64 = 100;

/// Fits discard the initial transient induced by the flat initial data.
pub const TRANSIENT_CUTOFF: f64 = 0.2;

/// Minimum sample count for tail fits.
pub const TAIL_MIN_SAMPLES: usize = 100_000;

const TAIL_GRID: usize = 20;
const ORACLE_BUDGET: u64 = 1 << 31;

/// Where the moment is read off each snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    /// One fixed interior lattice site (the contract's default reading).
    CenterPoint,
    /// Average of |u|^k over the whole periodic lattice. Unbiased for the
    /// same quantity by stationarity, with far smaller replica variance;
    /// used where single-site Monte Carlo would drown in moment noise.
    SpatialMean,
}

/// Model configurations the moment lab can drive.
#[derive(Debug, Clone)]
pub enum MomentModel {
    /// Multiplicative one-dimensional equation driven by white noise.
    She1d { scheme: SchemeSpec, x_max: f64, probe: ProbeKind },
    /// Additive-noise heat equation (stationary Gaussian field per time).
    LinearShe { x_max: f64, dx: f64, probe: ProbeKind },
    /// Multiplicative equation with spatially correlated noise.
    Colored { d: usize, bump: BumpSpec, dt: f64, dx: f64, extent: f64, probe: ProbeKind },
}

impl MomentModel {
    pub fn tag(&self) -> &'static str {
        match self {
            MomentModel::She1d { .. } => "she1d",
            MomentModel::LinearShe { .. } => "linear_she",
            MomentModel::Colored { .. } => "pam_colored",
        }
    }

    fn probe(&self) -> ProbeKind {
        match self {
            MomentModel::She1d { probe, .. }
            | MomentModel::LinearShe { probe, .. }
            | MomentModel::Colored { probe, .. } => *probe,
        }
    }
}

/// One estimated moment E|u_t(x0)|^k with a 95% half-width from replica
/// variance. `dominated` flags estimates whose top 1% of replicas carries
/// more than half the mean: the reported value is then a lower bound in
/// practice, not a converged average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub k: f64,
    pub t: f64,
    pub estimate: f64,
    pub half_width: f64,
    pub replicas: u64,
    pub dominated: bool,
}

/// True when the largest 1% of the samples contributes more than half of
/// the total sum.
pub(crate) fn dominance(xs: &[f64]) -> bool {
    let total: f64 = xs.iter().sum();
    if !(total > 0.0) {
        return false;
    }
    let m = (xs.len() / 100).max(1);
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top: f64 = sorted[..m].iter().sum();
    top > 0.5 * total
}

fn center_value(field: &Field) -> f64 {
    field.value(field.nx() / 2, field.ny() / 2)
}

/// Estimate E|u_t|^k over an independent replica ensemble for every (k, t)
/// pair. Replica r uses the derived stream r of the master seed; snapshot
/// times must lie on the scheme's time grid.
pub fn moment_ensemble(
    model: &MomentModel,
    ks: &[f64],
    ts: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    if ks.is_empty() || ts.is_empty() {
        return Err(Error::input("moment orders and times must both be nonempty"));
    }
    for &k in ks {
        if !k.is_finite() || k < 1.0 {
            return Err(Error::input(format!("moment order must be >= 1, got {k}")));
        }
        if k > MAX_MOMENT_ORDER {
            return Err(Error::input(format!(
                "moment order {k} refused: beyond k = {MAX_MOMENT_ORDER} the ensemble mean is \
                 dominated by replicas too rare to sample at desk scale"
            )));
        }
    }
    for w in ts.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::input("moment times must be strictly increasing"));
        }
    }
    if !(ts[0].is_finite() && ts[0] > 0.0) {
        return Err(Error::input(format!("moment times must be positive, got {}", ts[0])));
    }
    if replicas < MIN_REPLICAS {
        return Err(Error::input(format!(
            "at least {MIN_REPLICAS} replicas are required for heavy-tailed moment estimates, \
             got {replicas}"
        )));
    }
    let t_end = *ts.last().unwrap();
    let probe = model.probe();
    let mut samples: Vec<Vec<Vec<f64>>> =
        vec![vec![Vec::with_capacity(replicas as usize); ts.len()]; ks.len()];
    for r in 0..replicas {
        let fields: Vec<Field> = match model {
            MomentModel::She1d { scheme, x_max, .. } => {
                solve_she_1d(scheme, &NoiseSpec::white(seed).with_stream(r), t_end, *x_max, None, ts)?
                    .snapshots
            }
            MomentModel::Colored { d, bump, dt, dx, extent, .. } => {
                solve_pam_colored(
                    *d,
                    &NoiseSpec::colored(*bump, seed).with_stream(r),
                    *dt,
                    *dx,
                    t_end,
                    *extent,
                    None,
                    ts,
                )?
                .snapshots
            }
            MomentModel::LinearShe { x_max, dx, .. } => {
                // Moments need no pathwise coupling across times, so each
                // (replica, time) pair draws an independent stationary field.
                let mut fields = Vec::with_capacity(ts.len());
                for (ti, &t) in ts.iter().enumerate() {
                    let sub_seed = seed
                        .wrapping_add(r.wrapping_mul(ts.len() as u64))
                        .wrapping_add(ti as u64);
                    fields.push(sample_linear_she(t, *x_max, *dx, sub_seed)?);
                }
                fields
            }
        };
        for (ti, field) in fields.iter().enumerate() {
            for (ki, &k) in ks.iter().enumerate() {
                let s = match probe {
                    ProbeKind::CenterPoint => center_value(field).abs().powf(k),
                    ProbeKind::SpatialMean => {
                        let vs = field.values();
                        vs.iter().map(|v| v.abs().powf(k)).sum::<f64>() / vs.len() as f64
                    }
                };
                samples[ki][ti].push(s);
            }
        }
    }
    let mut out = Vec::with_capacity(ks.len() * ts.len());
    for (ki, &k) in ks.iter().enumerate() {
        for (ti, &t) in ts.iter().enumerate() {
            let xs = &samples[ki][ti];
            let m = stats::mean(xs);
            let sd = stats::variance(xs).sqrt();
            out.push(MomentEstimate {
                k,
                t,
                estimate: m,
                half_width: 1.96 * sd / (xs.len() as f64).sqrt(),
                replicas,
                dominated: dominance(xs),
            });
        }
    }
    Ok(out)
}

/// Least-squares growth rate of one log-moment in time.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovFit {
    pub k: f64,
    /// Fitted exponential growth rate of E|u_t|^k.
    pub slope: f64,
    pub stderr: f64,
    pub t_grid: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Any contributing moment estimate carried a dominance warning.
    pub dominated: bool,
}

/// Fit the growth rate of log E|u_t|^k over the post-transient part of a
/// moment table (t >= 0.2, at least four points).
pub fn lyapunov_fit(table: &[MomentEstimate], k: f64) -> Result<LyapunovFit> {
    let rows: Vec<&MomentEstimate> = table
        .iter()
        .filter(|m| m.k == k && m.t >= TRANSIENT_CUTOFF - 1e-12)
        .collect();
    if rows.len() < 4 {
        return Err(Error::insufficient(format!(
            "growth-rate fit for k = {k} needs at least 4 time points at or past the transient \
             cutoff {TRANSIENT_CUTOFF}, found {}",
            rows.len()
        )));
    }
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for m in &rows {
        if !(m.estimate > 0.0) {
            return Err(Error::domain(format!(
                "moment estimate {} at t = {} is not positive; cannot fit its logarithm",
                m.estimate, m.t
            )));
        }
        xs.push(m.t);
        ys.push(m.estimate.ln());
    }
    let fit = stats::ols_line(&xs, &ys)
        .ok_or_else(|| Error::insufficient("degenerate time grid in growth-rate fit"))?;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(&t, &y)| y - (fit.intercept + fit.slope * t))
        .collect();
    Ok(LyapunovFit {
        k,
        slope: fit.slope,
        stderr: fit.slope_stderr,
        t_grid: xs,
        residuals,
        dominated: rows.iter().any(|m| m.dominated),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntermittencyVerdict {
    /// Every normalized gap exceeds its combined standard error.
    Intermittent,
    /// Some gap is significantly negative: growth rates are decisively not
    /// increasing per order.
    Flat,
    /// Error bars overlap somewhere; the data cannot separate the ratios.
    Indeterminate,
}

#[derive(Debug, Clone)]
pub struct IntermittencyReport {
    pub verdict: IntermittencyVerdict,
    /// (k, slope/k, stderr/k) sorted by k.
    pub ratios: Vec<(f64, f64, f64)>,
}

impl IntermittencyReport {
    pub fn is_intermittent(&self) -> bool {
        self.verdict == IntermittencyVerdict::Intermittent
    }
}

/// Decide whether the normalized growth rates slope(k)/k increase strictly
/// in k, beyond combined standard errors.
pub fn intermittency_check(fits: &[LyapunovFit]) -> Result<IntermittencyReport> {
    if fits.len() < 2 {
        return Err(Error::input("the intermittency check needs at least two moment orders"));
    }
    let mut ratios: Vec<(f64, f64, f64)> = fits
        .iter()
        .map(|f| {
            let se = if f.stderr.is_finite() { f.stderr / f.k } else { 0.0 };
            (f.k, f.slope / f.k, se)
        })
        .collect();
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
    if ratios.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::input("duplicate moment order in intermittency check"));
    }
    let mut all_separated = true;
    let mut any_significant_drop = false;
    for w in ratios.windows(2) {
        let gap = w[1].1 - w[0].1;
        let combined = w[0].2 + w[1].2;
        if gap <= combined {
            all_separated = false;
        }
        if gap < -combined {
            any_significant_drop = true;
        }
    }
    let verdict = if all_separated {
        IntermittencyVerdict::Intermittent
    } else if any_significant_drop {
        IntermittencyVerdict::Flat
    } else {
        IntermittencyVerdict::Indeterminate
    };
    Ok(IntermittencyReport { verdict, ratios })
}

/// Spatial covariance of the driving noise, as a function of the offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovarianceSpec {
    Zero,
    Constant(f64),
    /// Autocorrelation of a Gaussian bump kernel (closed form; the kernel
    /// truncation used by the solver changes it below 1e-14 of the peak).
    Bump(BumpSpec),
}

impl CovarianceSpec {
    fn validate(&self) -> Result<()> {
        match self {
            CovarianceSpec::Zero => Ok(()),
            CovarianceSpec::Constant(c) => {
                if c.is_finite() && *c >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::input(format!(
                        "a constant covariance must be finite and nonnegative, got {c}"
                    )))
                }
            }
            CovarianceSpec::Bump(b) => b.validate(),
        }
    }

    pub fn eval(&self, d: usize, r: f64) -> f64 {
        match self {
            CovarianceSpec::Zero => 0.0,
            CovarianceSpec::Constant(c) => *c,
            CovarianceSpec::Bump(b) => bump_autocovariance(b, d, r),
        }
    }

    pub fn f_zero(&self, d: usize) -> f64 {
        self.eval(d, 0.0)
    }
}

/// Trapezoidal time integral of the summed pairwise covariance along a set
/// of discrete paths. Pair contributions are sorted before summation, so
/// the value is exactly invariant under relabeling of the paths.
pub(crate) fn interaction_integral(
    paths: &[Vec<f64>],
    d: usize,
    ds: f64,
    steps: usize,
    f: &CovarianceSpec,
) -> f64 {
    let k = paths.len();
    let mut pair_vals: Vec<f64> = Vec::with_capacity(k * (k - 1) / 2);
    let mut total = 0.0;
    for m in 0..=steps {
        pair_vals.clear();
        for i in 0..k {
            for j in (i + 1)..k {
                let mut r2 = 0.0;
                for dim in 0..d {
                    let diff = paths[i][m * d + dim] - paths[j][m * d + dim];
                    r2 += diff * diff;
                }
                pair_vals.push(f.eval(d, r2.sqrt()));
            }
        }
        pair_vals.sort_by(f64::total_cmp);
        let s: f64 = pair_vals.iter().sum();
        let w = if m == 0 || m == steps { 0.5 } else { 1.0 };
        total += w * s;
    }
    total * ds
}

/// Monte Carlo oracle for the k-th moment of the spatially-correlated
/// multiplicative equation: the expectation of
/// exp(sum over unordered path pairs of the integrated covariance of their
/// separation), over k independent d-dimensional Brownian paths. Constant
/// covariances short-circuit to the closed form exp(k(k-1) f(0) t / 2).
pub fn feynman_kac_oracle(
    k: u32,
    d: usize,
    t: f64,
    f: &CovarianceSpec,
    n_paths: u64,
    ds: f64,
    seed: u64,
) -> Result<MomentEstimate> {
    if k < 2 {
        return Err(Error::input(format!("the path oracle needs an integer moment order >= 2, got {k}")));
    }
    if d != 1 && d != 2 {
        return Err(Error::input(format!("path dimension must be 1 or 2, got {d}")));
    }
    f.validate()?;
    if !(t.is_finite() && t > 0.0) || !(ds.is_finite() && ds > 0.0) {
        return Err(Error::input(format!("horizon {t} and quadrature step {ds} must be positive")));
    }
    let steps_f = (t / ds).round();
    if steps_f < 1.0 || (steps_f * ds - t).abs() > 1e-9 * t {
        return Err(Error::input(format!(
            "horizon {t} must be a whole number of quadrature steps {ds}"
        )));
    }
    let steps = steps_f as usize;
    if n_paths == 0 {
        return Err(Error::input("at least one path replica is required"));
    }
    let quad_t = steps as f64 * ds;
    match f {
        CovarianceSpec::Zero | CovarianceSpec::Constant(_) => {
            // The integrand is deterministic: every replica carries the same
            // weight, so the closed form is exact to quadrature precision.
            let f0 = f.f_zero(d);
            let estimate = (0.5 * k as f64 * (k as f64 - 1.0) * f0 * quad_t).exp();
            return Ok(MomentEstimate {
                k: k as f64,
                t: quad_t,
                estimate,
                half_width: 0.0,
                replicas: n_paths,
                dominated: false,
            });
        }
        CovarianceSpec::Bump(_) => {}
    }
    let cost = (k as u64)
        .saturating_mul(d as u64)
        .saturating_mul(steps as u64)
        .saturating_mul(n_paths);
    if cost > ORACLE_BUDGET {
        return Err(Error::Resource {
            reason: "path-ensemble quadrature too large; reduce paths, order, or steps".into(),
            requested: cost,
            budget: ORACLE_BUDGET,
        });
    }
    let sqrt_ds = ds.sqrt();
    let mut weights = Vec::with_capacity(n_paths as usize);
    for r in 0..n_paths {
        let mut rng = rng::stream(seed, "feynman_kac", r);
        // Paths are generated path-major so that relabeling them permutes
        // whole trajectories; combined with sorted pair sums this makes the
        // estimate exactly label-invariant.
        let mut paths: Vec<Vec<f64>> = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let mut p = vec![0.0f64; (steps + 1) * d];
            for m in 1..=steps {
                for dim in 0..d {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    p[m * d + dim] = p[(m - 1) * d + dim] + sqrt_ds * z;
                }
            }
            paths.push(p);
        }
        weights.push(interaction_integral(&paths, d, ds, steps, f).exp());
    }
    let m = stats::mean(&weights);
    let sd = stats::variance(&weights).sqrt();
    Ok(MomentEstimate {
        k: k as f64,
        t: quad_t,
        estimate: m,
        half_width: 1.96 * sd / (weights.len() as f64).sqrt(),
        replicas: n_paths,
        dominated: dominance(&weights),
    })
}

/// Exponent mode for tail fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailMode {
    Fixed(f64),
    Free,
}

/// Fitted tail law -log P{X > z} ~ c * z^b over [z_lo, z_hi].
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub b: f64,
    pub b_free: bool,
    pub c_hat: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub warnings: Vec<String>,
}

/// Weighted least squares of y on the design [1, x1, x2]; returns the
/// (x1, x2, intercept) coefficients and the weighted residual sum.
fn weighted_plane(
    x1: &[f64],
    x2: &[f64],
    ys: &[f64],
    ws: &[f64],
) -> Option<(f64, f64, f64, f64)> {
    let n = ys.len();
    // Normal equations for the 3-parameter design, accumulated directly.
    let mut m = [[0.0f64; 3]; 3];
    let mut v = [0.0f64; 3];
    for i in 0..n {
        let row = [1.0, x1[i], x2[i]];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += ws[i] * row[a] * row[b];
            }
            v[a] += ws[i] * row[a] * ys[i];
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut aug = [[0.0f64; 4]; 3];
    for a in 0..3 {
        aug[a][..3].copy_from_slice(&m[a]);
        aug[a][3] = v[a];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))?;
        aug.swap(col, piv);
        let lead = aug[col][col];
        if lead.abs() < 1e-12 * m[col][col].abs().max(1.0) {
            return None;
        }
        for r in 0..3 {
            if r != col {
                let factor = aug[r][col] / lead;
                for c in col..4 {
                    aug[r][c] -= factor * aug[col][c];
                }
            }
        }
    }
    let a0 = aug[0][3] / aug[0][0];
    let c1 = aug[1][3] / aug[1][1];
    let c2 = aug[2][3] / aug[2][2];
    let sse: f64 = (0..n)
        .map(|i| {
            let r = ys[i] - (a0 + c1 * x1[i] + c2 * x2[i]);
            ws[i] * r * r
        })
        .sum();
    Some((c1, c2, a0, sse))
}

/// Fit the tail of a sample set against c * z^b on logarithmically spaced
/// levels, weighting each level by the binomial variance of its empirical
/// exceedance probability. The regression carries a free intercept and a
/// log z nuisance term that absorb the polynomial prefactor every
/// exponential tail has, so a Gaussian tail fits c = 1/2 (fixed b = 2) and
/// b = 2 (free) instead of the prefactor-biased values. With `b` free the
/// exponent minimizes the weighted residual over the exponent family.
pub fn tail_exponent_fit(
    samples: &[f64],
    mode: TailMode,
    z_lo: f64,
    z_hi: f64,
) -> Result<TailFit> {
    let n = samples.len();
    if n < TAIL_MIN_SAMPLES {
        return Err(Error::insufficient(format!(
            "tail fits need at least {TAIL_MIN_SAMPLES} samples, got {n}"
        )));
    }
    if !(z_lo.is_finite() && z_lo > 0.0 && z_hi.is_finite() && z_hi > z_lo) {
        return Err(Error::input(format!(
            "tail range must satisfy 0 < z_lo < z_hi, got [{z_lo}, {z_hi}]"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("tail samples must all be finite"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let log_lo = z_lo.ln();
    let lstep = (z_hi.ln() - log_lo) / (TAIL_GRID - 1) as f64;
    let mut zs = Vec::new();
    let mut ps = Vec::new();
    let mut warnings = Vec::new();
    let mut shrunk = false;
    for i in 0..TAIL_GRID {
        let z = (log_lo + i as f64 * lstep).exp();
        let idx = sorted.partition_point(|s| *s <= z);
        let count = n - idx;
        if count < 10 {
            shrunk = true;
            continue;
        }
        if count == n {
            // No mass below z: the exceedance probability is 1 and carries
            // no information.
            continue;
        }
        zs.push(z);
        ps.push(count as f64 / nf);
    }
    if shrunk {
        let top = zs.last().copied().unwrap_or(z_lo);
        warnings.push(format!(
            "fewer than 10 exceedances near z = {z_hi}; fit range shrunk to top z = {top}"
        ));
    }
    if zs.len() < 4 {
        return Err(Error::insufficient(format!(
            "only {} resolvable tail levels in [{z_lo}, {z_hi}]; widen the range or add samples",
            zs.len()
        )));
    }
    let ys: Vec<f64> = ps.iter().map(|p| -p.ln()).collect();
    // Var(-log p_hat) ~ (1 - p) / (n p); weights are the inverse.
    let ws: Vec<f64> = ps.iter().map(|p| nf * p / (1.0 - p)).collect();
    let lnz: Vec<f64> = zs.iter().map(|z| z.ln()).collect();
    let fit_at = |b: f64| -> Option<(f64, f64)> {
        let xs: Vec<f64> = zs.iter().map(|z| z.powf(b)).collect();
        let (c, _, _, sse) = weighted_plane(&xs, &lnz, &ys, &ws)?;
        Some((c, sse))
    };
    let (b_used, slope, free) = match mode {
        TailMode::Fixed(b) => {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::input(format!("fixed tail exponent must be positive, got {b}")));
            }
            let (slope, _) =
                fit_at(b).ok_or_else(|| Error::insufficient("degenerate tail regression"))?;
            (b, slope, false)
        }
        TailMode::Free => {
            // Two-pass grid search over the exponent family. Below b = 0.5
            // the power regressor collapses into the intercept/log pair, so
            // the scan starts there.
            let mut best = (f64::NAN, f64::INFINITY);
            let mut best_b = f64::NAN;
            let scan = |lo: f64, hi: f64, step: f64, best: &mut (f64, f64), best_b: &mut f64| {
                let mut b = lo;
                while b <= hi + 1e-12 {
                    if let Some(r) = fit_at(b) {
                        if r.1 < best.1 {
                            *best = r;
                            *best_b = b;
                        }
                    }
                    b += step;
                }
            };
            scan(0.5, 5.0, 0.05, &mut best, &mut best_b);
            if !best_b.is_finite() {
                return Err(Error::insufficient("degenerate tail regression"));
            }
            let center = best_b;
            scan((center - 0.05).max(0.5), center + 0.05, 0.005, &mut best, &mut best_b);
            (best_b, best.0, true)
        }
    };
    let mut c_hat = slope;
    if c_hat < 0.0 {
        warnings.push(format!("fitted tail coefficient {c_hat:.4} is negative; clamped to 0"));
        c_hat = 0.0;
    }
    Ok(TailFit {
        b: b_used,
        b_free: free,
        c_hat,
        z_lo: zs[0],
        z_hi: *zs.last().unwrap(),
        warnings,
    })
}

/// moments.csv writer: one row per estimate.
pub fn write_moments_csv<W: Write>(w: &mut W, model: &str, rows: &[MomentEstimate]) -> Result<()> {
    writeln!(w, "model,k,t,estimate,half_width,replicas,dominance_flag")?;
    for m in rows {
        writeln!(
            w,
            "{model},{},{},{},{},{},{}",
            m.k, m.t, m.estimate, m.half_width, m.replicas, m.dominated as u8
        )?;
    }
    Ok(())
}

/// tails.csv writer: one row per fit.
pub fn write_tails_csv<W: Write>(w: &mut W, model: &str, fits: &[TailFit]) -> Result<()> {
    writeln!(w, "model,b_mode,b_hat,c_hat,z_lo,z_hi")?;
    for f in fits {
        writeln!(
            w,
            "{model},{},{},{},{},{}",
            if f.b_free { "free" } else { "fixed" },
            f.b,
            f.c_hat,
            f.z_lo,
            f.z_hi
        )?;
    }
    Ok(())
}
