//! Scalar diffusion simulators on uniform time grids: Brownian motion and the
//! stationary Ornstein-Uhlenbeck process. Both come in two flavours: a stored
//! grid (bounded by a hard value budget) and a streaming iterator with O(1)
//! memory for runs too long to materialize. The two flavours consume their
//! random stream in the same order, so the stream is a bitwise prefix-exact
//! replay of the stored simulation.

use crate::error::{Error, Result};
use crate::rng;
use rand_distr::{Distribution, StandardNormal};
use std::io::{BufRead, Write};

/// Hard cap on stored trajectory length (values, including the origin sample).
/// Longer runs must use the streaming simulators.
pub const TRAJ_VALUE_BUDGET: u64 = 1 << 26;

/// Cap on CSV emission, matching the cell-set writer's budget.
const CSV_VALUE_BUDGET: u64 = 20_000_000;

/// Which process produced a trajectory. The tag travels with the data so that
/// downstream consumers can pick matching gauges and abscissa conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajModel {
    BrownianMotion,
    OrnsteinUhlenbeck,
}

impl TrajModel {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajModel::BrownianMotion => "bm",
            TrajModel::OrnsteinUhlenbeck => "ou",
        }
    }

    pub fn parse_tag(tag: &str) -> Option<TrajModel> {
        match tag {
            "bm" => Some(TrajModel::BrownianMotion),
            "ou" => Some(TrajModel::OrnsteinUhlenbeck),
            _ => None,
        }
    }
}

/// A scalar path sampled at `t0 + k * dt` for `k = 0..values.len()`. The
/// origin sample is stored: Brownian motion begins with its pinned 0, the
/// Ornstein-Uhlenbeck process with its stationary initial draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryGrid {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
    model: TrajModel,
}

impl TrajectoryGrid {
    /// Assemble a grid from parts, validating the sampling contract: a
    /// positive finite step, a nonnegative finite start, at least two finite
    /// values.
    pub fn new(t0: f64, dt: f64, values: Vec<f64>, model: TrajModel) -> Result<TrajectoryGrid> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::input(format!("time step must be finite and positive, got {dt}")));
        }
        if !t0.is_finite() || t0 < 0.0 {
            return Err(Error::input(format!("start time must be finite and nonnegative, got {t0}")));
        }
        if values.len() < 2 {
            return Err(Error::input(format!(
                "a trajectory needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite sample {} at index {bad}",
                values[bad]
            )));
        }
        Ok(TrajectoryGrid { t0, dt, values, model })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn model(&self) -> TrajModel {
        self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires >= 2 samples
    }

    /// Sample time of index `k`.
    pub fn time(&self, k: usize) -> f64 {
        grid_time(self.t0, self.dt, k as u64)
    }

    /// Final sample time.
    pub fn t_end(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    /// Iterate `(time, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| (self.time(k), v))
    }

    /// Write as CSV: a `# model=<tag> t0=<t0> dt=<dt>` comment, a column
    /// header, then one `t,value` row per sample. Values print in shortest
    /// round-trip form, so a read-back reproduces the exact floats.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let n = self.values.len() as u64;
        if n > CSV_VALUE_BUDGET {
            return Err(Error::Resource {
                reason: "trajectory too long for CSV emission".into(),
                requested: n,
                budget: CSV_VALUE_BUDGET,
            });
        }
        writeln!(w, "# model={} t0={} dt={}", self.model.as_str(), self.t0, self.dt)?;
        writeln!(w, "t,value")?;
        for (t, v) in self.iter() {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }

    /// Read back a trajectory written by [`write_csv`](Self::write_csv).
    /// `path_label` names the source in error messages.
    pub fn read_csv<R: BufRead>(r: &mut R, path_label: &str) -> Result<TrajectoryGrid> {
        let bad = |detail: String| Error::Format {
            path: path_label.to_string(),
            detail,
        };
        let mut lines = r.lines();
        let meta = lines
            .next()
            .transpose()?
            .ok_or_else(|| bad("empty file".into()))?;
        let meta = meta
            .strip_prefix('#')
            .ok_or_else(|| bad("missing `# model=... t0=... dt=...` comment".into()))?;
        let (mut model, mut t0, mut dt) = (None, None, None);
        for tok in meta.split_whitespace() {
            match tok.split_once('=') {
                Some(("model", v)) => {
                    model = Some(TrajModel::parse_tag(v).ok_or_else(|| {
                        bad(format!("unknown model tag `{v}`"))
                    })?);
                }
                Some(("t0", v)) => {
                    t0 = Some(v.parse::<f64>().map_err(|_| bad(format!("bad t0 `{v}`")))?);
                }
                Some(("dt", v)) => {
                    dt = Some(v.parse::<f64>().map_err(|_| bad(format!("bad dt `{v}`")))?);
                }
                _ => return Err(bad(format!("unrecognized metadata token `{tok}`"))),
            }
        }
        let model = model.ok_or_else(|| bad("metadata missing `model=`".into()))?;
        let t0 = t0.ok_or_else(|| bad("metadata missing `t0=`".into()))?;
        let dt = dt.ok_or_else(|| bad("metadata missing `dt=`".into()))?;
        match lines.next().transpose()?.as_deref() {
            Some("t,value") => {}
            other => {
                return Err(bad(format!("expected header `t,value`, got {other:?}")));
            }
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (ts, vs) = line
                .split_once(',')
                .ok_or_else(|| bad(format!("row {i} is not `t,value`: `{line}`")))?;
            let t: f64 = ts.parse().map_err(|_| bad(format!("row {i}: bad time `{ts}`")))?;
            let v: f64 = vs.parse().map_err(|_| bad(format!("row {i}: bad value `{vs}`")))?;
            let expect = grid_time(t0, dt, values.len() as u64);
            if (t - expect).abs() > 1e-9 * expect.abs().max(1.0) {
                return Err(bad(format!(
                    "row {i}: time {t} does not sit on the declared grid (expected {expect})"
                )));
            }
            values.push(v);
        }
        TrajectoryGrid::new(t0, dt, values, model)
    }
}

fn grid_time(t0: f64, dt: f64, k: u64) -> f64 {
    (k as f64).mul_add(dt, t0)
}

/// Validate `(t_max, dt)` and return the number of steps beyond the origin.
/// The ratio gets a tiny forgiveness nudge so decimal steps that are not
/// exactly representable (0.1, 0.2, ...) still land the intended count.
fn step_count(t_max: f64, dt: f64) -> Result<u64> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::input(format!("time step must be finite and positive, got {dt}")));
    }
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::input(format!("horizon must be finite and positive, got {t_max}")));
    }
    let steps = (t_max / dt + 1e-9).floor();
    if steps < 1.0 {
        return Err(Error::input(format!(
            "horizon {t_max} is shorter than one step {dt}; nothing to sample"
        )));
    }
    Ok(steps as u64)
}

fn check_budget(steps: u64) -> Result<()> {
    let requested = steps.saturating_add(1);
    if requested > TRAJ_VALUE_BUDGET {
        return Err(Error::Resource {
            reason: "stored trajectory would exceed the value budget; use the streaming simulator"
                .into(),
            requested,
            budget: TRAJ_VALUE_BUDGET,
        });
    }
    Ok(())
}

/// Standard Brownian motion on `{0, dt, 2 dt, ...} up to t_max`, pinned to 0
/// at the origin, with independent `N(0, dt)` increments. Runs needing more
/// than [`TRAJ_VALUE_BUDGET`] samples are refused.
pub fn simulate_bm(t_max: f64, dt: f64, seed: u64) -> Result<TrajectoryGrid> {
    let steps = step_count(t_max, dt)?;
    check_budget(steps)?;
    let values: Vec<f64> = stream_bm(t_max, dt, seed)?.map(|(_, v)| v).collect();
    TrajectoryGrid::new(0.0, dt, values, TrajModel::BrownianMotion)
}

/// Streaming Brownian motion: yields `(time, value)` with O(1) memory and no
/// length budget, consuming the random stream in the same order as
/// [`simulate_bm`], so the stored run is a prefix-exact replay.
pub fn stream_bm(t_max: f64, dt: f64, seed: u64) -> Result<impl Iterator<Item = (f64, f64)>> {
    let steps = step_count(t_max, dt)?;
    let mut rng = rng::stream(seed, "bm", 0);
    let sqrt_dt = dt.sqrt();
    let mut value = 0.0f64;
    let mut k: u64 = 0;
    Ok(std::iter::from_fn(move || {
        if k > steps {
            return None;
        }
        if k > 0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            value += sqrt_dt * z;
        }
        let out = (grid_time(0.0, dt, k), value);
        k += 1;
        Some(out)
    }))
}

/// Stationary Ornstein-Uhlenbeck process (mean 0, variance 1, correlation
/// `e^{-|s|/2}`) via its exact one-step recursion
/// `U_{k+1} = e^{-dt/2} U_k + sqrt(1 - e^{-dt}) Z_k`, started from a
/// stationary `N(0,1)` draw. Exact at any step size: no discretization bias.
pub fn simulate_ou(t_max: f64, dt: f64, seed: u64) -> Result<TrajectoryGrid> {
    let steps = step_count(t_max, dt)?;
    check_budget(steps)?;
    let values: Vec<f64> = stream_ou(t_max, dt, seed)?.map(|(_, v)| v).collect();
    TrajectoryGrid::new(0.0, dt, values, TrajModel::OrnsteinUhlenbeck)
}

/// Streaming Ornstein-Uhlenbeck: same recursion and stream order as
/// [`simulate_ou`], O(1) memory, no length budget.
pub fn stream_ou(t_max: f64, dt: f64, seed: u64) -> Result<impl Iterator<Item = (f64, f64)>> {
    let steps = step_count(t_max, dt)?;
    let mut rng = rng::stream(seed, "ou", 0);
    let decay = (-dt / 2.0).exp();
    let kick = (1.0 - (-dt).exp()).sqrt();
    let mut value = 0.0f64;
    let mut k: u64 = 0;
    Ok(std::iter::from_fn(move || {
        if k > steps {
            return None;
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        value = if k == 0 { z } else { decay * value + kick * z };
        let out = (grid_time(0.0, dt, k), value);
        k += 1;
        Some(out)
    }))
}
