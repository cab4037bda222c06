//! Gauge functions and extraction of pixelized tall-peak sets from
//! trajectories and fields: a unit cell is occupied when some sample inside
//! it rises above `gamma` times the gauge evaluated at the sample's
//! abscissa. Exceedance is one-sided (value >= threshold); negative peaks
//! are out of scope.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::rng;
use crate::shell::{Ambient, PixelSet};
use crate::traj::{TrajModel, TrajectoryGrid};
use rand::RngExt;

/// Growth-envelope shapes. Each is increasing and unbounded on its domain;
/// the start abscissa keeps the inner logarithm(s) at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    /// sqrt(2 x log log x): the iterated-logarithm envelope of Brownian
    /// motion.
    BmLil,
    /// sqrt(2 log x): stationary Gaussian running-maximum envelope.
    SqrtLog,
    /// (log x)^{2/3}: the peak scale of the white-noise multiplicative
    /// equation's log-field.
    LogTwoThirds,
    /// sqrt(log x): the peak scale of the spatially smoothed multiplicative
    /// equation's log-field.
    SqrtLogColored,
}

impl GaugeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GaugeKind::BmLil => "bm_lil",
            GaugeKind::SqrtLog => "sqrt_log",
            GaugeKind::LogTwoThirds => "log_two_thirds",
            GaugeKind::SqrtLogColored => "sqrt_log_colored",
        }
    }

    pub fn parse_tag(tag: &str) -> Result<GaugeKind> {
        match tag {
            "bm_lil" => Ok(GaugeKind::BmLil),
            "sqrt_log" => Ok(GaugeKind::SqrtLog),
            "log_two_thirds" => Ok(GaugeKind::LogTwoThirds),
            "sqrt_log_colored" => Ok(GaugeKind::SqrtLogColored),
            other => Err(Error::input(format!("unknown gauge kind {other:?}"))),
        }
    }

    /// Smallest admissible start abscissa: e^e where a log log appears,
    /// e where a single log does.
    pub fn min_start(&self) -> f64 {
        match self {
            GaugeKind::BmLil => E_TO_E,
            _ => std::f64::consts::E,
        }
    }

    /// Conventional start abscissa: e^e for Brownian and field gauges,
    /// e for the stationary-process gauge.
    pub fn default_start(&self) -> f64 {
        match self {
            GaugeKind::SqrtLog => std::f64::consts::E,
            _ => E_TO_E,
        }
    }
}

/// e^e, the abscissa where log log reaches 1.
pub const E_TO_E: f64 = 15.154262241479262;

/// A normalized gauge: `normalization * shape(x)` for `x >= start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeSpec {
    pub kind: GaugeKind,
    pub normalization: f64,
    pub start: f64,
}

impl GaugeSpec {
    pub fn new(kind: GaugeKind, normalization: f64, start: f64) -> Result<GaugeSpec> {
        let g = GaugeSpec { kind, normalization, start };
        g.validate()?;
        Ok(g)
    }

    /// Gauge with the conventional start abscissa for its kind.
    pub fn with_default_start(kind: GaugeKind, normalization: f64) -> Result<GaugeSpec> {
        GaugeSpec::new(kind, normalization, kind.default_start())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.normalization.is_finite() || self.normalization <= 0.0 {
            return Err(Error::input(format!(
                "gauge normalization must be finite and positive, got {}",
                self.normalization
            )));
        }
        let min = self.kind.min_start();
        if !self.start.is_finite() || self.start < min * (1.0 - 1e-12) {
            return Err(Error::input(format!(
                "gauge start abscissa {} is below the {} domain threshold {min}",
                self.start,
                self.kind.as_str()
            )));
        }
        Ok(())
    }

    /// Gauge value at `x >= start` (no domain check; callers gate on start).
    fn eval_raw(&self, x: f64) -> f64 {
        let shape = match self.kind {
            GaugeKind::BmLil => (2.0 * x * x.ln().ln()).sqrt(),
            GaugeKind::SqrtLog => (2.0 * x.ln()).sqrt(),
            GaugeKind::LogTwoThirds => x.ln().powf(2.0 / 3.0),
            GaugeKind::SqrtLogColored => x.ln().sqrt(),
        };
        self.normalization * shape
    }
}

/// Evaluate a gauge, refusing abscissae below its start.
pub fn gauge_eval(gauge: &GaugeSpec, x: f64) -> Result<f64> {
    gauge.validate()?;
    if !x.is_finite() || x < gauge.start * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "abscissa {x} is below the gauge start {}",
            gauge.start
        )));
    }
    Ok(gauge.eval_raw(x))
}

/// Value transform applied before comparing against the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// Natural log; nonpositive values map to -inf and never exceed.
    Log,
    /// Odd compressive map sign(v) * log(1 + |v|) for data that may cross
    /// zero; strictly increasing, so peak cells are preserved when the
    /// threshold is mapped through the same function.
    Signed,
}

impl Transform {
    pub fn as_str(&self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Log => "log",
            Transform::Signed => "signed",
        }
    }

    pub fn parse_tag(tag: &str) -> Result<Transform> {
        match tag {
            "identity" => Ok(Transform::Identity),
            "log" => Ok(Transform::Log),
            "signed" => Ok(Transform::Signed),
            other => Err(Error::input(format!("unknown transform {other:?}"))),
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Log => {
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Transform::Signed => v.signum() * v.abs().ln_1p(),
        }
    }
}

/// Tall-peak extraction request: occupation where
/// `transform(value) >= gamma * gauge(abscissa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceedanceSpec {
    pub gauge: GaugeSpec,
    pub gamma: f64,
}

impl ExceedanceSpec {
    pub fn new(gauge: GaugeSpec, gamma: f64) -> Result<ExceedanceSpec> {
        gauge.validate()?;
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::input(format!(
                "exceedance level gamma must be finite and positive, got {gamma}"
            )));
        }
        Ok(ExceedanceSpec { gauge, gamma })
    }
}

/// Extraction result. `warnings` is nonempty when every sample fell below
/// the gauge start (the set is then empty by construction).
#[derive(Debug, Clone)]
pub struct ExceedanceOutcome {
    pub pixels: PixelSet,
    pub warnings: Vec<String>,
}

/// Streaming multi-level extraction over (abscissa, value) samples in
/// nondecreasing abscissa order. One pass marks cells for every requested
/// level at once; callers are responsible for the grid-step precondition.
pub fn collect_exceedance_1d(
    samples: impl IntoIterator<Item = (f64, f64)>,
    specs: &[ExceedanceSpec],
    transform: Transform,
    ambient: Ambient,
) -> Result<Vec<ExceedanceOutcome>> {
    if specs.is_empty() {
        return Err(Error::input("at least one exceedance level is required"));
    }
    for s in specs {
        ExceedanceSpec::new(s.gauge, s.gamma)?;
    }
    let mut cells: Vec<Vec<i64>> = vec![Vec::new(); specs.len()];
    let mut last: Vec<Option<i64>> = vec![None; specs.len()];
    let mut any_in_domain = false;
    for (a, v) in samples {
        if !a.is_finite() {
            return Err(Error::input(format!("non-finite sample abscissa {a}")));
        }
        let z = a.floor() as i64;
        for (i, spec) in specs.iter().enumerate() {
            if a < spec.gauge.start * (1.0 - 1e-12) {
                continue;
            }
            any_in_domain = true;
            if last[i] == Some(z) {
                continue;
            }
            if transform.apply(v) >= spec.gamma * spec.gauge.eval_raw(a) {
                cells[i].push(z);
                last[i] = Some(z);
            }
        }
    }
    let warnings = if any_in_domain {
        Vec::new()
    } else {
        vec!["every sample lies below the gauge start abscissa; the peak set is empty".to_string()]
    };
    Ok(cells
        .into_iter()
        .map(|c| ExceedanceOutcome {
            pixels: PixelSet::from_cells_1d(c, 1.0, ambient),
            warnings: warnings.clone(),
        })
        .collect())
}

fn check_step(step: f64, what: &str) -> Result<()> {
    if step > 1.0 + 1e-12 {
        return Err(Error::input(format!(
            "{what} grid step {step} exceeds 1; unit cells would contain no sample"
        )));
    }
    Ok(())
}

/// Tall-peak cells of a stored trajectory.
pub fn exceedance_pixels_traj(
    traj: &TrajectoryGrid,
    spec: &ExceedanceSpec,
    transform: Transform,
) -> Result<ExceedanceOutcome> {
    check_step(traj.dt(), "trajectory")?;
    let mut out = collect_exceedance_1d(traj.iter(), std::slice::from_ref(spec), transform, Ambient::HalfLine)?;
    Ok(out.pop().expect("one spec in, one outcome out"))
}

/// Tall-peak cells of a Brownian trajectory with an intra-step excursion
/// correction: when neither endpoint of a step reaches the level, the cell
/// is still marked with the conditional bridge-crossing probability
/// exp(-2 (a - v0)(a - v1) / dt). Grid sampling under-estimates the running
/// supremum; this puts back the mass the grid cannot see. Values are
/// compared untransformed, and the trajectory must carry the Brownian tag.
pub fn exceedance_pixels_traj_bridge(
    traj: &TrajectoryGrid,
    spec: &ExceedanceSpec,
    seed: u64,
) -> Result<ExceedanceOutcome> {
    if traj.model() != TrajModel::BrownianMotion {
        return Err(Error::input(format!(
            "the bridge crossing correction applies to Brownian trajectories only, got {}",
            traj.model().as_str()
        )));
    }
    check_step(traj.dt(), "trajectory")?;
    ExceedanceSpec::new(spec.gauge, spec.gamma)?;
    let dt = traj.dt();
    let mut rng = rng::stream(seed, "bridge", 0);
    let mut cells: Vec<i64> = Vec::new();
    let mut last: Option<i64> = None;
    let mut any_in_domain = false;
    let mark = |z: i64, cells: &mut Vec<i64>, last: &mut Option<i64>| {
        if *last != Some(z) {
            cells.push(z);
            *last = Some(z);
        }
    };
    let mut prev: Option<(f64, f64)> = None;
    for (t, v) in traj.iter() {
        let in_domain = t >= spec.gauge.start * (1.0 - 1e-12);
        if in_domain {
            any_in_domain = true;
            let level = spec.gamma * spec.gauge.eval_raw(t);
            if v >= level {
                mark(t.floor() as i64, &mut cells, &mut last);
            } else if let Some((pt, pv)) = prev {
                // Both endpoints below the level: the bridge over [pt, t]
                // still exceeds it with the classical crossing probability.
                if pt >= spec.gauge.start * (1.0 - 1e-12) && pv < level {
                    let p = (-2.0 * (level - pv) * (level - v) / dt).exp();
                    if p > 0.0 && rng.random::<f64>() < p {
                        mark((0.5 * (pt + t)).floor() as i64, &mut cells, &mut last);
                    }
                }
            }
        }
        prev = Some((t, v));
    }
    // Bridge insertions can land one cell behind the running cursor; rebuild
    // through the set constructor, which sorts and dedups.
    let warnings = if any_in_domain {
        Vec::new()
    } else {
        vec!["every sample lies below the gauge start abscissa; the peak set is empty".to_string()]
    };
    Ok(ExceedanceOutcome {
        pixels: PixelSet::from_cells_1d(cells, 1.0, Ambient::HalfLine),
        warnings,
    })
}

/// Tall-peak cells of a spatial field snapshot. The abscissa fed to the
/// gauge is the sup-norm of the sample position, matching the shell
/// geometry; norms are equivalent at the relevant scales, and the
/// macroscopic dimension does not depend on the choice.
pub fn exceedance_pixels_field(
    field: &Field,
    spec: &ExceedanceSpec,
    transform: Transform,
) -> Result<ExceedanceOutcome> {
    check_step(field.dx(), "field")?;
    ExceedanceSpec::new(spec.gauge, spec.gamma)?;
    if field.d() == 1 {
        let neg = field.origin()[0] < 0.0;
        let ambient = if neg { Ambient::FullLine } else { Ambient::HalfLine };
        let samples = field.iter_1d().map(|(x, v)| (x, v));
        // Positions are visited in increasing order, so the streaming
        // collector applies; the gauge abscissa |x| equals x on [0, inf).
        if neg {
            let mut cells: Vec<i64> = Vec::new();
            let mut any = false;
            for (x, v) in samples {
                if x.abs() < spec.gauge.start * (1.0 - 1e-12) {
                    continue;
                }
                any = true;
                if transform.apply(v) >= spec.gamma * spec.gauge.eval_raw(x.abs()) {
                    cells.push(x.floor() as i64);
                }
            }
            let warnings = if any {
                Vec::new()
            } else {
                vec!["every sample lies below the gauge start abscissa; the peak set is empty"
                    .to_string()]
            };
            return Ok(ExceedanceOutcome {
                pixels: PixelSet::from_cells_1d(cells, 1.0, ambient),
                warnings,
            });
        }
        let mut out = collect_exceedance_1d(samples, std::slice::from_ref(spec), transform, ambient)?;
        return Ok(out.pop().expect("one spec in, one outcome out"));
    }
    let mut cells: Vec<[i64; 2]> = Vec::new();
    let mut any_in_domain = false;
    for iy in 0..field.ny() {
        let y = field.y(iy);
        for ix in 0..field.nx() {
            let x = field.x(ix);
            let a = x.abs().max(y.abs());
            if a < spec.gauge.start * (1.0 - 1e-12) {
                continue;
            }
            any_in_domain = true;
            if transform.apply(field.value(ix, iy)) >= spec.gamma * spec.gauge.eval_raw(a) {
                cells.push([x.floor() as i64, y.floor() as i64]);
            }
        }
    }
    let warnings = if any_in_domain {
        Vec::new()
    } else {
        vec!["every sample lies below the gauge start abscissa; the peak set is empty".to_string()]
    };
    Ok(ExceedanceOutcome {
        pixels: PixelSet::from_cells_2d(cells, 1.0),
        warnings,
    })
}
