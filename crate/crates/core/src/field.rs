//! Spatial fields on uniform periodic grids in one or two dimensions: the
//! common output type of every field sampler and solver in the crate, plus
//! CSV interchange in the `x[,y],value` format.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

/// Cap on CSV emission, matching the cell-set writer's budget.
const CSV_VALUE_BUDGET: u64 = 20_000_000;

/// A scalar field sampled on a uniform grid with periodic boundary, frozen at
/// one instant `t`. One dimension stores `nx` samples at `origin + i * dx`;
/// two dimensions store row-major samples at
/// `(origin_x + i * dx, origin_y + j * dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    d: usize,
    origin: [f64; 2],
    dx: f64,
    t: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn from_values_1d(origin: f64, dx: f64, t: f64, values: Vec<f64>) -> Result<Field> {
        Field::build(1, [origin, 0.0], dx, t, values.len(), 1, values)
    }

    pub fn from_values_2d(
        origin: [f64; 2],
        dx: f64,
        t: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
    ) -> Result<Field> {
        Field::build(2, origin, dx, t, nx, ny, values)
    }

    fn build(
        d: usize,
        origin: [f64; 2],
        dx: f64,
        t: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
    ) -> Result<Field> {
        if !dx.is_finite() || dx <= 0.0 {
            return Err(Error::input(format!("grid step must be finite and positive, got {dx}")));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::input(format!("field time must be finite and nonnegative, got {t}")));
        }
        if !origin[0].is_finite() || !origin[1].is_finite() {
            return Err(Error::input("field origin must be finite"));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::input("field grid must have at least one sample per axis"));
        }
        if values.len() != nx * ny {
            return Err(Error::input(format!(
                "value count {} does not match grid {nx}x{ny}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite field value {} at index {bad}",
                values[bad]
            )));
        }
        Ok(Field { d, origin, dx, t, nx, ny, values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64).mul_add(self.dx, self.origin[0])
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64).mul_add(self.dx, self.origin[1])
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Iterate `(x, value)` pairs of a one-dimensional field.
    /// Panics if the field is two-dimensional.
    pub fn iter_1d(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        assert_eq!(self.d, 1, "iter_1d on a {}-d field", self.d);
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.x(i), v))
    }

    /// Write as CSV: a `# model=<tag> t=<t> dx=<dx> seed=<seed>` comment, a
    /// column header, then `x[,y],value` rows. Values print in shortest
    /// round-trip form, so a read-back reproduces the exact floats.
    pub fn write_csv<W: Write>(&self, w: &mut W, model: &str, seed: u64) -> Result<()> {
        let n = self.values.len() as u64;
        if n > CSV_VALUE_BUDGET {
            return Err(Error::Resource {
                reason: "field too large for CSV emission".into(),
                requested: n,
                budget: CSV_VALUE_BUDGET,
            });
        }
        writeln!(w, "# model={model} t={} dx={} seed={seed}", self.t, self.dx)?;
        if self.d == 1 {
            writeln!(w, "x,value")?;
            for (x, v) in self.iter_1d() {
                writeln!(w, "{x},{v}")?;
            }
        } else {
            writeln!(w, "x,y,value")?;
            for iy in 0..self.ny {
                for ix in 0..self.nx {
                    writeln!(w, "{},{},{}", self.x(ix), self.y(iy), self.value(ix, iy))?;
                }
            }
        }
        Ok(())
    }

    /// Read back a field written by [`write_csv`](Self::write_csv), returning
    /// the field together with its model tag and seed. `path_label` names the
    /// source in error messages.
    pub fn read_csv<R: BufRead>(r: &mut R, path_label: &str) -> Result<(Field, String, u64)> {
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
            .ok_or_else(|| bad("missing `# model=... t=... dx=... seed=...` comment".into()))?;
        let (mut model, mut t, mut dx, mut seed) = (None, None, None, None);
        for tok in meta.split_whitespace() {
            match tok.split_once('=') {
                Some(("model", v)) => model = Some(v.to_string()),
                Some(("t", v)) => {
                    t = Some(v.parse::<f64>().map_err(|_| bad(format!("bad t `{v}`")))?);
                }
                Some(("dx", v)) => {
                    dx = Some(v.parse::<f64>().map_err(|_| bad(format!("bad dx `{v}`")))?);
                }
                Some(("seed", v)) => {
                    seed = Some(v.parse::<u64>().map_err(|_| bad(format!("bad seed `{v}`")))?);
                }
                _ => return Err(bad(format!("unrecognized metadata token `{tok}`"))),
            }
        }
        let model = model.ok_or_else(|| bad("metadata missing `model=`".into()))?;
        let t = t.ok_or_else(|| bad("metadata missing `t=`".into()))?;
        let dx = dx.ok_or_else(|| bad("metadata missing `dx=`".into()))?;
        let seed = seed.ok_or_else(|| bad("metadata missing `seed=`".into()))?;
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| bad("missing column header".into()))?;
        let d = match header.as_str() {
            "x,value" => 1,
            "x,y,value" => 2,
            other => return Err(bad(format!("expected `x,value` or `x,y,value`, got `{other}`"))),
        };
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != d + 1 {
                return Err(bad(format!("row {i}: expected {} columns", d + 1)));
            }
            let mut nums = [0.0f64; 3];
            for (slot, raw) in nums.iter_mut().zip(&cols) {
                *slot = raw
                    .parse()
                    .map_err(|_| bad(format!("row {i}: bad number `{raw}`")))?;
            }
            let (x, y, v) = if d == 1 {
                (nums[0], 0.0, nums[1])
            } else {
                (nums[0], nums[1], nums[2])
            };
            rows.push((x, y, v));
        }
        if rows.is_empty() {
            return Err(bad("no data rows".into()));
        }
        let origin = [rows[0].0, rows[0].1];
        let on_grid = |value: f64, start: f64, k: usize| {
            let expect = (k as f64).mul_add(dx, start);
            (value - expect).abs() <= 1e-9 * expect.abs().max(1.0)
        };
        if d == 1 {
            for (i, row) in rows.iter().enumerate() {
                if !on_grid(row.0, origin[0], i) {
                    return Err(bad(format!("row {i}: x {} off the declared grid", row.0)));
                }
            }
            let values = rows.iter().map(|r| r.2).collect();
            Ok((Field::from_values_1d(origin[0], dx, t, values)?, model, seed))
        } else {
            // Rows are written x-fastest; the row count where x wraps back to
            // the origin fixes nx.
            let nx = rows
                .iter()
                .position(|r| r.1 != rows[0].1)
                .unwrap_or(rows.len());
            if nx == 0 || rows.len() % nx != 0 {
                return Err(bad(format!("ragged grid: {} rows, nx = {nx}", rows.len())));
            }
            let ny = rows.len() / nx;
            for (i, row) in rows.iter().enumerate() {
                if !on_grid(row.0, origin[0], i % nx) || !on_grid(row.1, origin[1], i / nx) {
                    return Err(bad(format!("row {i}: point ({}, {}) off the declared grid", row.0, row.1)));
                }
            }
            let values = rows.iter().map(|r| r.2).collect();
            Ok((Field::from_values_2d(origin, dx, t, nx, ny, values)?, model, seed))
        }
    }
}
