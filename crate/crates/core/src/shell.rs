//! Exponential shell geometry on R^d (d = 1 or 2) and pixelized point sets.
//!
//! Space is split into half-open boxes V_n = [-e^n, e^n)^d; shell 0 is V_0
//! and shell n >= 1 is V_n \ V_{n-1}. A point set is reduced to the integer
//! cells it touches at a fixed resolution r (cell z covers
//! [r z, r z + r) per axis), and the shell of a cell is the shell of its
//! southwest corner. All dimension estimation downstream runs on these
//! pixelized sets at resolution 1.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// Largest shell index the geometry tables support.
pub const MAX_SHELL: u32 = 64;

/// Canonical e^n used by every module; one table so boundary comparisons are
/// bit-identical everywhere.
pub fn shell_exp(n: u32) -> f64 {
    debug_assert!(n <= MAX_SHELL + 2);
    (n as f64).exp()
}

fn shell_of_scalar(c: f64) -> u32 {
    // V_n is half-open: [-e^n, e^n). A coordinate sits inside V_n when
    // c < e^n on the right but c >= -e^n (inclusive) on the left, so the
    // left boundary points -e^n belong one shell lower than +e^n.
    let inside = |n: u32| {
        if c >= 0.0 {
            c < shell_exp(n)
        } else {
            -c <= shell_exp(n)
        }
    };
    let a = c.abs();
    if inside(0) {
        return 0;
    }
    // Initial guess from the logarithm, then settle boundary cases against
    // the canonical table.
    let mut n = (a.ln().floor() as i64 + 1).max(1) as u32;
    while n > 0 && inside(n - 1) {
        n -= 1;
    }
    while !inside(n) {
        n += 1;
    }
    n
}

/// Shell index of a point (any d); the max-norm coordinate decides.
pub fn shell_of(point: &[f64]) -> u32 {
    point
        .iter()
        .map(|c| shell_of_scalar(*c))
        .max()
        .expect("shell_of of empty point")
}

/// Half-open axis-aligned box [c_i, c_i + side) per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UprightBox {
    pub d: usize,
    pub corner: [f64; 2],
    pub side: f64,
}

impl UprightBox {
    pub fn new_1d(corner: f64, side: f64) -> Self {
        UprightBox {
            d: 1,
            corner: [corner, 0.0],
            side,
        }
    }

    pub fn new_2d(corner: [f64; 2], side: f64) -> Self {
        UprightBox { d: 2, corner, side }
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        (0..self.d).all(|i| p[i] >= self.corner[i] && p[i] < self.corner[i] + self.side)
    }

    /// Does the box intersect the half-open unit-resolution cell z (d=1)?
    pub fn meets_cell_1d(&self, z: i64, r: f64) -> bool {
        debug_assert_eq!(self.d, 1);
        let lo = r * z as f64;
        lo + r > self.corner[0] && lo < self.corner[0] + self.side
    }
}

/// Which part of the line a one-dimensional set is understood to live on.
/// Trajectory exceedance sets and the counting fixtures occupy [0, inf), so
/// occupation ratios are normalized by t^d; two-sided sets use (2t)^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    HalfLine,
    FullLine,
}

/// Maximal run of consecutive occupied cells (d = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRun {
    pub start: i64,
    pub len: u64,
}

impl CellRun {
    pub fn end(&self) -> i64 {
        self.start + self.len as i64
    }
}

/// Cells of one shell. Explicit runs cover the common case; `Arith1` is a
/// lazy arithmetic progression z_k = floor(first + k step) (step >= 2, so
/// every cell is isolated) used by analytic fixtures whose shells are far too
/// large to materialize; `Cells2` is a sorted unique list for d = 2.
#[derive(Debug, Clone, PartialEq)]
pub enum ShellCells {
    Runs1(Vec<CellRun>),
    Arith1 { first: f64, step: f64, count: u64 },
    Cells2(Vec<[i64; 2]>),
}

impl ShellCells {
    pub fn count(&self) -> u64 {
        match self {
            ShellCells::Runs1(rs) => rs.iter().map(|r| r.len).sum(),
            ShellCells::Arith1 { count, .. } => *count,
            ShellCells::Cells2(cs) => cs.len() as u64,
        }
    }

    /// k-th cell of an arithmetic shell.
    pub fn arith_cell(first: f64, step: f64, k: u64) -> i64 {
        (first + step * k as f64).floor() as i64
    }

    /// Smallest and one-past-largest occupied cell index (d = 1).
    pub fn extent_1d(&self) -> (i64, i64) {
        match self {
            ShellCells::Runs1(rs) => (rs[0].start, rs[rs.len() - 1].end()),
            ShellCells::Arith1 { first, step, count } => {
                let lo = Self::arith_cell(*first, *step, 0);
                let hi = Self::arith_cell(*first, *step, count - 1);
                (lo, hi + 1)
            }
            ShellCells::Cells2(_) => panic!("extent_1d on a d=2 shell"),
        }
    }

    /// Does any cell of this shell meet the half-open interval [a, b)
    /// (coordinates in units of cells, i.e. resolution already applied)?
    pub fn meets_interval_1d(&self, a: f64, b: f64) -> bool {
        let zlo = a.floor() as i64; // first cell whose box could reach past a
        match self {
            ShellCells::Runs1(rs) => {
                let idx = rs.partition_point(|r| r.end() as f64 <= a);
                idx < rs.len() && (rs[idx].start as f64) < b
            }
            ShellCells::Arith1 { first, step, count } => {
                // Smallest k with z_k + 1 > a, i.e. z_k >= zlo.
                let kf = ((zlo as f64 - first) / step).ceil();
                let mut k = if kf < 0.0 { 0 } else { kf as u64 };
                // Floor wobble can put z_k one step off; settle locally.
                while k > 0 && Self::arith_cell(*first, *step, k - 1) >= zlo {
                    k -= 1;
                }
                while k < *count && ((Self::arith_cell(*first, *step, k) + 1) as f64) <= a {
                    k += 1;
                }
                k < *count && (Self::arith_cell(*first, *step, k) as f64) < b
            }
            ShellCells::Cells2(_) => panic!("meets_interval_1d on a d=2 shell"),
        }
    }

    /// Materialize d=1 cells (test/CSV use; caller must respect budgets).
    /// Does any cell of this d=2 shell meet the half-open box
    /// [a0, b0) x [a1, b1) (coordinates in units of cells)?
    pub fn meets_box_2d(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        match self {
            ShellCells::Cells2(cs) => {
                // Cells are sorted lexicographically; restrict to the strip
                // of first coordinates whose unit boxes can reach past a0.
                let zlo = a[0].floor() as i64;
                let i0 = cs.partition_point(|z| z[0] < zlo);
                cs[i0..]
                    .iter()
                    .take_while(|z| (z[0] as f64) < b[0])
                    .any(|z| ((z[1] + 1) as f64) > a[1] && (z[1] as f64) < b[1])
            }
            _ => panic!("meets_box_2d on a d=1 shell"),
        }
    }

    pub fn cells_1d(&self) -> Vec<i64> {
        match self {
            ShellCells::Runs1(rs) => rs
                .iter()
                .flat_map(|r| (0..r.len as i64).map(move |i| r.start + i))
                .collect(),
            ShellCells::Arith1 { first, step, count } => {
                (0..*count).map(|k| Self::arith_cell(*first, *step, k)).collect()
            }
            ShellCells::Cells2(_) => panic!("cells_1d on a d=2 shell"),
        }
    }
}

/// A pixelized set: occupied integer cells at a fixed resolution, grouped by
/// shell. Cells within a shell have set semantics (unique, sorted).
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSet {
    d: usize,
    resolution: f64,
    ambient: Ambient,
    shells: BTreeMap<u32, ShellCells>,
}

impl PixelSet {
    pub fn new(d: usize, resolution: f64, ambient: Ambient) -> Self {
        assert!(d == 1 || d == 2, "only d = 1 and d = 2 are supported");
        assert!(resolution > 0.0);
        PixelSet {
            d,
            resolution,
            ambient,
            shells: BTreeMap::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn shells(&self) -> impl Iterator<Item = (u32, &ShellCells)> {
        self.shells.iter().map(|(n, c)| (*n, c))
    }

    pub fn shell(&self, n: u32) -> Option<&ShellCells> {
        self.shells.get(&n)
    }

    pub fn occupied_shells(&self) -> Vec<u32> {
        self.shells.keys().copied().collect()
    }

    pub fn max_occupied_shell(&self) -> Option<u32> {
        self.shells.keys().next_back().copied()
    }

    pub fn total_cells(&self) -> u64 {
        self.shells.values().map(|c| c.count()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    /// Shell index of a d=1 cell at this resolution (southwest corner rule).
    pub fn cell_shell_1d(&self, z: i64) -> u32 {
        shell_of(&[self.resolution * z as f64])
    }

    /// Build from unsorted d=1 cells at a given resolution.
    pub fn from_cells_1d(cells: impl IntoIterator<Item = i64>, resolution: f64, ambient: Ambient) -> Self {
        let mut v: Vec<i64> = cells.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        let mut set = PixelSet::new(1, resolution, ambient);
        let mut b = RunShellBuilder::new(resolution);
        for z in v {
            b.push(z);
        }
        set.shells = b.finish();
        set
    }

    /// Build from unsorted d=2 cells.
    pub fn from_cells_2d(cells: impl IntoIterator<Item = [i64; 2]>, resolution: f64) -> Self {
        let mut v: Vec<[i64; 2]> = cells.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        let mut set = PixelSet::new(2, resolution, Ambient::FullLine);
        for z in v {
            let corner = [resolution * z[0] as f64, resolution * z[1] as f64];
            let n = shell_of(&corner);
            match set
                .shells
                .entry(n)
                .or_insert_with(|| ShellCells::Cells2(Vec::new()))
            {
                ShellCells::Cells2(cs) => cs.push(z),
                _ => unreachable!(),
            }
        }
        set
    }

    /// Insert a lazy arithmetic shell (fixture constructor path). All cells
    /// floor(first + k step), k < count must genuinely lie in shell n and
    /// step must be >= 2 so cells are isolated; both are asserted at the
    /// endpoints.
    pub(crate) fn insert_arith_shell(&mut self, n: u32, first: f64, step: f64, count: u64) {
        assert!(self.d == 1 && count > 0 && step >= 2.0);
        let lo = ShellCells::arith_cell(first, step, 0);
        let hi = ShellCells::arith_cell(first, step, count - 1);
        assert_eq!(self.cell_shell_1d(lo), n, "arith shell start outside shell");
        assert_eq!(self.cell_shell_1d(hi), n, "arith shell end outside shell");
        self.shells.insert(n, ShellCells::Arith1 { first, step, count });
    }

    pub(crate) fn insert_runs_shell(&mut self, n: u32, runs: Vec<CellRun>) {
        assert!(self.d == 1 && !runs.is_empty());
        self.shells.insert(n, ShellCells::Runs1(runs));
    }

    /// Re-pixelize a fine d=1 set (resolution <= 1) at resolution 1: a unit
    /// cell becomes occupied when any fine cell box meets it.
    pub fn to_unit_resolution(&self) -> PixelSet {
        assert_eq!(self.d, 1, "unit-resolution rescale implemented for d = 1");
        if self.resolution == 1.0 {
            return self.clone();
        }
        assert!(
            self.resolution < 1.0,
            "coarse sets (r > 1) cannot be refined to resolution 1"
        );
        let r = self.resolution;
        let mut b = RunShellBuilder::new(1.0);
        for (_, cells) in self.shells() {
            match cells {
                ShellCells::Runs1(rs) => {
                    for run in rs {
                        let a = r * run.start as f64;
                        let bnd = r * run.end() as f64;
                        let mut m = a.floor() as i64;
                        let m_last = {
                            let c = bnd.ceil() as i64 - 1;
                            c.max(m)
                        };
                        while m <= m_last {
                            b.push(m);
                            m += 1;
                        }
                    }
                }
                _ => panic!("to_unit_resolution expects explicit runs"),
            }
        }
        let mut out = PixelSet::new(1, 1.0, self.ambient);
        out.shells = b.finish();
        out
    }

    /// Restrict to a shell range (used by fixtures and tests).
    pub fn restrict_shells(&self, lo: u32, hi: u32) -> PixelSet {
        let mut out = PixelSet::new(self.d, self.resolution, self.ambient);
        for (n, c) in self.shells() {
            if n >= lo && n <= hi {
                out.shells.insert(n, c.clone());
            }
        }
        out
    }

    /// Is every cell of `self` a cell of `other`? (Same d and resolution.)
    pub fn is_subset_of(&self, other: &PixelSet) -> bool {
        assert_eq!(self.d, other.d);
        assert_eq!(self.resolution, other.resolution);
        for (n, cells) in self.shells() {
            let Some(ocells) = other.shell(n) else {
                return false;
            };
            match (cells, ocells) {
                (ShellCells::Cells2(a), ShellCells::Cells2(b)) => {
                    if !a.iter().all(|z| b.binary_search(z).is_ok()) {
                        return false;
                    }
                }
                (a, b) => {
                    let av = a.cells_1d();
                    let bv = b.cells_1d();
                    let mut i = 0;
                    for z in av {
                        while i < bv.len() && bv[i] < z {
                            i += 1;
                        }
                        if i >= bv.len() || bv[i] != z {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Lebesgue measure of the occupied cell boxes inside [-t, t]^d
    /// (FullLine) or [0, t]^d (HalfLine), in coordinate units.
    pub fn measure_in_window(&self, t: f64) -> f64 {
        let r = self.resolution;
        let mut total = 0.0;
        for (_, cells) in self.shells() {
            match cells {
                ShellCells::Runs1(rs) => {
                    for run in rs {
                        let (a, b) = (r * run.start as f64, r * run.end() as f64);
                        let lo = match self.ambient {
                            Ambient::HalfLine => 0.0,
                            Ambient::FullLine => -t,
                        };
                        let out = (b.min(t) - a.max(lo)).max(0.0);
                        total += out;
                    }
                }
                ShellCells::Arith1 { first, step, count } => {
                    // Isolated unit cells; count those with corner in window.
                    if *first > t {
                        continue;
                    }
                    let kmax = (((t - first) / step).floor() as u64).min(count - 1);
                    let mut k_hi = kmax;
                    while ShellCells::arith_cell(*first, *step, k_hi) as f64 * r + r > t && k_hi > 0
                    {
                        k_hi -= 1;
                    }
                    if ShellCells::arith_cell(*first, *step, k_hi) as f64 * r + r <= t {
                        total += (k_hi + 1) as f64 * r;
                    }
                }
                ShellCells::Cells2(cs) => {
                    for z in cs {
                        let (x, y) = (r * z[0] as f64, r * z[1] as f64);
                        if x >= -t && x + r <= t && y >= -t && y + r <= t {
                            total += r * r;
                        }
                    }
                }
            }
        }
        total
    }

    /// Write the set as CSV: a `# resolution=<r> d=<d>` header comment, a
    /// column header, then one row per cell. Lazy shells are materialized,
    /// so writing is refused above a cell budget.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        const CSV_CELL_BUDGET: u64 = 20_000_000;
        let n = self.total_cells();
        if n > CSV_CELL_BUDGET {
            return Err(Error::Resource {
                reason: "pixel CSV export".into(),
                requested: n,
                budget: CSV_CELL_BUDGET,
            });
        }
        writeln!(w, "# resolution={} d={}", self.resolution, self.d)?;
        if self.d == 1 {
            writeln!(w, "shell,z1")?;
            for (s, cells) in self.shells() {
                for z in cells.cells_1d() {
                    writeln!(w, "{s},{z}")?;
                }
            }
        } else {
            writeln!(w, "shell,z1,z2")?;
            for (s, cells) in self.shells() {
                if let ShellCells::Cells2(cs) = cells {
                    for z in cs {
                        writeln!(w, "{s},{},{}", z[0], z[1])?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: &mut R, path_label: &str) -> Result<PixelSet> {
        let bad = |detail: &str| Error::Format {
            path: path_label.to_string(),
            detail: detail.to_string(),
        };
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty file"))??;
        let header = header.trim();
        if !header.starts_with('#') {
            return Err(bad("missing `# resolution=<r> d=<d>` header"));
        }
        let mut resolution = None;
        let mut d = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("resolution=") {
                resolution = Some(v.parse::<f64>().map_err(|_| bad("bad resolution"))?);
            } else if let Some(v) = tok.strip_prefix("d=") {
                d = Some(v.parse::<usize>().map_err(|_| bad("bad d"))?);
            }
        }
        let resolution = resolution.ok_or_else(|| bad("header lacks resolution"))?;
        let d = d.ok_or_else(|| bad("header lacks d"))?;
        if d != 1 && d != 2 {
            return Err(bad("d must be 1 or 2"));
        }
        let mut cells1 = Vec::new();
        let mut cells2 = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if i == 0 && t.starts_with("shell") {
                continue; // column header
            }
            let parts: Vec<&str> = t.split(',').collect();
            if parts.len() != 1 + d {
                return Err(bad(&format!("row {} has {} columns, want {}", i + 2, parts.len(), 1 + d)));
            }
            // The shell column is redundant (derivable from the cell); it is
            // validated rather than trusted.
            let s: u32 = parts[0].trim().parse().map_err(|_| bad("bad shell index"))?;
            if d == 1 {
                let z: i64 = parts[1].trim().parse().map_err(|_| bad("bad cell index"))?;
                if shell_of(&[resolution * z as f64]) != s {
                    return Err(bad(&format!("cell {z} labeled with wrong shell {s}")));
                }
                cells1.push(z);
            } else {
                let z1: i64 = parts[1].trim().parse().map_err(|_| bad("bad cell index"))?;
                let z2: i64 = parts[2].trim().parse().map_err(|_| bad("bad cell index"))?;
                if shell_of(&[resolution * z1 as f64, resolution * z2 as f64]) != s {
                    return Err(bad(&format!("cell ({z1},{z2}) labeled with wrong shell {s}")));
                }
                cells2.push([z1, z2]);
            }
        }
        Ok(if d == 1 {
            PixelSet::from_cells_1d(cells1, resolution, Ambient::HalfLine)
        } else {
            PixelSet::from_cells_2d(cells2, resolution)
        })
    }
}

/// Streaming builder for sorted d=1 cell pushes; groups into runs and splits
/// at shell boundaries as it goes.
pub struct RunShellBuilder {
    resolution: f64,
    shells: BTreeMap<u32, Vec<CellRun>>,
    last: Option<i64>,
}

impl RunShellBuilder {
    pub fn new(resolution: f64) -> Self {
        RunShellBuilder {
            resolution,
            shells: BTreeMap::new(),
            last: None,
        }
    }

    /// Push a cell with index >= every previously pushed cell.
    pub fn push(&mut self, z: i64) {
        if let Some(prev) = self.last {
            assert!(z >= prev, "RunShellBuilder requires nondecreasing cells");
            if z == prev {
                return;
            }
        }
        self.last = Some(z);
        let shell = shell_of(&[self.resolution * z as f64]);
        let runs = self.shells.entry(shell).or_default();
        match runs.last_mut() {
            Some(run) if run.end() == z => run.len += 1,
            _ => runs.push(CellRun { start: z, len: 1 }),
        }
    }

    /// Push a half-open run of cells `[start, start + len)`, strictly after
    /// every previously pushed cell. The run may cross shell boundaries and
    /// is split at them.
    pub fn push_run(&mut self, start: i64, len: u64) {
        if len == 0 {
            return;
        }
        let end_excl = start
            .checked_add(i64::try_from(len).expect("run length exceeds i64"))
            .expect("run end overflows i64");
        if let Some(prev) = self.last {
            assert!(start > prev, "RunShellBuilder requires increasing runs");
        }
        self.last = Some(end_excl - 1);
        let mut lo = start;
        while lo < end_excl {
            // Shell index is monotone in the cell index on either side of
            // zero, so cut at zero and binary search for the end of the
            // constant-shell prefix.
            let seg_end = if lo < 0 { end_excl.min(0) } else { end_excl };
            let s = shell_of(&[self.resolution * lo as f64]);
            let mut a = lo + 1;
            let mut b = seg_end;
            while a < b {
                let mid = a + (b - a) / 2;
                if shell_of(&[self.resolution * mid as f64]) == s {
                    a = mid + 1;
                } else {
                    b = mid;
                }
            }
            let runs = self.shells.entry(s).or_default();
            match runs.last_mut() {
                Some(run) if run.end() == lo => run.len += (a - lo) as u64,
                _ => runs.push(CellRun {
                    start: lo,
                    len: (a - lo) as u64,
                }),
            }
            lo = a;
        }
    }

    pub fn finish(self) -> BTreeMap<u32, ShellCells> {
        self.shells
            .into_iter()
            .map(|(n, rs)| (n, ShellCells::Runs1(rs)))
            .collect()
    }

    /// Finish into a PixelSet directly.
    pub fn into_pixel_set(self, ambient: Ambient) -> PixelSet {
        let mut set = PixelSet::new(1, self.resolution, ambient);
        set.shells = self.finish();
        set
    }
}

/// Pixelize d=1 points at resolution r.
pub fn pixelize_1d(points: &[f64], r: f64, ambient: Ambient) -> PixelSet {
    assert!(r > 0.0);
    PixelSet::from_cells_1d(
        points.iter().map(|x| (x / r).floor() as i64),
        r,
        ambient,
    )
}

/// Pixelize d=2 points at resolution r.
pub fn pixelize_2d(points: &[[f64; 2]], r: f64) -> PixelSet {
    assert!(r > 0.0);
    PixelSet::from_cells_2d(
        points
            .iter()
            .map(|p| [(p[0] / r).floor() as i64, (p[1] / r).floor() as i64]),
        r,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_of_scalar_examples() {
        // 12 lies in [e^2, e^3), 0.3 in [0,1), and the pair (5,60) follows
        // its larger coordinate into [e^4, e^5).
        assert_eq!(shell_of(&[12.0]), 3);
        assert_eq!(shell_of(&[0.3]), 0);
        assert_eq!(shell_of(&[-0.3]), 0);
        assert_eq!(shell_of(&[5.0, 60.0]), 5);
        assert_eq!(shell_of(&[-60.0, 5.0]), 5);
    }

    #[test]
    fn shell_boundaries_are_half_open() {
        let e1 = shell_exp(1);
        assert_eq!(shell_of(&[1.0]), 1); // 1 = e^0 leaves V_0
        assert_eq!(shell_of(&[e1]), 2);
        assert_eq!(shell_of(&[e1 - 1e-12]), 1);
        assert_eq!(shell_of(&[shell_exp(5)]), 6);
        // Left boundaries are included in the box, so -e^n stays in shell n.
        assert_eq!(shell_of(&[-1.0]), 0);
        assert_eq!(shell_of(&[-e1]), 1);
        assert_eq!(shell_of(&[-e1 - 1e-12]), 2);
    }

    #[test]
    fn shells_partition_sample_points() {
        // Every point belongs to exactly one shell: the shell_of index, and
        // membership in V_n \ V_{n-1} agrees with it.
        let mut x = 0.05f64;
        while x < 1.0e6 {
            let n = shell_of(&[x]);
            assert!(x < shell_exp(n));
            if n > 0 {
                assert!(x >= shell_exp(n - 1) || n == 1 && x >= 1.0);
            }
            x *= 1.37;
        }
    }

    #[test]
    fn pixelize_respects_resolution() {
        // A single point e^3 + 0.5 at r = 1/2 occupies exactly cell 41:
        // (e^3 + 0.5)/0.5 = 41.17.
        let p = shell_exp(3) + 0.5;
        let set = pixelize_1d(&[p], 0.5, Ambient::HalfLine);
        assert_eq!(set.total_cells(), 1);
        let (n, cells) = set.shells().next().unwrap();
        assert_eq!(cells.cells_1d(), vec![41]);
        // Corner 20.5 lies in [e^3, e^4).
        assert_eq!(n, 4);
    }

    #[test]
    fn pixelize_merges_points_in_one_cell() {
        // 2.1 and 2.9 share the unit cell [2, 3); its corner 2 sits in
        // [1, e), i.e. shell 1.
        let set = pixelize_1d(&[2.1, 2.9], 1.0, Ambient::HalfLine);
        assert_eq!(set.total_cells(), 1);
        let (n, cells) = set.shells().next().unwrap();
        assert_eq!(cells.cells_1d(), vec![2]);
        assert_eq!(n, 1);
    }

    #[test]
    fn interval_pixelization_spans_cells() {
        let pts: Vec<f64> = (0..=110).map(|i| 7.2 + i as f64 * 0.01).collect();
        let set = pixelize_1d(&pts, 1.0, Ambient::HalfLine);
        let mut cells: Vec<i64> = Vec::new();
        for (_, c) in set.shells() {
            cells.extend(c.cells_1d());
        }
        cells.sort_unstable();
        assert_eq!(cells, vec![7, 8]);
    }

    #[test]
    fn runs_split_at_shell_boundaries() {
        // Cells 1..=30 cross e (shell 1|2 boundary at corner >= e, i.e. z=3)
        // and e^2 (z=8) and e^3 (z=21).
        let set = PixelSet::from_cells_1d(1..=30, 1.0, Ambient::HalfLine);
        let shells: Vec<u32> = set.occupied_shells();
        assert_eq!(shells, vec![1, 2, 3, 4]);
        assert_eq!(set.shell(1).unwrap().cells_1d(), vec![1, 2]);
        assert_eq!(set.shell(2).unwrap().cells_1d(), (3..=7).collect::<Vec<_>>());
        assert_eq!(set.shell(3).unwrap().cells_1d(), (8..=20).collect::<Vec<_>>());
        assert_eq!(set.shell(4).unwrap().cells_1d(), (21..=30).collect::<Vec<_>>());
        assert_eq!(set.total_cells(), 30);
    }

    #[test]
    fn unit_rescale_covers_fine_cells() {
        // Fine cells at r = 0.25 covering [1.75, 2.5) touch unit cells 1, 2.
        let set = PixelSet::from_cells_1d(7..=9, 0.25, Ambient::HalfLine);
        let unit = set.to_unit_resolution();
        assert_eq!(unit.resolution(), 1.0);
        let mut cells: Vec<i64> = Vec::new();
        for (_, c) in unit.shells() {
            cells.extend(c.cells_1d());
        }
        cells.sort_unstable();
        assert_eq!(cells, vec![1, 2]);
    }

    #[test]
    fn csv_round_trip_1d() {
        let set = PixelSet::from_cells_1d([2, 3, 9, 100, 103], 1.0, Ambient::HalfLine);
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# resolution=1 d=1\nshell,z1\n"));
        let back = PixelSet::read_csv(&mut std::io::Cursor::new(&buf), "mem").unwrap();
        assert_eq!(back.total_cells(), 5);
        assert_eq!(back.shell(5).unwrap().cells_1d(), vec![100, 103]);
    }

    #[test]
    fn csv_rejects_mislabeled_shell() {
        let text = "# resolution=1 d=1\nshell,z1\n2,100\n";
        let err = PixelSet::read_csv(&mut std::io::Cursor::new(text.as_bytes()), "mem");
        assert!(err.is_err());
    }

    #[test]
    fn csv_round_trip_2d() {
        let set = PixelSet::from_cells_2d([[3, -4], [0, 0], [100, 7]], 1.0);
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let back = PixelSet::read_csv(&mut std::io::Cursor::new(&buf), "mem").unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn arith_shell_counts_and_membership() {
        let mut set = PixelSet::new(1, 1.0, Ambient::HalfLine);
        // 10 cells starting just above e^6, spaced e^3 apart, inside shell 7.
        set.insert_arith_shell(7, shell_exp(6).ceil(), shell_exp(3), 10);
        assert_eq!(set.total_cells(), 10);
        let cells = set.shell(7).unwrap();
        let listed = cells.cells_1d();
        assert_eq!(listed.len(), 10);
        for pair in listed.windows(2) {
            assert!(pair[1] > pair[0]);
        }
        // Membership scan agrees with the explicit list.
        for z in listed.iter() {
            assert!(cells.meets_interval_1d(*z as f64, (*z + 1) as f64));
            assert!(!cells.meets_interval_1d(*z as f64 + 1.0, *z as f64 + 2.0));
        }
    }

    #[test]
    fn measure_in_window_counts_cell_boxes() {
        let set = PixelSet::from_cells_1d([0, 1, 2, 9], 1.0, Ambient::HalfLine);
        assert!((set.measure_in_window(3.0) - 3.0).abs() < 1e-12);
        assert!((set.measure_in_window(100.0) - 4.0).abs() < 1e-12);
    }
}
