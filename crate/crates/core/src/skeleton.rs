//! Multi-scale anchor grids ("theta-skeletons") and the thickness test.
//!
//! For a parameter `theta` in (0, 1), layer `n` lays anchor points
//! `x = e^n + j * e^{theta n}` along each coordinate, as many as fit so that
//! the half-open boxes `Q(x, e^{theta n})` tile a prefix of the slab
//! `[e^n, e^{n+1})` without overlap. A set is theta-thick over a range of
//! layers when it meets every one of those boxes. Thick sets carry dimension
//! at least `d (1 - theta)`, which is what the thickness scan is used to
//! certify.
//!
//! Layers are indexed by their base exponent: the boxes of layer `n` live in
//! the annulus `[-e^{n+1}, e^{n+1})^d \ [-e^n, e^n)^d`, i.e. in shell
//! `n + 1` of the shell decomposition, while a cell at the slab's left edge
//! can still fall in shell `n`. Thickness queries therefore search both.

use crate::error::{Error, Result};
use crate::shell::{shell_exp, shell_of, PixelSet, MAX_SHELL};

/// Upper bound on the number of anchor boxes a single thickness scan may
/// examine; larger requests are refused up front.
pub const THICK_BOX_BUDGET: u64 = 100_000_000;

/// Largest layer count that f64 arithmetic can produce without losing
/// integer exactness (2^53).
const MAX_EXACT_COUNT: f64 = 9_007_199_254_740_992.0;

/// Deterministic family of anchor layers at sparseness parameter theta.
#[derive(Debug, Clone)]
pub struct Skeleton {
    theta: f64,
    d: usize,
    n_max: u32,
}

/// Build the anchor family for layers `0 ..= n_max` in dimension `d`.
pub fn build_skeleton(theta: f64, d: usize, n_max: u32) -> Result<Skeleton> {
    if !theta.is_finite() || theta <= 0.0 || theta >= 1.0 {
        return Err(Error::input(format!(
            "skeleton parameter theta must lie strictly inside (0, 1), got {theta}"
        )));
    }
    if d != 1 && d != 2 {
        return Err(Error::input(format!(
            "skeleton dimension must be 1 or 2, got {d}"
        )));
    }
    if n_max > MAX_SHELL {
        return Err(Error::input(format!(
            "skeleton n_max {n_max} exceeds the supported maximum {MAX_SHELL}"
        )));
    }
    Ok(Skeleton { theta, d, n_max })
}

impl Skeleton {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// First layer from which every stated invariant holds; this
    /// construction satisfies them from layer 0.
    pub fn start_layer(&self) -> u32 {
        0
    }

    /// Constant `a` in the two-sided cardinality bound
    /// `a * e^{d (1-theta) n} <= layer_count(n) <= a^{-1} * e^{d (1-theta) n}`,
    /// valid for every layer.
    pub fn cardinality_constant(&self) -> f64 {
        (std::f64::consts::E - 1.0).powi(-(self.d as i32))
    }

    /// Left edge `e^n` of layer n's slab.
    pub fn layer_base(&self, n: u32) -> f64 {
        shell_exp(n)
    }

    /// Anchor spacing (and box side) `e^{theta n}` of layer n.
    pub fn layer_spacing(&self, n: u32) -> f64 {
        (self.theta * n as f64).exp()
    }

    /// Per-coordinate anchor count of layer n, as a float (used for budget
    /// arithmetic where counts may exceed integer range).
    fn layer_count_f64(&self, n: u32) -> f64 {
        let base = self.layer_base(n);
        let end = shell_exp(n + 1);
        let s = self.layer_spacing(n);
        let mut j = ((end - base) / s).floor();
        // Trim until the last box, evaluated exactly as `layer_point_1d`
        // evaluates anchors, ends inside the slab; float rounding of the
        // division can otherwise overshoot by one.
        while j > 1.0 && (j - 1.0).mul_add(s, base) + s > end {
            j -= 1.0;
        }
        debug_assert!(j >= 1.0);
        j
    }

    /// Number of anchors per coordinate in layer n.
    pub fn layer_count_1d(&self, n: u32) -> u64 {
        let j = self.layer_count_f64(n);
        assert!(
            j <= MAX_EXACT_COUNT,
            "layer {n} count {j:e} exceeds the exactly representable range"
        );
        j as u64
    }

    /// Total anchors in layer n (the d-fold grid power of the 1-d layout).
    pub fn layer_count(&self, n: u32) -> u128 {
        (self.layer_count_1d(n) as u128).pow(self.d as u32)
    }

    /// Anchor j of layer n along one coordinate: `e^n + j * e^{theta n}`,
    /// evaluated with a single rounding.
    pub fn layer_point_1d(&self, n: u32, j: u64) -> f64 {
        (j as f64).mul_add(self.layer_spacing(n), self.layer_base(n))
    }

    /// All one-coordinate anchors of layer n, ascending.
    pub fn layer_points_1d(&self, n: u32) -> Vec<f64> {
        let count = self.layer_count_1d(n);
        assert!(
            count <= THICK_BOX_BUDGET,
            "layer {n} is too large to materialize"
        );
        (0..count).map(|j| self.layer_point_1d(n, j)).collect()
    }
}

/// A violation of theta-thickness: the first anchor box the set misses.
#[derive(Debug, Clone, PartialEq)]
pub struct ThickWitness {
    /// Layer whose box was missed.
    pub layer: u32,
    /// Per-coordinate anchor indices; trailing entries are 0 when d = 1.
    pub index: [u64; 2],
    /// Anchor coordinates; trailing entries are 0 when d = 1.
    pub anchor: [f64; 2],
}

fn check_range(skel: &Skeleton, n_lo: u32, n_hi: u32) -> Result<()> {
    if n_lo > n_hi {
        return Err(Error::input(format!(
            "empty thickness layer range [{n_lo}, {n_hi}]"
        )));
    }
    if n_hi > skel.n_max {
        return Err(Error::input(format!(
            "thickness range end {n_hi} exceeds the skeleton's n_max {}",
            skel.n_max
        )));
    }
    let mut total = 0.0f64;
    for n in n_lo..=n_hi {
        total += skel.layer_count_f64(n).powi(skel.d as i32);
    }
    if total > THICK_BOX_BUDGET as f64 {
        return Err(Error::Resource {
            reason: "thickness scan anchor boxes".into(),
            requested: if total >= u64::MAX as f64 {
                u64::MAX
            } else {
                total as u64
            },
            budget: THICK_BOX_BUDGET,
        });
    }
    Ok(())
}

/// Scan layers `n_lo ..= n_hi` in ascending order (anchors in lexicographic
/// order within a layer), asking `meets(corner, side)` whether the tested
/// set intersects each anchor box; returns the first box the set misses, or
/// `None` when the set is theta-thick over the whole range.
pub fn is_theta_thick_with(
    skel: &Skeleton,
    n_lo: u32,
    n_hi: u32,
    mut meets: impl FnMut(&[f64], f64) -> bool,
) -> Result<Option<ThickWitness>> {
    check_range(skel, n_lo, n_hi)?;
    for n in n_lo..=n_hi {
        let side = skel.layer_spacing(n);
        let count = skel.layer_count_1d(n);
        match skel.d {
            1 => {
                for j in 0..count {
                    let x = skel.layer_point_1d(n, j);
                    if !meets(&[x], side) {
                        return Ok(Some(ThickWitness {
                            layer: n,
                            index: [j, 0],
                            anchor: [x, 0.0],
                        }));
                    }
                }
            }
            _ => {
                for i in 0..count {
                    let xi = skel.layer_point_1d(n, i);
                    for j in 0..count {
                        let xj = skel.layer_point_1d(n, j);
                        if !meets(&[xi, xj], side) {
                            return Ok(Some(ThickWitness {
                                layer: n,
                                index: [i, j],
                                anchor: [xi, xj],
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Theta-thickness of a pixelized set: does it meet every anchor box of
/// every layer in `n_lo ..= n_hi`?
pub fn is_theta_thick(
    set: &PixelSet,
    skel: &Skeleton,
    n_lo: u32,
    n_hi: u32,
) -> Result<Option<ThickWitness>> {
    if set.d() != skel.d {
        return Err(Error::input(format!(
            "pixel set dimension {} does not match skeleton dimension {}",
            set.d(),
            skel.d
        )));
    }
    is_theta_thick_with(skel, n_lo, n_hi, |corner, side| {
        pixel_meets(set, corner, side)
    })
}

/// Does the pixelized set meet the half-open box with the given corner and
/// side? Only shells that can host a meeting cell are searched.
fn pixel_meets(set: &PixelSet, corner: &[f64], side: f64) -> bool {
    let r = set.resolution();
    // The sup-norm of a meeting cell's own corner exceeds the box corner's
    // sup-norm minus one cell width and stays below the box's far edge.
    let hi_corner = corner.iter().cloned().fold(0.0f64, f64::max);
    let lo_shell = if r > 1.0 {
        0
    } else {
        shell_of(&[(hi_corner - r).max(0.0)])
    };
    let hi_shell = shell_of(&[hi_corner + side]);
    for (s, cells) in set.shells() {
        if r <= 1.0 && (s < lo_shell || s > hi_shell) {
            continue;
        }
        let hit = match set.d() {
            1 => cells.meets_interval_1d(corner[0] / r, (corner[0] + side) / r),
            _ => cells.meets_box_2d(
                [corner[0] / r, corner[1] / r],
                [(corner[0] + side) / r, (corner[1] + side) / r],
            ),
        };
        if hit {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shell::{Ambient, PixelSet};

    fn exp_naturals_cells(k_max: u32) -> Vec<i64> {
        (0..=k_max).map(|k| shell_exp(k).floor() as i64).collect()
    }

    #[test]
    fn frozen_layer_counts() {
        let sk = build_skeleton(0.5, 1, 40).unwrap();
        assert_eq!(sk.layer_count_1d(6), 34);
        assert_eq!(sk.layer_count_1d(7), 56);
        assert_eq!(sk.layer_count_1d(0), 1);
        assert_eq!(sk.layer_count(6), 34);
        let sk2 = build_skeleton(0.5, 2, 40).unwrap();
        assert_eq!(sk2.layer_count_1d(6), 34);
        assert_eq!(sk2.layer_count(6), 34 * 34);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_skeleton(0.0, 1, 10).is_err());
        assert!(build_skeleton(1.0, 1, 10).is_err());
        assert!(build_skeleton(f64::NAN, 1, 10).is_err());
        assert!(build_skeleton(0.5, 3, 10).is_err());
        assert!(build_skeleton(0.5, 1, MAX_SHELL + 1).is_err());
    }

    #[test]
    fn packing_and_containment() {
        // Anchors start exactly at the slab base, consecutive gaps equal the
        // spacing up to a 2-ulp guard, and the last box ends inside the slab
        // under the same arithmetic used to generate anchors.
        for &theta in &[0.3, 0.5, 0.8] {
            let sk = build_skeleton(theta, 1, 20).unwrap();
            for n in 0..=16u32 {
                let s = sk.layer_spacing(n);
                let base = sk.layer_base(n);
                let end = shell_exp(n + 1);
                let count = sk.layer_count_1d(n);
                assert_eq!(sk.layer_point_1d(n, 0), base);
                let last = sk.layer_point_1d(n, count - 1);
                assert!(last + s <= end, "layer {n} theta {theta} overflows slab");
                let mut prev = base;
                for j in 1..count.min(50_000) {
                    let x = sk.layer_point_1d(n, j);
                    let gap = x - prev;
                    assert!(
                        gap >= s - 2.0 * f64::EPSILON * x,
                        "gap {gap} below spacing {s} at layer {n}"
                    );
                    prev = x;
                }
            }
        }
    }

    #[test]
    fn cardinality_constant_bounds() {
        for &d in &[1usize, 2] {
            for &theta in &[0.2, 0.4, 0.5, 0.6, 0.8] {
                let sk = build_skeleton(theta, d, 40).unwrap();
                let a = sk.cardinality_constant();
                assert!(a > 0.0 && a < 1.0);
                for n in 0..=34u32 {
                    if (1.0 - theta) * n as f64 > 34.0 {
                        continue;
                    }
                    let target = ((1.0 - theta) * d as f64 * n as f64).exp();
                    let count = sk.layer_count(n) as f64;
                    assert!(
                        a * target <= count && count <= target / a,
                        "count {count} outside [{}, {}] at n={n} theta={theta} d={d}",
                        a * target,
                        target / a
                    );
                }
            }
        }
    }

    #[test]
    fn cardinality_log_rate() {
        // Per-layer counts grow like e^{(1-theta) n}: the log-rate at layer
        // 30 is within 0.05 of 1 - theta.
        for &theta in &[0.2, 0.4, 0.5, 0.6, 0.8] {
            let sk = build_skeleton(theta, 1, 40).unwrap();
            let rate = (sk.layer_count_1d(30) as f64).ln() / 30.0;
            assert!(
                (rate - (1.0 - theta)).abs() <= 0.05,
                "log-rate {rate} far from {} at theta {theta}",
                1.0 - theta
            );
        }
    }

    #[test]
    fn full_predicate_is_thick() {
        let sk = build_skeleton(0.5, 1, 30).unwrap();
        let w = is_theta_thick_with(&sk, 0, 20, |_, _| true).unwrap();
        assert_eq!(w, None);
        let sk2 = build_skeleton(0.7, 2, 30).unwrap();
        let w2 = is_theta_thick_with(&sk2, 0, 10, |_, _| true).unwrap();
        assert_eq!(w2, None);
    }

    #[test]
    fn own_points_are_thick_1d() {
        let sk = build_skeleton(0.5, 1, 12).unwrap();
        let mut cells = Vec::new();
        for n in 0..=8u32 {
            for x in sk.layer_points_1d(n) {
                cells.push(x.floor() as i64);
            }
        }
        let set = PixelSet::from_cells_1d(cells, 1.0, Ambient::HalfLine);
        let w = is_theta_thick(&set, &sk, 0, 8).unwrap();
        assert_eq!(w, None);
    }

    #[test]
    fn own_points_are_thick_2d() {
        let sk = build_skeleton(0.5, 2, 8).unwrap();
        let mut cells = Vec::new();
        for n in 0..=5u32 {
            let xs = sk.layer_points_1d(n);
            for &xi in &xs {
                for &xj in &xs {
                    cells.push([xi.floor() as i64, xj.floor() as i64]);
                }
            }
        }
        let set = PixelSet::from_cells_2d(cells, 1.0);
        let w = is_theta_thick(&set, &sk, 0, 5).unwrap();
        assert_eq!(w, None);
    }

    #[test]
    fn exp_naturals_thin_witness() {
        // Powers of e are far too sparse: at layer 6 the box based at
        // e^6 + e^3 (second anchor) contains no power of e, while the first
        // anchor's box still touches the cell holding e^6.
        let sk = build_skeleton(0.5, 1, 12).unwrap();
        let set = PixelSet::from_cells_1d(exp_naturals_cells(11), 1.0, Ambient::HalfLine);
        let w = is_theta_thick(&set, &sk, 6, 10).unwrap().unwrap();
        assert_eq!(w.layer, 6);
        assert_eq!(w.index, [1, 0]);
        assert_eq!(w.anchor[0], sk.layer_point_1d(6, 1));
    }

    #[test]
    fn full_lattice_is_thick() {
        // Every unit cell occupied over the queried slabs: thick for any
        // theta (each anchor box has side >= 1 and so contains a full cell).
        let cells: Vec<i64> = (0..3000).collect();
        let set = PixelSet::from_cells_1d(cells, 1.0, Ambient::HalfLine);
        for &theta in &[0.3, 0.6, 0.9] {
            let sk = build_skeleton(theta, 1, 12).unwrap();
            let w = is_theta_thick(&set, &sk, 0, 6).unwrap();
            assert_eq!(w, None, "theta {theta}");
        }
    }

    #[test]
    fn range_validation() {
        let sk = build_skeleton(0.5, 1, 10).unwrap();
        assert!(matches!(
            is_theta_thick_with(&sk, 0, 11, |_, _| true),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            is_theta_thick_with(&sk, 5, 4, |_, _| true),
            Err(Error::Input(_))
        ));
        let set2 = PixelSet::from_cells_2d([[1, 1]], 1.0);
        assert!(matches!(
            is_theta_thick(&set2, &sk, 0, 5),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn budget_refusal() {
        let sk = build_skeleton(0.5, 1, 40).unwrap();
        match is_theta_thick_with(&sk, 30, 40, |_, _| true) {
            Err(Error::Resource {
                requested, budget, ..
            }) => {
                assert!(requested > budget);
                assert_eq!(budget, THICK_BOX_BUDGET);
            }
            other => panic!("expected resource refusal, got {other:?}"),
        }
    }
}
