//! Deterministic analytic point sets with known macroscopic dimension.
//!
//! These pixelized families anchor the dimension estimators: the positive
//! integers (dimension 1), powers of e (dimension 0), the full integer
//! lattice (dimension d), trimmed theta-skeleton anchors (dimension
//! 1 - theta), and affine images q*x + s of any of them (dimension
//! unchanged). Construction is closed-form per shell wherever possible:
//! contiguous runs for interval-like families, lazy arithmetic progressions
//! for evenly spaced ones, explicit cells only for small or irregular
//! pieces, with hard budgets on anything that must materialize.

use crate::error::{Error, Result};
use crate::shell::{shell_exp, shell_of, Ambient, CellRun, PixelSet, RunShellBuilder};
use crate::skeleton::{build_skeleton, Skeleton};

/// Hard cap on explicitly materialized cells per fixture request.
pub const FIXTURE_CELL_BUDGET: u64 = 8_000_000;

/// Cells beyond this shell would overflow the i64 cell-coordinate range.
pub const MAX_FIXTURE_SHELL: u32 = 43;

/// Largest integer f64 arithmetic reproduces exactly (2^53); affine cell
/// values beyond it cannot be evaluated faithfully.
const MAX_EXACT_CELL: i128 = 1 << 53;

/// The deterministic fixture families.
#[derive(Debug, Clone, PartialEq)]
pub enum FixtureKind {
    /// {1, 2, 3, ...}: all unit cells from 1 on; dimension 1.
    Naturals,
    /// {e, e^2, e^3, ...}: one cell per shell; dimension 0.
    ExpNaturals,
    /// All of Z^d; dimension d.
    FullLattice { d: usize },
    /// Trimmed theta-skeleton anchors (each layer minus its base anchor, so
    /// layer n sits entirely in shell n+1); dimension 1 - theta. d = 1.
    Skeleton { theta: f64 },
    /// The image q*x + s of a base family; dimension unchanged.
    AffineImage {
        base: Box<FixtureKind>,
        scale: u32,
        shift: u32,
    },
}

/// Inclusive range of nonnegative integer cell corners in shell n,
/// settled against `shell_of` so float boundaries cannot disagree.
fn shell_bounds_pos(n: u32) -> (i64, i64) {
    if n == 0 {
        return (0, 0);
    }
    let mut lo = shell_exp(n - 1).ceil() as i64;
    while shell_of(&[lo as f64]) < n {
        lo += 1;
    }
    while lo > 0 && shell_of(&[(lo - 1) as f64]) == n {
        lo -= 1;
    }
    let mut hi = shell_exp(n).ceil() as i64 - 1;
    while shell_of(&[hi as f64]) > n {
        hi -= 1;
    }
    while shell_of(&[(hi + 1) as f64]) == n {
        hi += 1;
    }
    (lo, hi)
}

/// Inclusive range of negative integer cell corners in shell n (for n = 0
/// the single cell -1).
fn shell_bounds_neg(n: u32) -> (i64, i64) {
    if n == 0 {
        return (-1, -1);
    }
    let mut lo = -(shell_exp(n).floor() as i64);
    while shell_of(&[lo as f64]) > n {
        lo += 1;
    }
    while shell_of(&[(lo - 1) as f64]) == n {
        lo -= 1;
    }
    let mut hi = -(shell_exp(n - 1).floor() as i64) - 1;
    while shell_of(&[hi as f64]) < n {
        hi -= 1;
    }
    while shell_of(&[(hi + 1) as f64]) == n {
        hi += 1;
    }
    (lo, hi)
}

fn check_range(n_lo: u32, n_hi: u32) -> Result<()> {
    if n_lo > n_hi {
        return Err(Error::input(format!(
            "empty fixture shell range [{n_lo}, {n_hi}]"
        )));
    }
    if n_hi > MAX_FIXTURE_SHELL {
        return Err(Error::input(format!(
            "fixture shells beyond {MAX_FIXTURE_SHELL} overflow the cell index range (requested {n_hi})"
        )));
    }
    Ok(())
}

/// Build the pixelized fixture restricted to shells `n_lo ..= n_hi`.
pub fn fixture_set(kind: &FixtureKind, n_lo: u32, n_hi: u32) -> Result<PixelSet> {
    check_range(n_lo, n_hi)?;
    match kind {
        FixtureKind::Naturals => naturals(n_lo, n_hi, 1, 0),
        FixtureKind::ExpNaturals => exp_naturals(n_lo, n_hi, 1, 0),
        FixtureKind::FullLattice { d: 1 } => full_lattice_1d(n_lo, n_hi, 1, 0),
        FixtureKind::FullLattice { d: 2 } => full_lattice_2d(n_lo, n_hi, 1, 0),
        FixtureKind::FullLattice { d } => Err(Error::input(format!(
            "full lattice fixture supports d = 1 or 2, got {d}"
        ))),
        FixtureKind::Skeleton { theta } => skeleton_fixture(*theta, n_lo, n_hi, 1, 0),
        FixtureKind::AffineImage { base, scale, shift } => {
            if *scale < 1 {
                return Err(Error::input("affine fixture scale must be >= 1"));
            }
            let (q, s) = (*scale as i64, *shift as i64);
            match base.as_ref() {
                FixtureKind::Naturals => naturals(n_lo, n_hi, q, s),
                FixtureKind::ExpNaturals => exp_naturals(n_lo, n_hi, q, s),
                FixtureKind::FullLattice { d: 1 } => full_lattice_1d(n_lo, n_hi, q, s),
                FixtureKind::FullLattice { d: 2 } => full_lattice_2d(n_lo, n_hi, q, s),
                FixtureKind::FullLattice { d } => Err(Error::input(format!(
                    "full lattice fixture supports d = 1 or 2, got {d}"
                ))),
                FixtureKind::Skeleton { theta } => skeleton_fixture(*theta, n_lo, n_hi, q, s),
                FixtureKind::AffineImage { .. } => Err(Error::input(
                    "affine image of an affine image is not supported; compose the coefficients",
                )),
            }
        }
    }
}

/// Largest image cell q*z + s reachable within shell n_hi must stay exactly
/// representable.
fn check_affine_extent(q: i64, s: i64, n_hi: u32) -> Result<()> {
    let (_, hi) = shell_bounds_pos(n_hi);
    let extent = q as i128 * hi as i128 + s as i128;
    if q > 1 && extent > MAX_EXACT_CELL {
        return Err(Error::input(format!(
            "affine fixture cells up to {extent} exceed the exactly representable range; \
             lower the shell range"
        )));
    }
    if extent > i64::MAX as i128 {
        return Err(Error::input(format!(
            "affine fixture cells up to {extent} overflow the cell index range"
        )));
    }
    Ok(())
}

/// Image of {1, 2, 3, ...} under z -> q z + s, bucketed by shell. Closed
/// form per shell: a run when q = 1, an arithmetic progression otherwise.
fn naturals(n_lo: u32, n_hi: u32, q: i64, s: i64) -> Result<PixelSet> {
    check_affine_extent(q, s, n_hi)?;
    let mut set = PixelSet::new(1, 1.0, Ambient::HalfLine);
    for n in n_lo.max(1)..=n_hi {
        let (lo, hi) = shell_bounds_pos(n);
        // Image cells q k + s with k >= 1 inside [lo, hi].
        let k_lo = ((lo - s).max(q) + q - 1).div_euclid(q).max(1);
        let k_hi = (hi - s).div_euclid(q);
        if k_hi < k_lo {
            continue;
        }
        let count = (k_hi - k_lo + 1) as u64;
        let first = q * k_lo + s;
        if q == 1 {
            set.insert_runs_shell(n, vec![CellRun { start: first, len: count }]);
        } else {
            set.insert_arith_shell(n, first as f64, q as f64, count);
        }
    }
    Ok(set)
}

/// Image of {e^k : k >= 1} under x -> q x + s: at most one cell per shell.
fn exp_naturals(n_lo: u32, n_hi: u32, q: i64, s: i64) -> Result<PixelSet> {
    let mut b = RunShellBuilder::new(1.0);
    for k in 1..=(MAX_FIXTURE_SHELL + 3) {
        let y = (q as f64) * shell_exp(k) + s as f64;
        if y >= 9.0e18 {
            break; // cell index would overflow; its shell exceeds any valid n_hi
        }
        // Membership is decided by the cell holding the point, which can sit
        // one shell below the point itself at a boundary.
        let z = y.floor() as i64;
        let shell = shell_of(&[z as f64]);
        if shell > n_hi {
            break;
        }
        if shell >= n_lo {
            b.push(z);
        }
    }
    Ok(b.into_pixel_set(Ambient::HalfLine))
}

/// Image of Z under z -> q z + s. Closed-form runs when q = 1; otherwise
/// two interleaved progressions per shell (negative and positive side)
/// force explicit singleton cells, under the materialization budget.
fn full_lattice_1d(n_lo: u32, n_hi: u32, q: i64, s: i64) -> Result<PixelSet> {
    check_affine_extent(q, s, n_hi)?;
    let mut set = PixelSet::new(1, 1.0, Ambient::FullLine);
    if q == 1 {
        // The shift maps Z onto Z: every cell occupied, as runs.
        for n in n_lo..=n_hi {
            if n == 0 {
                set.insert_runs_shell(0, vec![CellRun { start: -1, len: 2 }]);
                continue;
            }
            let (nlo, nhi) = shell_bounds_neg(n);
            let (plo, phi) = shell_bounds_pos(n);
            set.insert_runs_shell(
                n,
                vec![
                    CellRun { start: nlo, len: (nhi - nlo + 1) as u64 },
                    CellRun { start: plo, len: (phi - plo + 1) as u64 },
                ],
            );
        }
        return Ok(set);
    }
    // q >= 2: cells q k + s over all integer k, restricted per shell.
    let (_, top) = shell_bounds_pos(n_hi);
    let span = (2 * top as i128 + 1) as u64 / q as u64 + 2;
    if span > FIXTURE_CELL_BUDGET {
        return Err(Error::Resource {
            reason: "scaled full-lattice fixture cells".into(),
            requested: span,
            budget: FIXTURE_CELL_BUDGET,
        });
    }
    let mut b = RunShellBuilder::new(1.0);
    let k_min = (-top - s).div_euclid(q);
    let k_max = (top - s).div_euclid(q);
    for k in k_min..=k_max {
        let z = q * k + s;
        let shell = shell_of(&[z as f64]);
        if shell >= n_lo && shell <= n_hi {
            b.push(z);
        }
    }
    Ok(b.into_pixel_set(Ambient::FullLine))
}

/// Image of Z^2 under z -> q z + (s, s), materialized under the budget.
fn full_lattice_2d(n_lo: u32, n_hi: u32, q: i64, s: i64) -> Result<PixelSet> {
    check_affine_extent(q, s, n_hi)?;
    let (_, top) = shell_bounds_pos(n_hi);
    let side = (2 * top as i128 + 2) as u64 / q as u64 + 2;
    let total = side.saturating_mul(side);
    if total > FIXTURE_CELL_BUDGET {
        return Err(Error::Resource {
            reason: "planar lattice fixture cells".into(),
            requested: total,
            budget: FIXTURE_CELL_BUDGET,
        });
    }
    let k_min = (-top - 1 - s).div_euclid(q);
    let k_max = (top - s).div_euclid(q);
    let mut cells = Vec::new();
    for k0 in k_min..=k_max {
        let z0 = q * k0 + s;
        for k1 in k_min..=k_max {
            let z1 = q * k1 + s;
            let shell = shell_of(&[z0 as f64, z1 as f64]);
            if shell >= n_lo && shell <= n_hi {
                cells.push([z0, z1]);
            }
        }
    }
    Ok(PixelSet::from_cells_2d(cells, 1.0))
}

/// Layers contributing to shells `n_lo ..= n_hi` under x -> q x + s, with
/// their per-layer anchor index ranges (trimmed: layer n >= 1 drops j = 0).
fn skeleton_layers(sk: &Skeleton, q: i64, s: i64, n_hi: u32) -> Vec<(u32, u64, u64)> {
    let mut out = Vec::new();
    for n in 0..=n_hi {
        let start = (q as f64) * sk.layer_base(n) + s as f64;
        // A layer whose first point already sits two shells past the range
        // cannot contribute a cell (a cell sits at most one shell below its
        // point); anything earlier might still reach shell n_hi.
        if start >= 9.0e18 || shell_of(&[start]) > n_hi + 1 {
            break;
        }
        let j0 = if n == 0 { 0 } else { 1 };
        let count = sk.layer_count_1d(n);
        if count > j0 || (n == 0 && count > 0) {
            out.push((n, j0, count));
        }
    }
    out
}

/// Trimmed theta-skeleton anchors under x -> q x + s. The direct fixture
/// (q = 1, s = 0) keeps each layer as one lazy arithmetic progression in
/// shell n+1; scaled images straddle shell boundaries and are materialized
/// under the budget.
fn skeleton_fixture(theta: f64, n_lo: u32, n_hi: u32, q: i64, s: i64) -> Result<PixelSet> {
    let sk = build_skeleton(theta, 1, n_hi.max(1))?;
    let mut set = PixelSet::new(1, 1.0, Ambient::HalfLine);
    if q == 1 && s == 0 {
        // Layer n populates exactly shell n+1 after trimming.
        for n in n_lo.max(1)..=n_hi {
            let layer = n - 1;
            let j0 = if layer == 0 { 0u64 } else { 1 };
            let count = sk.layer_count_1d(layer);
            if count <= j0 && layer > 0 {
                continue;
            }
            let kept = count - j0;
            let step = sk.layer_spacing(layer);
            let first = sk.layer_point_1d(layer, j0);
            if step >= 2.0 {
                set.insert_arith_shell(n, first, step, kept);
            } else {
                // Small layers (spacing in [1, 2)) are materialized.
                let cells: Vec<i64> = (j0..count)
                    .map(|j| sk.layer_point_1d(layer, j).floor() as i64)
                    .collect();
                let mut runs: Vec<CellRun> = Vec::new();
                for z in cells {
                    match runs.last_mut() {
                        Some(r) if r.end() == z => r.len += 1,
                        Some(r) if r.end() > z => {} // duplicate floor
                        _ => runs.push(CellRun { start: z, len: 1 }),
                    }
                }
                set.insert_runs_shell(n, runs);
            }
        }
        return Ok(set);
    }
    // Affine image: materialize, filtering per cell.
    let layers = skeleton_layers(&sk, q, s, n_hi);
    let total: u64 = layers.iter().map(|&(_, j0, c)| c - j0).sum();
    if total > FIXTURE_CELL_BUDGET {
        return Err(Error::Resource {
            reason: "scaled skeleton fixture cells".into(),
            requested: total,
            budget: FIXTURE_CELL_BUDGET,
        });
    }
    let mut b = RunShellBuilder::new(1.0);
    for (layer, j0, count) in layers {
        for j in j0..count {
            let y = (q as f64) * sk.layer_point_1d(layer, j) + s as f64;
            if y >= 9.0e18 {
                break; // cell index would overflow; shell exceeds any valid n_hi
            }
            let z = y.floor() as i64;
            let shell = shell_of(&[z as f64]);
            if shell >= n_lo && shell <= n_hi {
                b.push(z);
            }
        }
    }
    Ok(b.into_pixel_set(Ambient::HalfLine))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::is_theta_thick;

    #[test]
    fn shell_bounds_match_bruteforce() {
        let mut expect_pos: std::collections::BTreeMap<u32, (i64, i64)> = Default::default();
        let mut expect_neg: std::collections::BTreeMap<u32, (i64, i64)> = Default::default();
        let top = shell_exp(12).ceil() as i64 + 2;
        for z in -top..=top {
            let n = shell_of(&[z as f64]);
            if n > 12 {
                continue;
            }
            let slot = if z < 0 {
                expect_neg.entry(n).or_insert((z, z))
            } else {
                expect_pos.entry(n).or_insert((z, z))
            };
            slot.0 = slot.0.min(z);
            slot.1 = slot.1.max(z);
        }
        for n in 0..=12u32 {
            assert_eq!(shell_bounds_pos(n), expect_pos[&n], "pos bounds shell {n}");
            assert_eq!(shell_bounds_neg(n), expect_neg[&n], "neg bounds shell {n}");
        }
    }

    #[test]
    fn naturals_frozen() {
        let set = fixture_set(&FixtureKind::Naturals, 0, 10).unwrap();
        assert_eq!(set.ambient(), Ambient::HalfLine);
        assert_eq!(set.occupied_shells(), (1..=10).collect::<Vec<_>>());
        // Cells are exactly {1, ..., floor(e^10)}.
        let total: u64 = set.shells().map(|(_, c)| c.count()).sum();
        assert_eq!(total, shell_exp(10).floor() as u64);
        let (lo, hi) = set.shell(3).unwrap().extent_1d();
        assert_eq!((lo, hi), (8, 21)); // cells 8..=20
    }

    #[test]
    fn exp_naturals_frozen() {
        let set = fixture_set(&FixtureKind::ExpNaturals, 0, 10).unwrap();
        let mut cells = Vec::new();
        for (n, c) in set.shells() {
            let cs = c.cells_1d();
            assert_eq!(cs.len(), 1, "one cell per shell");
            assert_eq!(n, shell_of(&[cs[0] as f64]));
            cells.extend(cs);
        }
        assert_eq!(cells, vec![2, 7, 20, 54, 148, 403, 1096, 2980, 8103, 22026]);
    }

    #[test]
    fn full_lattice_1d_counts() {
        let set = fixture_set(&FixtureKind::FullLattice { d: 1 }, 0, 4).unwrap();
        assert_eq!(set.ambient(), Ambient::FullLine);
        let total: u64 = set.shells().map(|(_, c)| c.count()).sum();
        // All z with corner in V_4: -floor(e^4) ..= ceil(e^4) - 1.
        let expect = (shell_exp(4).floor() + shell_exp(4).ceil()) as u64;
        assert_eq!(total, expect);
        for (n, c) in set.shells() {
            for z in c.cells_1d() {
                assert_eq!(shell_of(&[z as f64]), n);
            }
        }
    }

    #[test]
    fn full_lattice_2d_counts_and_budget() {
        let set = fixture_set(&FixtureKind::FullLattice { d: 2 }, 0, 3).unwrap();
        let total: u64 = set.shells().map(|(_, c)| c.count()).sum();
        let side = (shell_exp(3).floor() + shell_exp(3).ceil()) as u64;
        assert_eq!(total, side * side);
        assert!(matches!(
            fixture_set(&FixtureKind::FullLattice { d: 2 }, 0, 9),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn skeleton_fixture_counts_and_thickness() {
        let theta = 0.5;
        let set = fixture_set(&FixtureKind::Skeleton { theta }, 0, 12).unwrap();
        let sk = build_skeleton(theta, 1, 12).unwrap();
        assert_eq!(set.shell(1).unwrap().count(), 1); // layer 0's single anchor
        for n in 2..=12u32 {
            assert_eq!(
                set.shell(n).unwrap().count(),
                sk.layer_count_1d(n - 1) - 1,
                "shell {n}"
            );
        }
        // The trimmed fixture still meets every anchor box of its own
        // skeleton: each dropped base anchor's box is caught by the next
        // anchor's cell.
        let w = is_theta_thick(&set, &sk, 0, 11).unwrap();
        assert_eq!(w, None);
    }

    #[test]
    fn skeleton_fixture_small_theta_materialized() {
        // theta n < ln 2 forces materialized layers; counts must still match.
        let theta = 0.25;
        let set = fixture_set(&FixtureKind::Skeleton { theta }, 0, 8).unwrap();
        let sk = build_skeleton(theta, 1, 8).unwrap();
        for n in 2..=8u32 {
            assert_eq!(
                set.shell(n).unwrap().count(),
                sk.layer_count_1d(n - 1) - 1,
                "shell {n}"
            );
        }
        let w = is_theta_thick(&set, &sk, 0, 7).unwrap();
        assert_eq!(w, None);
    }

    #[test]
    fn affine_naturals_arith() {
        let kind = FixtureKind::AffineImage {
            base: Box::new(FixtureKind::Naturals),
            scale: 2,
            shift: 5,
        };
        let set = fixture_set(&kind, 0, 12).unwrap();
        let cells = set.shell(4).unwrap().cells_1d();
        let expect: Vec<i64> = (8..=24).map(|k| 2 * k + 5).collect();
        assert_eq!(cells, expect);
        for (n, c) in set.shells() {
            let cs = c.cells_1d();
            assert_eq!(shell_of(&[cs[0] as f64]), n);
            assert_eq!(shell_of(&[*cs.last().unwrap() as f64]), n);
        }
    }

    #[test]
    fn affine_naturals_shift_only() {
        let kind = FixtureKind::AffineImage {
            base: Box::new(FixtureKind::Naturals),
            scale: 1,
            shift: 5,
        };
        let set = fixture_set(&kind, 0, 8).unwrap();
        // Cells are {6, 7, 8, ...} resticted to the shells.
        let (lo, _) = set.shell(2).unwrap().extent_1d();
        assert_eq!(lo, 6.max(shell_bounds_pos(2).0));
        let total: u64 = set.shells().map(|(_, c)| c.count()).sum();
        assert_eq!(total, (shell_bounds_pos(8).1 - 5) as u64);
    }

    #[test]
    fn affine_exp_naturals() {
        let kind = FixtureKind::AffineImage {
            base: Box::new(FixtureKind::ExpNaturals),
            scale: 3,
            shift: 0,
        };
        let set = fixture_set(&kind, 0, 12).unwrap();
        let mut cells = Vec::new();
        for (_, c) in set.shells() {
            cells.extend(c.cells_1d());
        }
        let expect: Vec<i64> = (1..=10)
            .map(|k| (3.0 * shell_exp(k)).floor() as i64)
            .collect();
        assert_eq!(cells, expect);
    }

    #[test]
    fn affine_full_lattice_1d() {
        let kind = FixtureKind::AffineImage {
            base: Box::new(FixtureKind::FullLattice { d: 1 }),
            scale: 2,
            shift: 0,
        };
        let set = fixture_set(&kind, 0, 6).unwrap();
        let mut count = 0u64;
        let top = shell_exp(6).ceil() as i64;
        for z in -top..=top {
            if z % 2 == 0 && shell_of(&[z as f64]) <= 6 {
                count += 1;
            }
        }
        let total: u64 = set.shells().map(|(_, c)| c.count()).sum();
        assert_eq!(total, count);
    }

    #[test]
    fn affine_skeleton_matches_bruteforce() {
        let kind = FixtureKind::AffineImage {
            base: Box::new(FixtureKind::Skeleton { theta: 0.5 }),
            scale: 2,
            shift: 0,
        };
        let set = fixture_set(&kind, 0, 14).unwrap();
        let sk = build_skeleton(0.5, 1, 14).unwrap();
        let mut expect = Vec::new();
        for n in 0..=14u32 {
            let j0 = if n == 0 { 0 } else { 1 };
            for j in j0..sk.layer_count_1d(n) {
                let z = (2.0 * sk.layer_point_1d(n, j)).floor() as i64;
                if shell_of(&[z as f64]) <= 14 {
                    expect.push(z);
                }
            }
        }
        expect.dedup();
        let mut got = Vec::new();
        for (_, c) in set.shells() {
            got.extend(c.cells_1d());
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            fixture_set(&FixtureKind::Naturals, 5, 4),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            fixture_set(&FixtureKind::Naturals, 0, MAX_FIXTURE_SHELL + 1),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            fixture_set(&FixtureKind::FullLattice { d: 3 }, 0, 5),
            Err(Error::Input(_))
        ));
        let nested = FixtureKind::AffineImage {
            base: Box::new(FixtureKind::AffineImage {
                base: Box::new(FixtureKind::Naturals),
                scale: 2,
                shift: 0,
            }),
            scale: 2,
            shift: 0,
        };
        assert!(matches!(fixture_set(&nested, 0, 5), Err(Error::Input(_))));
        let zero_scale = FixtureKind::AffineImage {
            base: Box::new(FixtureKind::Naturals),
            scale: 0,
            shift: 0,
        };
        assert!(matches!(
            fixture_set(&zero_scale, 0, 5),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn scaled_lattice_budget_refusal() {
        let kind = FixtureKind::AffineImage {
            base: Box::new(FixtureKind::FullLattice { d: 1 }),
            scale: 2,
            shift: 0,
        };
        assert!(matches!(
            fixture_set(&kind, 0, 25),
            Err(Error::Resource { .. })
        ));
    }
}
