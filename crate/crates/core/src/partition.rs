//! Randomly shifted hierarchical grids.
//!
//! Level `L` is a single root cell; each level below refines every cell
//! side by the integer factor `alpha_grid`. A cell is identified by the
//! floor of the shifted coordinates divided by that level's side length,
//! so membership is computable from a point, a level and the shift alone.

use std::collections::BTreeMap;

use rand::Rng;

use crate::{Error, Metric, PointSet, Result, Seed};

/// Largest finest-level grid index we allow, keeping every integer
/// coordinate exactly representable in an `f64`.
const MAX_FINE_CELLS: f64 = (1u64 << 52) as f64;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionParams {
    /// Per-level refinement factor; an integer `≥ 2` so that grids nest.
    pub alpha_grid: f64,
    /// Number of levels `L`; cells exist at levels `0..=L`.
    pub levels: usize,
    /// Side `Δ` of the root cell.
    pub bbox_side: f64,
    /// Ratio between a cell's metric diameter and its side length.
    pub gamma: f64,
    /// Coefficient of the cut-probability bound `b·ρ(x, y)/Δ_ℓ`.
    pub b_cut: f64,
}

impl PartitionParams {
    pub fn for_metric(
        metric: Metric,
        dim: usize,
        alpha_grid: f64,
        levels: usize,
        bbox_side: f64,
    ) -> Result<Self> {
        let d = dim as f64;
        let (gamma, b_cut) = match metric {
            Metric::L2 => (d.sqrt(), d),
            Metric::L1 => (d, d * d),
            Metric::Linf => (1.0, d),
            Metric::L0 => {
                return Err(Error::UnsupportedMetric {
                    metric,
                    operation: "grid partition",
                })
            }
        };
        if !(alpha_grid >= 2.0) || alpha_grid.fract() != 0.0 {
            return Err(Error::input(format!(
                "alpha_grid must be an integer >= 2, got {alpha_grid}"
            )));
        }
        if levels == 0 {
            return Err(Error::input("partition needs at least one level"));
        }
        if alpha_grid.powi(levels as i32) > MAX_FINE_CELLS {
            return Err(Error::input(format!(
                "alpha_grid^levels = {alpha_grid}^{levels} exceeds 2^52"
            )));
        }
        if !(bbox_side > 0.0) || !bbox_side.is_finite() {
            return Err(Error::input(format!("invalid bbox side {bbox_side}")));
        }
        Ok(PartitionParams {
            alpha_grid,
            levels,
            bbox_side,
            gamma,
            b_cut,
        })
    }

    /// Parameters whose root cell holds `ps` with room for the random shift:
    /// the side below the root is the smallest power of `alpha_grid` that is
    /// at least the coordinate spread, and the root is `alpha_grid` times
    /// that. Identical points get a single-level partition.
    pub fn fit(ps: &PointSet, alpha_grid: f64, levels: usize) -> Result<Self> {
        let spread = spread(ps);
        if spread == 0.0 {
            return Self::for_metric(ps.metric(), ps.dim(), alpha_grid, 1, 1.0);
        }
        let mut below_root = alpha_grid.powi(spread.log(alpha_grid).ceil() as i32);
        while below_root < spread {
            below_root *= alpha_grid;
        }
        while below_root / alpha_grid >= spread {
            below_root /= alpha_grid;
        }
        Self::for_metric(
            ps.metric(),
            ps.dim(),
            alpha_grid,
            levels,
            alpha_grid * below_root,
        )
    }

    /// `Δ_ℓ = γ · alpha_grid^{-(L-ℓ)} · diam_s`.
    pub fn level_diameter(&self, level: usize, diam_s: f64) -> f64 {
        let steps = self.levels.saturating_sub(level) as i32;
        self.gamma * self.alpha_grid.powi(-steps) * diam_s
    }

    /// Side length of cells at `level`.
    pub fn cell_side(&self, level: usize) -> f64 {
        let steps = self.levels.saturating_sub(level) as i32;
        self.bbox_side * self.alpha_grid.powi(-steps)
    }

    /// Number of finest cells along one axis of the root.
    fn fine_per_axis(&self) -> i64 {
        self.alpha_grid.powi(self.levels as i32) as i64
    }
}

/// `L = max(1, ⌈log_α n⌉)`.
pub fn default_levels(n: usize, alpha_grid: f64) -> usize {
    if n <= 1 {
        return 1;
    }
    ((n as f64).ln() / alpha_grid.ln()).ceil().max(1.0) as usize
}

/// Grid refinement factor tied to the machine space: `s^{α/d} − 1`, rounded
/// down and clamped to at least 2.
pub fn alpha_grid_from_space(space_s: usize, alpha_exp: f64, dim: usize) -> f64 {
    // The nudge keeps exact powers such as 2^(20·0.1) from flooring one low.
    ((space_s as f64).powf(alpha_exp / dim as f64) - 1.0 + 1e-9)
        .floor()
        .max(2.0)
}

fn spread(ps: &PointSet) -> f64 {
    ps.bounds()
        .iter()
        .map(|(lo, hi)| hi - lo)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub level: usize,
    pub coords: Vec<i64>,
}

/// One sampled hierarchical partition. Immutable; every query is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalPartition {
    params: PartitionParams,
    origin: Vec<f64>,
    shift: Vec<f64>,
    seed: Option<Seed>,
}

impl HierarchicalPartition {
    /// A partition with an explicit grid origin and shift. Cell coordinates
    /// are `⌊(x_i − origin_i − shift_i)·α^{L−ℓ}/Δ⌋`.
    pub fn with_shift(params: PartitionParams, origin: Vec<f64>, shift: Vec<f64>) -> Result<Self> {
        if origin.len() != shift.len() {
            return Err(Error::input("origin and shift dimensions differ"));
        }
        Ok(HierarchicalPartition {
            params,
            origin,
            shift,
            seed: None,
        })
    }

    pub fn params(&self) -> &PartitionParams {
        &self.params
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn seed(&self) -> Option<Seed> {
        self.seed
    }

    pub fn levels(&self) -> usize {
        self.params.levels
    }

    /// `Δ_ℓ` measured against the root side.
    pub fn level_diameter(&self, level: usize) -> f64 {
        self.params.level_diameter(level, self.params.bbox_side)
    }

    /// Integer coordinates of the level-0 cell containing `x`.
    pub fn finest_coords(&self, x: &[f64]) -> Vec<i64> {
        let p = &self.params;
        let fine = p.fine_per_axis();
        let scale = fine as f64 / p.bbox_side;
        x.iter()
            .zip(&self.origin)
            .zip(&self.shift)
            .map(|((&xi, &o), &r)| {
                let c = ((xi - o - r) * scale).floor();
                // Points on the far face of the root box belong to the last
                // cell rather than a second root.
                (c.clamp(-(MAX_FINE_CELLS), MAX_FINE_CELLS) as i64).min(fine - 1)
            })
            .collect()
    }

    /// Coarsens level-0 coordinates to `level`.
    pub fn coarsen(&self, finest: &[i64], level: usize) -> Vec<i64> {
        let factor = (self.params.alpha_grid as i64).pow(level as u32);
        finest.iter().map(|c| c.div_euclid(factor)).collect()
    }

    pub fn cell_id(&self, x: &[f64], level: usize) -> Result<CellId> {
        if level > self.params.levels {
            return Err(Error::input(format!(
                "level {level} outside 0..={}",
                self.params.levels
            )));
        }
        if x.len() != self.shift.len() {
            return Err(Error::input("point dimension differs from partition"));
        }
        Ok(CellId {
            level,
            coords: self.coarsen(&self.finest_coords(x), level),
        })
    }

    /// Nonempty cells at `level`, each with its member point ids ascending.
    pub fn cells_at_level(&self, ps: &PointSet, level: usize) -> Result<BTreeMap<CellId, Vec<usize>>> {
        let mut cells: BTreeMap<CellId, Vec<usize>> = BTreeMap::new();
        for i in 0..ps.len() {
            cells.entry(self.cell_id(ps.point(i), level)?).or_default().push(i);
        }
        Ok(cells)
    }
}

/// Samples a shifted grid for `ps`.
///
/// The grid origin sits `(α−1)·Δ/α` below the minimum corner of the data
/// and the shift is uniform on `[0, (α−1)·Δ/α)` per axis. Every point then
/// lands in the single root cell, and below the root the offset is uniform
/// modulo each level's side length.
pub fn sample_partition(
    ps: &PointSet,
    params: &PartitionParams,
    seed: Seed,
) -> Result<HierarchicalPartition> {
    let below_root = params.bbox_side / params.alpha_grid;
    let headroom = (params.alpha_grid - 1.0) * below_root;
    let bounds = ps.bounds();
    if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| hi - lo > below_root) {
        return Err(Error::input(format!(
            "coordinate spread {} exceeds the sub-root side {below_root}",
            hi - lo
        )));
    }
    let mut rng = seed.stream("partition/shift");
    let origin = bounds.iter().map(|(lo, _)| lo - headroom).collect();
    let shift = (0..ps.dim()).map(|_| rng.random::<f64>() * headroom).collect();
    Ok(HierarchicalPartition {
        params: params.clone(),
        origin,
        shift,
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    fn unit_square(n: usize, seed: u64) -> PointSet {
        let mut r = rng_stream(Seed(seed), "pts");
        PointSet::new(
            (0..n).map(|_| vec![r.random::<f64>(), r.random::<f64>()]).collect(),
            Metric::L2,
        )
        .unwrap()
    }

    #[test]
    fn forced_zero_shift_floor() {
        let params = PartitionParams::for_metric(Metric::L2, 2, 2.0, 1, 1.0).unwrap();
        let p = HierarchicalPartition::with_shift(params, vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(p.cell_id(&[0.3, 0.7], 0).unwrap().coords, vec![0, 1]);
        assert_eq!(p.cell_id(&[0.3, 0.7], 1).unwrap().coords, vec![0, 0]);
        assert!(p.cell_id(&[0.3, 0.7], 2).is_err());
    }

    #[test]
    fn singleton_has_one_cell_per_level() {
        let ps = PointSet::new(vec![vec![0.25, -3.0]], Metric::L1).unwrap();
        let params = PartitionParams::fit(&ps, 2.0, 4).unwrap();
        let p = sample_partition(&ps, &params, Seed(1)).unwrap();
        for l in 0..=p.levels() {
            assert_eq!(p.cells_at_level(&ps, l).unwrap().len(), 1);
        }
    }

    #[test]
    fn root_is_single_cell() {
        let ps = unit_square(500, 2);
        let params = PartitionParams::fit(&ps, 2.0, 6).unwrap();
        for s in 0..50 {
            let p = sample_partition(&ps, &params, Seed(s)).unwrap();
            assert_eq!(p.cells_at_level(&ps, 6).unwrap().len(), 1);
        }
    }

    #[test]
    fn nesting_holds() {
        let ps = unit_square(1000, 3);
        let params = PartitionParams::fit(&ps, 3.0, 5).unwrap();
        let p = sample_partition(&ps, &params, Seed(9)).unwrap();
        let ids: Vec<Vec<CellId>> = ps
            .iter()
            .map(|x| (0..=5).map(|l| p.cell_id(x, l).unwrap()).collect())
            .collect();
        for a in 0..ps.len() {
            for b in (a + 1)..ps.len().min(a + 60) {
                for l in 0..=5 {
                    if ids[a][l] == ids[b][l] {
                        for m in l..=5 {
                            assert_eq!(ids[a][m], ids[b][m]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn level_diameter_formula() {
        let params = PartitionParams {
            alpha_grid: 2.0,
            levels: 3,
            bbox_side: 1.0,
            gamma: 1.0,
            b_cut: 1.0,
        };
        assert_eq!(params.level_diameter(1, 8.0), 2.0);
        assert_eq!(params.level_diameter(3, 8.0), 8.0);
        let l2 = PartitionParams::for_metric(Metric::L2, 4, 2.0, 3, 1.0).unwrap();
        assert_eq!(l2.level_diameter(3, 5.0), 10.0);
    }

    #[test]
    fn far_points_are_separated() {
        let ps = unit_square(300, 4);
        let params = PartitionParams::fit(&ps, 2.0, 5).unwrap();
        let p = sample_partition(&ps, &params, Seed(4)).unwrap();
        for l in 0..=5 {
            let side = params.cell_side(l);
            for a in 0..50 {
                for b in 0..50 {
                    if Metric::Linf.eval(ps.point(a), ps.point(b)) > side {
                        assert_ne!(p.cell_id(ps.point(a), l).unwrap(), p.cell_id(ps.point(b), l).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn metric_constants() {
        let p = PartitionParams::for_metric(Metric::L1, 3, 2.0, 2, 1.0).unwrap();
        assert_eq!((p.gamma, p.b_cut), (3.0, 9.0));
        let p = PartitionParams::for_metric(Metric::Linf, 3, 2.0, 2, 1.0).unwrap();
        assert_eq!((p.gamma, p.b_cut), (1.0, 3.0));
        let p = PartitionParams::for_metric(Metric::L2, 4, 2.0, 2, 1.0).unwrap();
        assert_eq!((p.gamma, p.b_cut), (2.0, 4.0));
        assert!(PartitionParams::for_metric(Metric::L0, 3, 2.0, 2, 1.0).is_err());
        assert!(PartitionParams::for_metric(Metric::L2, 3, 2.5, 2, 1.0).is_err());
    }

    #[test]
    fn degenerate_identical_points() {
        let ps = PointSet::new(vec![vec![1.0, 1.0]; 5], Metric::L2).unwrap();
        let params = PartitionParams::fit(&ps, 2.0, 8).unwrap();
        assert_eq!(params.levels, 1);
        let p = sample_partition(&ps, &params, Seed(0)).unwrap();
        assert_eq!(p.cells_at_level(&ps, 0).unwrap().len(), 1);
    }

    #[test]
    fn helpers() {
        assert_eq!(default_levels(1, 2.0), 1);
        assert_eq!(default_levels(2000, 2.0), 11);
        assert_eq!(alpha_grid_from_space(1 << 20, 0.3, 3), 3.0);
        assert_eq!(alpha_grid_from_space(100, 0.1, 3), 2.0);
    }
}
