//! Exact Hamming MST for small dimension.
//!
//! For every coordinate mask `b`, points are sorted by their projection
//! onto `b` and consecutive points with equal projections are linked with
//! weight `d − |b|`. In the resulting auxiliary graph two points are joined
//! by edges of weight at most `t` exactly when their Hamming distance is at
//! most `t`, so growing a spanning forest threshold by threshold gives an
//! exact MST.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{DisjointSets, Edge, SpanningTree, WeightedEdgeList};
use crate::mpc::{boruvka_mst, connected_components, distributed_sort, MpcConfig, MpcTrace};
use crate::slc::{k_slc_from_mst, Clustering};
use crate::{Error, Metric, PointSet, Result};

pub const MAX_DIM: usize = 20;

/// Default machine size for `n` points in dimension `d`: room for every
/// mask's links in the coordinator.
pub fn default_config(n: usize, d: usize) -> MpcConfig {
    MpcConfig::sized_for(n, d).with_graph_room(n, n << d.min(MAX_DIM))
}

/// A coordinate subset and the weight of links made by sorting on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskProjection {
    pub mask: u32,
    pub weight_if_linked: u32,
}

impl MaskProjection {
    pub fn new(mask: u32, dim: usize) -> Self {
        MaskProjection {
            mask,
            weight_if_linked: dim as u32 - mask.count_ones(),
        }
    }

    pub fn project(&self, x: &[f64]) -> Vec<i64> {
        x.iter()
            .enumerate()
            .filter(|(k, _)| self.mask >> k & 1 == 1)
            .map(|(_, &v)| v as i64)
            .collect()
    }
}

fn check_input(ps: &PointSet) -> Result<()> {
    if ps.metric() != Metric::L0 {
        return Err(Error::UnsupportedMetric {
            metric: ps.metric(),
            operation: "hamming_mst (expects l0)",
        });
    }
    if !ps.is_integral() {
        return Err(Error::input("Hamming MST needs integer coordinates"));
    }
    if ps.dim() > MAX_DIM {
        return Err(Error::input(format!(
            "Hamming MST supports d <= {MAX_DIM}, got {}",
            ps.dim()
        )));
    }
    Ok(())
}

/// Sorts by every mask projection (all masks side by side) and links
/// consecutive equal projections. Ties within a projection keep point order.
pub fn auxiliary_graph(ps: &PointSet, cfg: &MpcConfig) -> Result<(WeightedEdgeList, MpcTrace)> {
    check_input(ps)?;
    let d = ps.dim();
    let per_mask: Vec<(Vec<Edge>, MpcTrace)> = (0..1u32 << d)
        .into_par_iter()
        .map(|mask| {
            let mp = MaskProjection::new(mask, d);
            let items: Vec<(Vec<i64>, usize)> = (0..ps.len()).map(|i| (mp.project(ps.point(i)), i)).collect();
            let (sorted, trace) = distributed_sort(items, cfg, |it| it.0.len() + 1)?;
            let links = sorted
                .windows(2)
                .filter(|w| w[0].0 == w[1].0)
                .map(|w| Edge::new(w[0].1, w[1].1, mp.weight_if_linked as f64))
                .collect();
            Ok((links, trace))
        })
        .collect::<Result<_>>()?;
    let mut traces = Vec::with_capacity(per_mask.len());
    let mut edges = Vec::new();
    for (e, t) in per_mask {
        edges.extend(e);
        traces.push(t);
    }
    Ok((WeightedEdgeList::new(ps.len(), edges)?, MpcTrace::parallel(traces)))
}

/// A Hamming MST together with the traces of its stages.
#[derive(Debug, Clone)]
pub struct HammingRun {
    pub tree: SpanningTree,
    /// The per-mask sorts, side by side.
    pub sort_trace: MpcTrace,
    /// One Borůvka run per distance threshold that merged something.
    pub threshold_traces: Vec<MpcTrace>,
}

impl HammingRun {
    /// Sort rounds followed by every threshold's rounds.
    pub fn trace(&self) -> MpcTrace {
        let mut t = self.sort_trace.clone();
        for s in &self.threshold_traces {
            t.append(s.clone());
        }
        t
    }
}

/// Exact Hamming MST. Edge weights are Hamming distances.
pub fn hamming_mst(ps: &PointSet, cfg: &MpcConfig) -> Result<(SpanningTree, MpcTrace)> {
    let run = hamming_mst_run(ps, cfg)?;
    let trace = run.trace();
    Ok((run.tree, trace))
}

pub fn hamming_mst_run(ps: &PointSet, cfg: &MpcConfig) -> Result<HammingRun> {
    let (aux, sort_trace) = auxiliary_graph(ps, cfg)?;
    let mut threshold_traces = Vec::new();
    let n = ps.len();
    let d = ps.dim();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut forest = Vec::with_capacity(n.saturating_sub(1));
    for t in 0..=d {
        // Contract current components; keep the lowest original edge per
        // contracted pair so tree edges map back to real points.
        let mut witness: HashMap<(usize, usize), Edge> = HashMap::new();
        for e in aux.edges().iter().filter(|e| e.w == t as f64) {
            let (a, b) = (labels[e.u], labels[e.v]);
            if a == b {
                continue;
            }
            witness
                .entry((a.min(b), a.max(b)))
                .and_modify(|w| {
                    if (e.u, e.v) < (w.u, w.v) {
                        *w = *e
                    }
                })
                .or_insert(*e);
        }
        if witness.is_empty() {
            continue;
        }
        let contracted = WeightedEdgeList::new(n, witness.keys().map(|&(a, b)| Edge::new(a, b, t as f64)))?;
        let (step, step_trace) = boruvka_mst(&contracted, cfg)?;
        threshold_traces.push(step_trace);
        let mut dsu = DisjointSets::new(n);
        for e in step.edges() {
            let orig = witness[&(e.u, e.v)];
            debug_assert_eq!(ps.dist(orig.u, orig.v), t as f64);
            forest.push(Edge::new(orig.u, orig.v, ps.dist(orig.u, orig.v)));
            dsu.union(e.u, e.v);
        }
        let mut min_of = vec![usize::MAX; n];
        for &l in &labels {
            let r = dsu.find(l);
            min_of[r] = min_of[r].min(l);
        }
        for l in labels.iter_mut() {
            *l = min_of[dsu.find(*l)];
        }
    }
    Ok(HammingRun {
        tree: SpanningTree::new(n, forest)?,
        sort_trace,
        threshold_traces,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hamming2d {
    pub weight: usize,
    /// Components of the subgraph of equal-coordinate links.
    pub components: usize,
    pub distinct_points: usize,
    #[serde(skip)]
    pub trace: MpcTrace,
}

/// MST weight for `d = 2`: `n + c − 2`, where `c` counts components of
/// the graph linking points that share a coordinate and `n` counts
/// distinct points.
pub fn hamming_mst_2d(ps: &PointSet, cfg: &MpcConfig) -> Result<Hamming2d> {
    check_input(ps)?;
    if ps.dim() != 2 {
        return Err(Error::input(format!("the 2-D path needs d = 2, got {}", ps.dim())));
    }
    let n = ps.len();
    let xy: Vec<(i64, i64)> = ps.iter().map(|p| (p[0] as i64, p[1] as i64)).collect();
    let mut trace_parts = Vec::new();
    let mut links = Vec::new();
    for swap in [false, true] {
        let items: Vec<((i64, i64), usize)> = xy
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| (if swap { (y, x) } else { (x, y) }, i))
            .collect();
        let (sorted, t) = distributed_sort(items, cfg, |_| 3)?;
        trace_parts.push(t);
        links.extend(
            sorted
                .windows(2)
                .filter(|w| w[0].0 .0 == w[1].0 .0)
                .map(|w| Edge::new(w[0].1, w[1].1, 1.0)),
        );
    }
    let mut trace = MpcTrace::parallel(trace_parts);
    let g = WeightedEdgeList::new(n, links)?;
    let (labels, cc) = connected_components(&g, cfg)?;
    trace.append(cc);
    let components = labels.iter().enumerate().filter(|&(i, &l)| i == l).count();
    let mut distinct = xy.clone();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(Hamming2d {
        weight: distinct.len() + components - 2,
        components,
        distinct_points: distinct.len(),
        trace,
    })
}

pub fn hamming_k_slc(ps: &PointSet, k: usize, cfg: &MpcConfig) -> Result<Clustering> {
    let (tree, _) = hamming_mst(ps, cfg)?;
    k_slc_from_mst(&tree, k, ps.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::rng::{rng_stream, Seed};
    use rand::Rng;

    fn ham(rows: Vec<Vec<f64>>) -> PointSet {
        PointSet::new(rows, Metric::L0).unwrap()
    }

    fn random(n: usize, d: usize, q: i64, seed: u64) -> PointSet {
        let mut r = rng_stream(Seed(seed), "hamming");
        ham((0..n)
            .map(|_| (0..d).map(|_| r.random_range(0..q) as f64).collect())
            .collect())
    }

    fn cfg(n: usize, d: usize) -> MpcConfig {
        default_config(n, d)
    }

    #[test]
    fn three_points() {
        let ps = ham(vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![5.0, 5.0]]);
        let (t, _) = hamming_mst(&ps, &cfg(3, 2)).unwrap();
        assert_eq!(t.sorted_weights(), vec![1.0, 2.0]);
        assert_eq!(hamming_mst_2d(&ps, &cfg(3, 2)).unwrap().weight, 3);
    }

    #[test]
    fn identical_points_cost_nothing() {
        let ps = ham(vec![vec![1.0, 2.0, 3.0]; 5]);
        let (t, _) = hamming_mst(&ps, &cfg(5, 3)).unwrap();
        assert!(t.is_spanning_tree());
        assert_eq!(t.total_weight(), 0.0);
    }

    #[test]
    fn matches_kruskal() {
        for seed in 0..3 {
            let ps = random(300, 3, 3, seed);
            let (t, trace) = hamming_mst(&ps, &cfg(300, 3)).unwrap();
            assert_eq!(t.sorted_weights(), oracle::kruskal_mst(&ps).unwrap().sorted_weights());
            trace.check(&cfg(300, 3)).unwrap();
        }
    }

    #[test]
    fn two_d_examples() {
        let c = cfg(3, 2);
        let r = hamming_mst_2d(&ham(vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, 2.0]]), &c).unwrap();
        assert_eq!((r.components, r.weight), (1, 2));
        let r = hamming_mst_2d(&ham(vec![vec![0.0, 0.0], vec![1.0, 1.0]]), &c).unwrap();
        assert_eq!((r.components, r.weight), (2, 2));
        assert!(hamming_mst_2d(&random(4, 3, 2, 1), &c).is_err());
    }

    #[test]
    fn two_d_matches_general_path() {
        let ps = random(500, 2, 40, 7);
        let c = cfg(500, 2);
        let fast = hamming_mst_2d(&ps, &c).unwrap();
        let (t, _) = hamming_mst(&ps, &c).unwrap();
        assert_eq!(fast.weight as f64, t.total_weight());
    }

    #[test]
    fn threshold_components_and_paths() {
        let ps = random(80, 4, 2, 3);
        let (aux, _) = auxiliary_graph(&ps, &cfg(80, 4)).unwrap();
        for t in 0..=4 {
            let aux_pairs: Vec<_> = aux.edges().iter().filter(|e| e.w <= t as f64).map(|e| (e.u, e.v)).collect();
            let mut brute = Vec::new();
            for i in 0..80 {
                for j in i + 1..80 {
                    if ps.dist(i, j) <= t as f64 {
                        brute.push((i, j));
                    }
                }
            }
            assert_eq!(oracle::components(80, &aux_pairs), oracle::components(80, &brute));
        }
    }

    #[test]
    fn k_slc_matches_exhaustive() {
        let ps = random(9, 3, 3, 5);
        let c = hamming_k_slc(&ps, 3, &cfg(9, 3)).unwrap();
        assert_eq!(c.objective.unwrap(), oracle::exhaustive_slc(&ps, 3).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let c = cfg(2, 1);
        assert!(hamming_mst(&PointSet::new(vec![vec![0.5], vec![1.0]], Metric::L0).unwrap(), &c).is_err());
        assert!(hamming_mst(&PointSet::new(vec![vec![0.0], vec![1.0]], Metric::L2).unwrap(), &c).is_err());
    }
}
