//! The partition-based approximate MST pipeline and k-SLC extraction.
//!
//! Each repetition samples a shifted grid and walks it bottom-up: every
//! nonempty cell runs a unit step on the components handed up by its
//! children, emits tree edges and passes a covering with component labels
//! to its parent. The root merges whatever is left. Edges from all
//! repetitions are unioned and an exact Borůvka pass picks the final tree.

use std::collections::BTreeMap;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{DisjointSets, Edge, SpanningTree, WeightedEdgeList};
use crate::mpc::{boruvka_mst, run_level, Job, MpcConfig, MpcTrace};
use crate::partition::{default_levels, sample_partition, PartitionParams};
use crate::unitstep::{unit_step_with, ComponentState, UnitStepOutput};
use crate::{Error, Metric, PointSet, Result, Seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlcParams {
    pub eta: f64,
    /// Independent partitions to sample; `None` means `⌈log2 n⌉`.
    pub repetitions: Option<usize>,
    pub c1: f64,
    pub c2: f64,
    /// Integer grid refinement factor per level.
    pub alpha_grid: f64,
    /// Grid levels below the root; `None` means `⌈log_α n⌉`.
    pub levels: Option<usize>,
    /// Machine model; `None` sizes machines from the input.
    pub mpc: Option<MpcConfig>,
    pub seed: Seed,
}

impl SlcParams {
    pub fn new(eta: f64, seed: Seed) -> Self {
        SlcParams {
            eta,
            repetitions: None,
            c1: 1.0,
            c2: 1.0,
            alpha_grid: 2.0,
            levels: None,
            mpc: None,
            seed,
        }
    }

    pub fn repetitions_for(&self, n: usize) -> usize {
        self.repetitions.unwrap_or_else(|| ceil_log2(n).max(1))
    }

    /// The machine model used for `n` points of dimension `dim`.
    pub fn mpc_for(&self, n: usize, dim: usize) -> MpcConfig {
        self.mpc.unwrap_or_else(|| {
            let r = self.repetitions_for(n);
            MpcConfig::sized_for(n, dim).with_graph_room(n, r * n.saturating_sub(1))
        })
    }
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// `ε = min(η/(6·c1·L·b), η/(3·c2))`.
pub fn derive_eps(eta: f64, levels: usize, b: f64, c1: f64, c2: f64) -> Result<f64> {
    for (name, v) in [("eta", eta), ("levels", levels as f64), ("b", b), ("c1", c1), ("c2", c2)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::input(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if eta > 3.0 {
        warn!("eta = {eta} is above 3; the approximation guarantee only covers eta <= 3");
    }
    Ok((eta / (6.0 * c1 * levels as f64 * b)).min(eta / (3.0 * c2)))
}

#[derive(Debug, Clone)]
pub struct MstRun {
    pub tree: SpanningTree,
    /// Level rounds of all repetitions side by side.
    pub level_trace: MpcTrace,
    /// Level rounds of each repetition on its own.
    pub repetition_traces: Vec<MpcTrace>,
    pub boruvka_trace: MpcTrace,
    pub eps: f64,
    pub partition: PartitionParams,
    pub repetitions: usize,
    pub mpc: MpcConfig,
    /// Distinct edges in the union handed to Borůvka.
    pub sparsifier_edges: usize,
}

impl MstRun {
    /// Level rounds followed by the Borůvka rounds.
    pub fn trace(&self) -> MpcTrace {
        let mut t = self.level_trace.clone();
        t.append(self.boruvka_trace.clone());
        t
    }
}

/// Approximate MST of `ps` under `ℓ1`, `ℓ2` or `ℓ∞`. Edge weights are
/// exact distances between the endpoints.
pub fn approximate_mst(ps: &PointSet, params: &SlcParams) -> Result<MstRun> {
    if ps.metric() == Metric::L0 {
        return Err(Error::UnsupportedMetric {
            metric: Metric::L0,
            operation: "approximate_mst (use the hamming module)",
        });
    }
    let n = ps.len();
    let levels = params
        .levels
        .unwrap_or_else(|| default_levels(n, params.alpha_grid));
    let partition = PartitionParams::fit(ps, params.alpha_grid, levels).map_err(|e| e.context("slc"))?;
    let eps = derive_eps(params.eta, partition.levels, partition.b_cut, params.c1, params.c2)?;
    let repetitions = params.repetitions_for(n);
    if repetitions == 0 {
        return Err(Error::input("repetitions must be at least 1"));
    }
    let cfg = params.mpc_for(n, ps.dim());
    cfg.validate()?;

    let per_rep: Vec<(Vec<Edge>, MpcTrace)> = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let seed = params.seed.derive(&format!("repetition/{r}"));
            run_repetition(ps, &partition, eps, seed, &cfg)
        })
        .collect::<Result<_>>()?;

    let mut traces = Vec::with_capacity(repetitions);
    let mut union = Vec::new();
    for (edges, trace) in per_rep {
        union.extend(edges);
        traces.push(trace);
    }
    let level_trace = MpcTrace::parallel(traces.clone());
    let graph = WeightedEdgeList::new(n, union)?;
    let sparsifier_edges = graph.len();
    let (tree, boruvka_trace) = boruvka_mst(&graph, &cfg).map_err(|e| e.context("slc"))?;
    Ok(MstRun {
        tree,
        level_trace,
        repetition_traces: traces,
        boruvka_trace,
        eps,
        partition,
        repetitions,
        mpc: cfg,
        sparsifier_edges,
    })
}

/// One bottom-up pass over a freshly sampled grid, one round per level.
fn run_repetition(
    ps: &PointSet,
    pp: &PartitionParams,
    eps: f64,
    seed: Seed,
    cfg: &MpcConfig,
) -> Result<(Vec<Edge>, MpcTrace)> {
    let part = sample_partition(ps, pp, seed)?;
    let word = ps.dim() + 2;
    let alpha = pp.alpha_grid as i64;
    let top = part.levels();

    let mut members: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for i in 0..ps.len() {
        members.entry(part.finest_coords(ps.point(i))).or_default().push(i);
    }
    let mut cells: Vec<(Vec<i64>, ComponentState)> = members
        .into_iter()
        .map(|(k, ids)| (k, ComponentState::singletons(ids)))
        .collect();

    let mut edges = Vec::new();
    let mut trace = MpcTrace::new();
    for level in 0..=top {
        let delta = part.level_diameter(level);
        let (threshold, radius) = if level == top {
            (f64::INFINITY, 0.0)
        } else {
            (eps * delta, eps.min(1.0) * eps * delta)
        };
        let (keys, jobs): (Vec<_>, Vec<_>) = cells
            .into_iter()
            .map(|(k, st)| {
                let words = st.len() * word;
                (
                    k,
                    Job {
                        input_words: words,
                        work_words: 2 * words,
                        payload: st,
                    },
                )
            })
            .unzip();
        let started = std::time::Instant::now();
        let run = run_level(
            &jobs,
            cfg,
            |st| unit_step_with(st, threshold, radius, ps),
            |o: &UnitStepOutput| 2 * o.covering.len() + 3 * o.tree_edges.len(),
        )
        .map_err(|e| e.context("slc"))?;
        debug!(
            "level {level}: {} cells, {} machines, {:.2?}",
            jobs.len(),
            run.stats.machines,
            started.elapsed()
        );
        trace.push(run.stats, cfg)?;

        let mut parents: BTreeMap<Vec<i64>, Vec<ComponentState>> = BTreeMap::new();
        for (key, out) in keys.into_iter().zip(run.outputs) {
            edges.extend(out.tree_edges);
            let parent = key.iter().map(|c| c.div_euclid(alpha)).collect();
            parents.entry(parent).or_default().push(out.induced);
        }
        cells = parents
            .into_iter()
            .map(|(k, parts)| (k, ComponentState::merge_all(parts)))
            .collect();
    }
    Ok((edges, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    /// Cluster of every point, numbered by first appearance.
    pub labels: Vec<usize>,
    /// Smallest removed edge weight; `None` for `k = 1`.
    pub objective: Option<f64>,
}

impl Clustering {
    pub fn objective_string(&self) -> String {
        self.objective.map_or_else(|| "undefined".to_string(), |o| o.to_string())
    }
}

/// Clusters from removing the `k − 1` heaviest tree edges, ties broken by
/// `(weight, u, v)` descending.
pub fn k_slc_from_mst(tree: &SpanningTree, k: usize, n: usize) -> Result<Clustering> {
    if tree.n_vertices() != n {
        return Err(Error::input(format!(
            "tree has {} vertices but the point set has {n}",
            tree.n_vertices()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::input(format!("k must lie in 1..={n}, got {k}")));
    }
    if !tree.is_spanning_tree() {
        return Err(Error::input("k-SLC needs a spanning tree, got a forest"));
    }
    let mut edges = tree.edges().to_vec();
    edges.sort_by(|a, b| b.order(a));
    let objective = (k > 1).then(|| edges[k - 2].w);
    let mut dsu = DisjointSets::new(n);
    for e in &edges[k - 1..] {
        dsu.union(e.u, e.v);
    }
    let mut id = vec![usize::MAX; n];
    let mut next = 0;
    let labels = (0..n)
        .map(|i| {
            let r = dsu.find(i);
            if id[r] == usize::MAX {
                id[r] = next;
                next += 1;
            }
            id[r]
        })
        .collect();
    Ok(Clustering { k, labels, objective })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeGuaranteeReport {
    /// `(exact, approx)` weights of the i-th lightest edge of each tree.
    pub pairs: Vec<(f64, f64)>,
    /// Indices where the approximate edge is lighter than the exact one.
    pub lower_violations: Vec<usize>,
    /// Indices where the approximate edge exceeds `(1 + η)` times the exact.
    pub upper_violations: Vec<usize>,
    pub max_ratio: f64,
}

impl EdgeGuaranteeReport {
    pub fn holds(&self) -> bool {
        self.lower_violations.is_empty() && self.upper_violations.is_empty()
    }
}

/// Compares the trees index by index after sorting both weight lists.
pub fn verify_per_edge_guarantee(approx: &SpanningTree, exact: &SpanningTree, eta: f64) -> Result<EdgeGuaranteeReport> {
    if approx.n_vertices() != exact.n_vertices() || approx.edges().len() != exact.edges().len() {
        return Err(Error::input("trees do not span the same point set"));
    }
    let pairs: Vec<(f64, f64)> = exact
        .sorted_weights()
        .into_iter()
        .zip(approx.sorted_weights())
        .collect();
    let mut report = EdgeGuaranteeReport {
        lower_violations: Vec::new(),
        upper_violations: Vec::new(),
        max_ratio: 1.0,
        pairs: Vec::new(),
    };
    for (i, &(e, a)) in pairs.iter().enumerate() {
        if a < e {
            report.lower_violations.push(i);
        }
        if a > (1.0 + eta) * e {
            report.upper_violations.push(i);
        }
        let ratio = if e > 0.0 {
            a / e
        } else if a > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        report.max_ratio = report.max_ratio.max(ratio);
    }
    report.pairs = pairs;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::rng::rng_stream;
    use rand::Rng;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::new(xs.iter().map(|&x| vec![x]).collect(), Metric::L2).unwrap()
    }

    #[test]
    fn eps_examples() {
        assert_eq!(derive_eps(3.0, 1, 1.0, 1.0, 1.0).unwrap(), 0.5);
        assert!((derive_eps(0.6, 5, 4.0, 1.0, 1.0).unwrap() - 0.005).abs() < 1e-15);
        let a = derive_eps(0.4, 3, 2.0, 1.0, 1.0).unwrap();
        let b = derive_eps(0.8, 3, 2.0, 1.0, 1.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-15);
        assert!(derive_eps(0.0, 1, 1.0, 1.0, 1.0).is_err());
        assert!(derive_eps(4.0, 1, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn single_point_gives_empty_tree() {
        let run = approximate_mst(&line(&[3.0]), &SlcParams::new(0.5, Seed(1))).unwrap();
        assert!(run.tree.edges().is_empty());
    }

    #[test]
    fn collinear_points() {
        let ps = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let run = approximate_mst(&ps, &SlcParams::new(0.5, Seed(2))).unwrap();
        assert!(run.tree.total_weight() <= 4.0 * 1.5);
        assert!(run.tree.edges().iter().all(|e| e.w <= 1.5));
        assert!(run.tree.is_spanning_tree());
    }

    fn chain(n: usize) -> PointSet {
        let mut xs: Vec<f64> = (0..n - 1).map(|i| i as f64).collect();
        xs.push((n - 2) as f64 + 100.0);
        line(&xs)
    }

    #[test]
    fn gap_chain() {
        let ps = chain(20);
        let eta = 0.5;
        let run = approximate_mst(&ps, &SlcParams::new(eta, Seed(3))).unwrap();
        let top = run.tree.sorted_weights().pop().unwrap();
        assert!((100.0..=(1.0 + eta) * 100.0).contains(&top));
        let two = k_slc_from_mst(&run.tree, 2, ps.len()).unwrap();
        assert_eq!(two.objective, Some(100.0));
        assert!(two.labels[..19].iter().all(|&l| l == 0));
        assert_eq!(two.labels[19], 1);
    }

    #[test]
    fn k_equals_n_and_one() {
        let ps = line(&[0.0, 1.0, 3.0, 6.0]);
        let t = oracle::exact_mst(&ps).unwrap();
        let all = k_slc_from_mst(&t, 4, 4).unwrap();
        assert_eq!(all.labels, vec![0, 1, 2, 3]);
        assert_eq!(all.objective, Some(1.0));
        let one = k_slc_from_mst(&t, 1, 4).unwrap();
        assert_eq!(one.objective, None);
        assert_eq!(one.objective_string(), "undefined");
        assert!(k_slc_from_mst(&t, 5, 4).is_err());
    }

    #[test]
    fn k3_matches_exhaustive() {
        let mut r = rng_stream(Seed(8), "slc");
        for _ in 0..5 {
            let ps = PointSet::new(
                (0..8).map(|_| vec![r.random::<f64>(), r.random::<f64>()]).collect(),
                Metric::L2,
            )
            .unwrap();
            let t = oracle::exact_mst(&ps).unwrap();
            let c = k_slc_from_mst(&t, 3, 8).unwrap();
            assert_eq!(c.objective.unwrap(), oracle::exhaustive_slc(&ps, 3).unwrap());
            assert_eq!(*c.labels.iter().max().unwrap(), 2);
        }
    }

    #[test]
    fn guarantee_report() {
        let mk = |ws: &[f64]| SpanningTree::new(4, (0..3).map(|i| Edge::new(i, i + 1, ws[i])).collect()).unwrap();
        let exact = mk(&[1.0, 1.0, 2.0]);
        let same = verify_per_edge_guarantee(&exact, &exact, 0.5).unwrap();
        assert!(same.holds());
        assert_eq!(same.max_ratio, 1.0);
        let r = verify_per_edge_guarantee(&mk(&[1.0, 1.4, 2.0]), &exact, 0.5).unwrap();
        assert!(r.holds());
        let bad = verify_per_edge_guarantee(&mk(&[0.5, 1.0, 4.0]), &exact, 0.5).unwrap();
        assert_eq!(bad.lower_violations, vec![0]);
        assert_eq!(bad.upper_violations, vec![2]);
    }

    #[test]
    fn rejects_hamming_metric() {
        let ps = PointSet::new(vec![vec![0.0], vec![1.0]], Metric::L0).unwrap();
        assert!(matches!(
            approximate_mst(&ps, &SlcParams::new(0.5, Seed(1))),
            Err(Error::UnsupportedMetric { .. })
        ));
    }

    #[test]
    fn deterministic_and_within_bounds() {
        let mut r = rng_stream(Seed(11), "pipeline");
        let ps = PointSet::new(
            (0..400).map(|_| (0..3).map(|_| r.random::<f64>()).collect()).collect(),
            Metric::L1,
        )
        .unwrap();
        let mut params = SlcParams::new(1.0, Seed(4));
        params.c1 = 0.01;
        let a = approximate_mst(&ps, &params).unwrap();
        let b = approximate_mst(&ps, &params).unwrap();
        assert_eq!(a.tree, b.tree);
        let exact = oracle::exact_mst(&ps).unwrap();
        let rep = verify_per_edge_guarantee(&a.tree, &exact, 1.0).unwrap();
        assert!(rep.lower_violations.is_empty());
        assert!(a.sparsifier_edges <= a.repetitions * (ps.len() - 1));
        a.trace().check(&a.mpc).unwrap();
    }
}
