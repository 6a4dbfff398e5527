//! Ground truth for tests and reports.
//!
//! Everything here is deliberately naive and shares no code with the
//! production paths: dense Prim, all-pairs Kruskal, label-array
//! union-find, exhaustive partition enumeration.

use crate::graph::{Edge, SpanningTree, WeightedEdgeList};
use crate::unitstep::ComponentState;
use crate::{Error, PointSet, Result};

/// Default size limit for the dense `O(n²)` oracles.
pub const DENSE_CAP: usize = 20_000;

fn key_less(a: (f64, usize, usize), b: (f64, usize, usize)) -> bool {
    a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))).is_lt()
}

/// Exact MST of `ps` under its metric via dense Prim.
pub fn exact_mst(ps: &PointSet) -> Result<SpanningTree> {
    exact_mst_capped(ps, DENSE_CAP)
}

pub fn exact_mst_capped(ps: &PointSet, cap: usize) -> Result<SpanningTree> {
    if ps.len() > cap {
        return Err(Error::capacity(format!(
            "dense oracle limited to {cap} points, got {}",
            ps.len()
        )));
    }
    Ok(prim_by(ps.len(), |i, j| ps.dist(i, j)))
}

/// Dense Prim over the complete graph with weights `dist(i, j)`. Ties are
/// broken by `(weight, min id, max id)`.
pub fn prim_by(n: usize, dist: impl Fn(usize, usize) -> f64) -> SpanningTree {
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n > 0 {
        let mut done = vec![false; n];
        let mut best: Vec<(f64, usize, usize)> = vec![(f64::INFINITY, usize::MAX, usize::MAX); n];
        let mut cur = 0;
        done[0] = true;
        for _ in 1..n {
            let mut pick = usize::MAX;
            for j in 0..n {
                if done[j] {
                    continue;
                }
                let w = dist(cur, j);
                let cand = (w, cur.min(j), cur.max(j));
                if key_less(cand, best[j]) {
                    best[j] = cand;
                }
                if pick == usize::MAX || key_less(best[j], best[pick]) {
                    pick = j;
                }
            }
            let (w, u, v) = best[pick];
            edges.push(Edge { u, v, w });
            done[pick] = true;
            cur = pick;
        }
    }
    SpanningTree::new(n, edges).expect("prim builds a tree")
}

/// All-pairs Kruskal; independent of [`prim_by`].
pub fn kruskal_mst(ps: &PointSet) -> Result<SpanningTree> {
    if ps.len() > 4000 {
        return Err(Error::capacity("all-pairs Kruskal limited to 4000 points"));
    }
    Ok(kruskal_by(ps.len(), |i, j| ps.dist(i, j)))
}

pub fn kruskal_by(n: usize, dist: impl Fn(usize, usize) -> f64) -> SpanningTree {
    let mut all = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            all.push(Edge { u: i, v: j, w: dist(i, j) });
        }
    }
    kruskal_edges(n, all)
}

/// Minimum spanning forest of an explicit edge list.
pub fn kruskal_graph(g: &WeightedEdgeList) -> SpanningTree {
    kruskal_edges(g.n_vertices(), g.edges().to_vec())
}

fn kruskal_edges(n: usize, mut all: Vec<Edge>) -> SpanningTree {
    all.sort_by(|a, b| a.w.total_cmp(&b.w).then((a.u, a.v).cmp(&(b.u, b.v))));
    let mut label: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for e in all {
        let (a, b) = (label[e.u], label[e.v]);
        if a == b {
            continue;
        }
        let (keep, drop) = (a.min(b), a.max(b));
        for l in label.iter_mut() {
            if *l == drop {
                *l = keep;
            }
        }
        out.push(e);
    }
    SpanningTree::new(n, out).expect("kruskal builds a forest")
}

/// Component labels (smallest vertex id per component) by repeated sweeps.
pub fn components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for &(u, v) in edges {
            let m = label[u].min(label[v]);
            if label[u] != m || label[v] != m {
                label[u] = m;
                label[v] = m;
                changed = true;
            }
        }
        if !changed {
            return label;
        }
    }
}

/// Best achievable minimum inter-cluster distance over all partitions of
/// `ps` into exactly `k` nonempty clusters.
pub fn exhaustive_slc(ps: &PointSet, k: usize) -> Result<f64> {
    exhaustive_slc_by(ps.len(), k, |i, j| ps.dist(i, j))
}

pub fn exhaustive_slc_by(n: usize, k: usize, dist: impl Fn(usize, usize) -> f64) -> Result<f64> {
    if n > 10 || k > 4 {
        return Err(Error::capacity(format!(
            "exhaustive search limited to n <= 10, k <= 4 (got n={n}, k={k})"
        )));
    }
    if k < 2 || k > n {
        return Err(Error::input(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let mut best = f64::NEG_INFINITY;
    let mut assign = vec![0usize; n];
    enumerate(1, 1, n, k, &mut assign, &dist, &mut best);
    Ok(best)
}

// Restricted growth strings: point i joins an existing block or opens block
// `used`.
fn enumerate(
    i: usize,
    used: usize,
    n: usize,
    k: usize,
    assign: &mut Vec<usize>,
    dist: &impl Fn(usize, usize) -> f64,
    best: &mut f64,
) {
    if i == n {
        if used == k {
            let mut sep = f64::INFINITY;
            for a in 0..n {
                for b in (a + 1)..n {
                    if assign[a] != assign[b] {
                        sep = sep.min(dist(a, b));
                    }
                }
            }
            *best = best.max(sep);
        }
        return;
    }
    if used + (n - i) < k {
        return;
    }
    for block in 0..used.min(k) {
        assign[i] = block;
        enumerate(i + 1, used, n, k, assign, dist, best);
    }
    if used < k {
        assign[i] = used;
        enumerate(i + 1, used + 1, n, k, assign, dist, best);
    }
}

/// Exact minimum cross-component distance `τ` with a witnessing pair
/// `(u, v)`, `u < v`, ties broken by the pair ids.
pub fn brute_closest_cross_pair(state: &ComponentState, ps: &PointSet) -> Option<(usize, usize, f64)> {
    let (reps, labels) = (state.reps(), state.labels());
    let mut best: Option<(f64, usize, usize)> = None;
    for a in 0..reps.len() {
        for b in 0..reps.len() {
            if labels[a] == labels[b] || reps[a] > reps[b] {
                continue;
            }
            let cand = (ps.dist(reps[a], reps[b]), reps[a], reps[b]);
            if best.is_none_or(|bb| key_less(cand, bb)) {
                best = Some(cand);
            }
        }
    }
    best.map(|(w, u, v)| (u, v, w))
}

/// Literal merge loop with exact closest pairs: find `τ`, emit while
/// `τ ≤ threshold`, merge, repeat.
pub fn replay_merge_loop(state: &ComponentState, threshold: f64, ps: &PointSet) -> Vec<Edge> {
    let reps = state.reps().to_vec();
    let mut labels = state.labels().to_vec();
    let mut out = Vec::new();
    loop {
        let cur = ComponentState::new(reps.clone(), labels.clone()).unwrap();
        let Some((u, v, tau)) = brute_closest_cross_pair(&cur, ps) else {
            break;
        };
        if tau > threshold {
            break;
        }
        out.push(Edge { u, v, w: tau });
        let lu = labels[reps.iter().position(|&r| r == u).unwrap()];
        let lv = labels[reps.iter().position(|&r| r == v).unwrap()];
        for l in labels.iter_mut() {
            if *l == lv {
                *l = lu;
            }
        }
    }
    out
}

/// Sorted exact weights and the per-index ratio of an approximate tree
/// against them.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub exact_tree: SpanningTree,
    pub sorted_weights: Vec<f64>,
    pub per_index_ratios: Vec<f64>,
}

pub fn oracle_report(approx: &SpanningTree, ps: &PointSet) -> Result<OracleReport> {
    let exact_tree = exact_mst(ps)?;
    let sorted_weights = exact_tree.sorted_weights();
    let approx_w = approx.sorted_weights();
    if approx_w.len() != sorted_weights.len() {
        return Err(Error::input("trees have different edge counts"));
    }
    let per_index_ratios = sorted_weights
        .iter()
        .zip(&approx_w)
        .map(|(&e, &a)| if e == 0.0 { if a == 0.0 { 1.0 } else { f64::INFINITY } } else { a / e })
        .collect();
    Ok(OracleReport {
        exact_tree,
        sorted_weights,
        per_index_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_stream, Seed};
    use crate::Metric;
    use rand::Rng;

    fn pts(rows: Vec<Vec<f64>>) -> PointSet {
        PointSet::new(rows, Metric::L2).unwrap()
    }

    #[test]
    fn triangle_mst() {
        let ps = pts(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]]);
        let t = exact_mst(&ps).unwrap();
        assert_eq!(t.sorted_weights(), vec![3.0, 4.0]);
    }

    #[test]
    fn chain_with_gap() {
        let mut rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64]).collect();
        rows.push(vec![108.0]);
        let t = exact_mst(&pts(rows)).unwrap();
        let w = t.sorted_weights();
        assert_eq!(&w[..8], &[1.0; 8]);
        assert_eq!(w[8], 100.0);
    }

    #[test]
    fn prim_and_kruskal_agree() {
        let mut r = rng_stream(Seed(1), "oracle");
        let ps = pts((0..1000).map(|_| vec![r.random(), r.random()]).collect());
        let a = exact_mst(&ps).unwrap();
        let b = kruskal_mst(&ps).unwrap();
        assert_eq!(a.sorted_weights(), b.sorted_weights());
        let mut ea = a.edges().to_vec();
        let mut eb = b.edges().to_vec();
        ea.sort_by(Edge::order);
        eb.sort_by(Edge::order);
        assert_eq!(ea, eb);
    }

    #[test]
    fn exhaustive_small_cases() {
        let ps = pts(vec![vec![0.0], vec![3.0]]);
        assert_eq!(exhaustive_slc(&ps, 2).unwrap(), 3.0);
        let ps = pts(vec![vec![0.0], vec![1.0], vec![5.0]]);
        assert_eq!(exhaustive_slc(&ps, 2).unwrap(), 4.0);
        let big = pts((0..11).map(|i| vec![i as f64]).collect());
        assert!(matches!(exhaustive_slc(&big, 2), Err(Error::Capacity(_))));
    }

    #[test]
    fn cap_is_enforced() {
        let ps = pts((0..10).map(|i| vec![i as f64]).collect());
        assert!(matches!(exact_mst_capped(&ps, 5), Err(Error::Capacity(_))));
    }

    #[test]
    fn closest_cross_pair_is_minimal() {
        let mut r = rng_stream(Seed(2), "ccp");
        let ps = pts((0..100).map(|_| vec![r.random(), r.random()]).collect());
        let labels: Vec<usize> = (0..100).map(|i| i % 3).collect();
        let st = ComponentState::new((0..100).collect(), labels.clone()).unwrap();
        let (u, v, tau) = brute_closest_cross_pair(&st, &ps).unwrap();
        assert_ne!(labels[u], labels[v]);
        for a in 0..100 {
            for b in 0..100 {
                if labels[a] != labels[b] {
                    assert!(tau <= ps.dist(a, b));
                }
            }
        }
        let single = ComponentState::new(vec![0, 1], vec![0, 0]).unwrap();
        assert!(brute_closest_cross_pair(&single, &ps).is_none());
    }

    #[test]
    fn component_sweep() {
        assert_eq!(components(5, &[(0, 1), (3, 4), (1, 2)]), vec![0, 0, 0, 3, 3]);
    }
}
