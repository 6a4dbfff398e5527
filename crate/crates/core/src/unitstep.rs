//! The per-cell unit step: merge previously computed components along
//! closest cross-component pairs up to a distance threshold, then shrink
//! the cell's points to a covering that carries the component labels up to
//! the next level.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::graph::{DisjointSets, Edge};
use crate::kdtree::KdTree;
use crate::{Error, Metric, PointSet, Result};

/// Component states with at most this many representatives are handled by
/// dense scans; larger ones go through the kd-tree.
pub const BRUTE_FORCE_LIMIT: usize = 256;

/// Surviving representative points of a cell and the component each one
/// belongs to. Labels are point ids, so they stay unique across cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComponentState {
    reps: Vec<usize>,
    labels: Vec<usize>,
}

impl ComponentState {
    pub fn new(reps: Vec<usize>, labels: Vec<usize>) -> Result<Self> {
        if reps.len() != labels.len() {
            return Err(Error::input("every representative needs exactly one label"));
        }
        let mut seen = reps.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input("representatives must be distinct"));
        }
        Ok(ComponentState { reps, labels })
    }

    /// Every point its own component.
    pub fn singletons(reps: Vec<usize>) -> Self {
        let labels = reps.clone();
        ComponentState { reps, labels }
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn num_components(&self) -> usize {
        let mut l = self.labels.clone();
        l.sort_unstable();
        l.dedup();
        l.len()
    }

    /// Concatenates the states of several child cells.
    pub fn merge_all(parts: impl IntoIterator<Item = ComponentState>) -> Self {
        let mut out = ComponentState::default();
        for p in parts {
            out.reps.extend(p.reps);
            out.labels.extend(p.labels);
        }
        out
    }

    /// Labels renumbered densely, in order of first appearance.
    fn dense_labels(&self) -> (Vec<usize>, usize) {
        let mut map = HashMap::new();
        let dense = self
            .labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        (dense, map.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossPair {
    pub u: usize,
    pub v: usize,
    pub dist: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitStepOutput {
    /// Covering subset of the input representatives, ascending.
    pub covering: Vec<usize>,
    /// Component labels restricted to the covering.
    pub induced: ComponentState,
    /// Emitted tree edges in emission order.
    pub tree_edges: Vec<Edge>,
}

/// A subset of `pts` such that every point of `pts` lies within `radius` of
/// a chosen point. Points are bucketed on a grid whose cells have metric
/// diameter at most `radius` (step `radius/d` for `ℓ1`, `radius/√d` for
/// `ℓ2`, `radius` for `ℓ∞`), and the lowest id in each bucket is kept.
pub fn build_covering(pts: &[usize], radius: f64, ps: &PointSet) -> Vec<usize> {
    let mut sorted = pts.to_vec();
    sorted.sort_unstable();
    if sorted.len() <= 1 || !(radius > 0.0) || ps.metric() == Metric::L0 {
        return sorted;
    }
    let d = ps.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for &i in &sorted {
        for (k, &x) in ps.point(i).iter().enumerate() {
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    let extent = ps
        .metric()
        .norm_of_gaps(lo.iter().zip(&hi).map(|(a, b)| b - a));
    if extent <= radius {
        return vec![sorted[0]];
    }
    let step = match ps.metric() {
        Metric::L1 => radius / d as f64,
        Metric::L2 => radius / (d as f64).sqrt(),
        Metric::Linf | Metric::L0 => radius,
    };
    let limit = (1u64 << 62) as f64;
    let mut buckets: HashMap<Vec<i64>, usize> = HashMap::with_capacity(sorted.len());
    for &i in &sorted {
        let mut key = Vec::with_capacity(d);
        for &x in ps.point(i) {
            let c = (x / step).floor();
            if c.abs() >= limit {
                return sorted;
            }
            key.push(c as i64);
        }
        // `sorted` is ascending, so the first id seen in a bucket is its minimum.
        buckets.entry(key).or_insert(i);
    }
    let mut out: Vec<usize> = buckets.into_values().collect();
    out.sort_unstable();
    out
}

#[inline]
fn pair_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

#[inline]
fn better(dist: f64, key: (usize, usize), best: &Option<(f64, (usize, usize))>) -> bool {
    match best {
        None => true,
        Some((bd, bk)) => dist.total_cmp(bd).then(key.cmp(bk)).is_lt(),
    }
}

/// A cross-component pair whose distance is at most `(1 + eps)` times the
/// minimum cross-component distance `τ`. `None` when fewer than two
/// components are present. Small states are scanned exactly, with ties
/// broken by `(min id, max id)`.
pub fn approx_closest_cross_pair(state: &ComponentState, eps: f64, ps: &PointSet) -> Option<CrossPair> {
    if state.num_components() < 2 {
        return None;
    }
    let reps = &state.reps;
    let labels = &state.labels;
    let mut best: Option<(f64, (usize, usize))> = None;
    if reps.len() <= BRUTE_FORCE_LIMIT {
        for a in 0..reps.len() {
            for b in (a + 1)..reps.len() {
                if labels[a] == labels[b] {
                    continue;
                }
                let dist = ps.dist(reps[a], reps[b]);
                let key = pair_key(reps[a], reps[b]);
                if better(dist, key, &best) {
                    best = Some((dist, key));
                }
            }
        }
    } else {
        let (dense, _) = state.dense_labels();
        let pts: Vec<&[f64]> = reps.iter().map(|&i| ps.point(i)).collect();
        let mut tree = KdTree::build(&pts, ps.metric());
        tree.set_labels(&dense);
        let hits: Vec<_> = (0..reps.len())
            .into_par_iter()
            .filter_map(|q| tree.nearest_foreign(q, &dense, reps, f64::INFINITY, eps.max(0.0)))
            .collect();
        for h in hits {
            if better(h.dist, h.key, &best) {
                best = Some((h.dist, h.key));
            }
        }
    }
    best.map(|(dist, (u, v))| CrossPair { u, v, dist })
}

/// Edges of the minimum spanning forest of the graph whose vertices are the
/// components of `state` (complete between representatives, zero inside a
/// component), restricted to edges of weight at most `threshold`, sorted by
/// `(weight, u, v)`. Replaying them in order is exactly the sequence of
/// closest cross pairs the merge loop would find with exact search.
fn contracted_forest(state: &ComponentState, threshold: f64, ps: &PointSet) -> Vec<Edge> {
    let (dense, k) = state.dense_labels();
    if k < 2 {
        return Vec::new();
    }
    let mut edges = if state.len() <= BRUTE_FORCE_LIMIT {
        dense_prim(state, &dense, k, ps)
    } else {
        kd_boruvka(state, &dense, k, threshold, ps)
    };
    edges.retain(|e| e.w <= threshold);
    edges.sort_by(Edge::order);
    edges
}

fn dense_prim(state: &ComponentState, dense: &[usize], k: usize, ps: &PointSet) -> Vec<Edge> {
    let reps = &state.reps;
    let m = reps.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in dense.iter().enumerate() {
        members[c].push(i);
    }
    let mut in_tree = vec![false; m];
    let mut key: Vec<Option<(f64, (usize, usize))>> = vec![None; m];
    let mut edges = Vec::with_capacity(k - 1);
    let absorb = |c: usize, in_tree: &mut Vec<bool>, key: &mut Vec<Option<(f64, (usize, usize))>>| {
        for &a in &members[c] {
            in_tree[a] = true;
        }
        for &a in &members[c] {
            for b in 0..m {
                if in_tree[b] {
                    continue;
                }
                let dist = ps.dist(reps[a], reps[b]);
                let pk = pair_key(reps[a], reps[b]);
                if better(dist, pk, &key[b]) {
                    key[b] = Some((dist, pk));
                }
            }
        }
    };
    absorb(dense[0], &mut in_tree, &mut key);
    for _ in 1..k {
        let mut pick: Option<(usize, (f64, (usize, usize)))> = None;
        for b in 0..m {
            if in_tree[b] {
                continue;
            }
            if let Some(kb) = key[b] {
                if pick.is_none_or(|(_, p)| better(kb.0, kb.1, &Some(p))) {
                    pick = Some((b, kb));
                }
            }
        }
        let (b, (w, (u, v))) = pick.expect("complete graph stays connected");
        edges.push(Edge { u, v, w });
        absorb(dense[b], &mut in_tree, &mut key);
    }
    edges
}

fn kd_boruvka(state: &ComponentState, dense: &[usize], k: usize, threshold: f64, ps: &PointSet) -> Vec<Edge> {
    let reps = &state.reps;
    let pts: Vec<&[f64]> = reps.iter().map(|&i| ps.point(i)).collect();
    let mut tree = KdTree::build(&pts, ps.metric());
    let mut dsu = DisjointSets::new(k);
    let mut comp: Vec<usize> = dense.to_vec();
    let mut edges = Vec::new();
    loop {
        tree.set_labels(&comp);
        // Queries run in chunks; within a chunk the best hit found so far
        // for a component bounds later searches from the same component.
        let chunk = 4096;
        let best = (0..reps.len().div_ceil(chunk))
            .into_par_iter()
            .map(|ci| {
                let mut local: HashMap<usize, (f64, (usize, usize), usize)> = HashMap::new();
                for q in ci * chunk..((ci + 1) * chunk).min(reps.len()) {
                    let c = comp[q];
                    let bound = local.get(&c).map_or(threshold, |b| b.0.min(threshold));
                    if let Some(h) = tree.nearest_foreign(q, &comp, reps, bound, 0.0) {
                        let replace = local
                            .get(&c)
                            .is_none_or(|&(d, key, _)| better(h.dist, h.key, &Some((d, key))));
                        if replace {
                            local.insert(c, (h.dist, h.key, h.local));
                        }
                    }
                }
                local
            })
            .reduce(HashMap::new, |mut a, b| {
                for (c, v) in b {
                    let replace = a
                        .get(&c)
                        .is_none_or(|&(d, key, _)| better(v.0, v.1, &Some((d, key))));
                    if replace {
                        a.insert(c, v);
                    }
                }
                a
            });
        if best.is_empty() {
            break;
        }
        let mut chosen: Vec<(f64, (usize, usize), usize, usize)> = best
            .into_iter()
            .map(|(c, (d, key, other))| (d, key, c, comp[other]))
            .collect();
        chosen.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut merged = false;
        for (w, (u, v), a, b) in chosen {
            if dsu.union(a, b) {
                edges.push(Edge { u, v, w });
                merged = true;
            }
        }
        if !merged {
            break;
        }
        for c in comp.iter_mut() {
            *c = dsu.find(*c);
        }
    }
    edges
}

/// Runs the merge loop with threshold `eps·level_diam` and emits an
/// `eps²·level_diam`-covering.
pub fn unit_step(state: &ComponentState, level_diam: f64, eps: f64, ps: &PointSet) -> UnitStepOutput {
    unit_step_with(state, eps * level_diam, eps * eps * level_diam, ps)
}

/// The merge loop with an explicit threshold and covering radius. An
/// infinite threshold merges everything into one component.
///
/// Each iteration takes the closest cross-component pair (exact search,
/// which meets the `(1 + ε)` contract for every `ε ≥ 0`), emits it when its
/// distance is at most `threshold` and merges the two components; the loop
/// stops at one component or at the first pair above the threshold.
pub fn unit_step_with(state: &ComponentState, threshold: f64, cover_radius: f64, ps: &PointSet) -> UnitStepOutput {
    if state.len() <= 1 {
        return UnitStepOutput {
            covering: state.reps.clone(),
            induced: state.clone(),
            tree_edges: Vec::new(),
        };
    }
    let mut label_index: HashMap<usize, usize> = HashMap::new();
    for &l in &state.labels {
        let next = label_index.len();
        label_index.entry(l).or_insert(next);
    }
    let mut dsu = DisjointSets::new(label_index.len());
    let mut tree_edges = Vec::new();
    let rep_label: HashMap<usize, usize> = state
        .reps
        .iter()
        .zip(&state.labels)
        .map(|(&r, &l)| (r, label_index[&l]))
        .collect();

    for e in contracted_forest(state, threshold, ps) {
        let theta = e.w;
        if theta > threshold {
            break;
        }
        if dsu.union(rep_label[&e.u], rep_label[&e.v]) {
            tree_edges.push(e);
        }
    }

    // Merged components take the smallest original label among them.
    let mut root_label: HashMap<usize, usize> = HashMap::new();
    for (&l, &idx) in &label_index {
        let root = dsu.find(idx);
        root_label
            .entry(root)
            .and_modify(|m| *m = (*m).min(l))
            .or_insert(l);
    }
    let final_label: HashMap<usize, usize> = state
        .reps
        .iter()
        .map(|&r| (r, root_label[&dsu.find(rep_label[&r])]))
        .collect();

    let covering = build_covering(&state.reps, cover_radius, ps);
    let labels = covering.iter().map(|r| final_label[r]).collect();
    UnitStepOutput {
        induced: ComponentState {
            reps: covering.clone(),
            labels,
        },
        covering,
        tree_edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::rng::{rng_stream, Seed};
    use rand::Rng;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::new(xs.iter().map(|&x| vec![x]).collect(), Metric::L2).unwrap()
    }

    fn random_ps(n: usize, d: usize, metric: Metric, seed: u64) -> PointSet {
        let mut r = rng_stream(Seed(seed), "unitstep");
        PointSet::new(
            (0..n).map(|_| (0..d).map(|_| r.random::<f64>()).collect()).collect(),
            metric,
        )
        .unwrap()
    }

    #[test]
    fn covering_examples() {
        let ps = line(&[0.0, 0.1, 0.9, 1.0]);
        let all = [0, 1, 2, 3];
        assert_eq!(build_covering(&all, 5.0, &ps), vec![0]);
        assert_eq!(build_covering(&[2], 0.1, &ps), vec![2]);
        let c = build_covering(&all, 0.25, &ps);
        assert!(c.len() <= 4);
        for &p in &all {
            assert!(c.iter().any(|&q| ps.dist(p, q) <= 0.25));
        }
    }

    #[test]
    fn covering_radius_holds_for_each_metric() {
        for metric in [Metric::L1, Metric::L2, Metric::Linf] {
            let ps = random_ps(500, 3, metric, 8);
            let ids: Vec<usize> = (0..500).collect();
            for radius in [0.05, 0.2, 0.7] {
                let c = build_covering(&ids, radius, &ps);
                assert!(c.windows(2).all(|w| w[0] < w[1]));
                for &p in &ids {
                    assert!(c.iter().any(|&q| ps.dist(p, q) <= radius), "{metric} {radius}");
                }
            }
        }
    }

    #[test]
    fn cross_pair_examples() {
        let ps = line(&[0.0, 5.0]);
        let st = ComponentState::singletons(vec![0, 1]);
        let p = approx_closest_cross_pair(&st, 0.1, &ps).unwrap();
        assert_eq!((p.u, p.v, p.dist), (0, 1, 5.0));
        let one = ComponentState::new(vec![0, 1], vec![0, 0]).unwrap();
        assert!(approx_closest_cross_pair(&one, 0.1, &ps).is_none());
    }

    #[test]
    fn cross_pair_within_eps_of_tau() {
        for n in [60, 600] {
            let ps = random_ps(n, 2, Metric::L2, n as u64);
            let labels: Vec<usize> = (0..n).map(|i| usize::from(ps.point(i)[0] > 0.5)).collect();
            let st = ComponentState::new((0..n).collect(), labels).unwrap();
            let (_, _, tau) = oracle::brute_closest_cross_pair(&st, &ps).unwrap();
            let exact = approx_closest_cross_pair(&st, 0.0, &ps).unwrap();
            assert_eq!(exact.dist, tau);
            let p = approx_closest_cross_pair(&st, 0.1, &ps).unwrap();
            assert!(p.dist >= tau && p.dist <= 1.1 * tau);
        }
    }

    #[test]
    fn single_component_is_untouched() {
        let ps = line(&[0.0, 1.0, 2.0]);
        let st = ComponentState::new(vec![0, 1, 2], vec![7, 7, 7]).unwrap();
        let out = unit_step(&st, 10.0, 0.5, &ps);
        assert!(out.tree_edges.is_empty());
        assert!(out.induced.labels().iter().all(|&l| l == 7));
    }

    #[test]
    fn two_points_merge_under_threshold() {
        let ps = line(&[0.0, 1.0]);
        let out = unit_step(&ComponentState::singletons(vec![0, 1]), 4.0, 0.5, &ps);
        assert_eq!(out.tree_edges, vec![Edge::new(0, 1, 1.0)]);
        assert_eq!(out.induced.num_components(), 1);
    }

    #[test]
    fn collinear_chain_with_zero_eps() {
        let ps = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let st = ComponentState::singletons((0..5).collect());
        let out = unit_step_with(&st, 1.5, 0.0, &ps);
        assert_eq!(out.tree_edges.len(), 4);
        assert!(out.tree_edges.iter().all(|e| e.w == 1.0));
        assert_eq!(out.covering, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn threshold_stops_merging() {
        let ps = line(&[0.0, 1.0, 10.0, 11.0]);
        let out = unit_step_with(&ComponentState::singletons((0..4).collect()), 2.0, 0.0, &ps);
        assert_eq!(out.tree_edges.len(), 2);
        assert_eq!(out.induced.num_components(), 2);
        assert_eq!(out.induced.labels(), &[0, 0, 2, 2]);
    }

    /// Dense and kd-tree paths against an oracle replay of the merge loop
    /// with exact closest pairs.
    #[test]
    fn matches_replayed_merge_loop() {
        for (n, metric, seed) in [(120, Metric::L2, 1), (300, Metric::L1, 2), (400, Metric::Linf, 3)] {
            let ps = random_ps(n, 2, metric, seed);
            let labels: Vec<usize> = (0..n).map(|i| i - i % 3).collect();
            let st = ComponentState::new((0..n).collect(), labels).unwrap();
            let threshold = 0.08;
            let out = unit_step_with(&st, threshold, 0.0, &ps);
            let replay = oracle::replay_merge_loop(&st, threshold, &ps);
            assert_eq!(out.tree_edges, replay, "n={n} {metric}");
        }
    }

    #[test]
    fn infinite_threshold_equals_kruskal() {
        for n in [50, 200, 300] {
            let ps = random_ps(n, 3, Metric::L2, n as u64 + 5);
            let out = unit_step_with(&ComponentState::singletons((0..n).collect()), f64::INFINITY, 0.0, &ps);
            let kr = oracle::kruskal_mst(&ps).unwrap();
            let mut a = out.tree_edges.clone();
            let mut b = kr.edges().to_vec();
            a.sort_by(Edge::order);
            b.sort_by(Edge::order);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn emitted_weights_nondecreasing_and_acyclic() {
        let ps = random_ps(500, 2, Metric::L2, 77);
        let st = ComponentState::singletons((0..500).collect());
        let out = unit_step_with(&st, 0.05, 0.01, &ps);
        assert!(out.tree_edges.windows(2).all(|w| w[0].w <= w[1].w));
        assert!(out.tree_edges.iter().all(|e| e.w <= 0.05));
        let mut dsu = DisjointSets::new(500);
        assert!(out.tree_edges.iter().all(|e| dsu.union(e.u, e.v)));
        for p in 0..500 {
            assert!(out.covering.iter().any(|&q| ps.dist(p, q) <= 0.01));
        }
    }
}
