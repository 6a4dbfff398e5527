//! Instances built from graphs whose pairwise distances encode adjacency,
//! so the 2-SLC objective tells a connected source graph from a
//! disconnected one. Also a seeded Gaussian Johnson-Lindenstrauss map.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Metric, PointSet, Result, Seed, SparsePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphKind {
    OneCycle,
    TwoCycles,
    Arbitrary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    pub n_vertices: usize,
    /// Undirected edges with `u < v`, ascending.
    pub edges: Vec<(usize, usize)>,
    pub kind: GraphKind,
}

impl GraphInstance {
    /// The cycle `0 − 1 − … − (n−1) − 0`.
    pub fn one_cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::input(format!("a cycle needs at least 3 vertices, got {n}")));
        }
        let g = Self::arbitrary(n, cycle_edges(0, n))?;
        Ok(GraphInstance {
            kind: GraphKind::OneCycle,
            ..g
        })
    }

    /// Two disjoint cycles on `0..n/2` and `n/2..n`.
    pub fn two_cycles(n: usize) -> Result<Self> {
        if n % 2 != 0 || n < 6 {
            return Err(Error::input(format!("two cycles need an even n >= 6, got {n}")));
        }
        let mut edges = cycle_edges(0, n / 2);
        edges.extend(cycle_edges(n / 2, n / 2));
        let g = Self::arbitrary(n, edges)?;
        Ok(GraphInstance {
            kind: GraphKind::TwoCycles,
            ..g
        })
    }

    /// Any simple graph; parallel edges collapse and self-loops are rejected.
    pub fn arbitrary(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::input(format!("invalid edge ({a}, {b}) for {n} vertices")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(GraphInstance {
            n_vertices: n,
            edges: set.into_iter().collect(),
            kind: GraphKind::Arbitrary,
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }
}

fn cycle_edges(start: usize, len: usize) -> Vec<(usize, usize)> {
    (0..len).map(|i| (start + i, start + (i + 1) % len)).collect()
}

/// Generated vectors together with the metric they are meant for.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseInstance {
    pub points: Vec<SparsePoint>,
    pub metric: Metric,
}

impl SparseInstance {
    pub fn to_point_set(&self) -> Result<PointSet> {
        PointSet::new(self.points.iter().map(SparsePoint::to_dense).collect(), self.metric)
    }
}

/// The weight that maximizes the adjacent/non-adjacent distance ratio:
/// `1/√2` under `ℓ2` and `1` under `ℓ1`.
pub fn default_xi(metric: Metric) -> f64 {
    match metric {
        Metric::L2 => std::f64::consts::FRAC_1_SQRT_2,
        _ => 1.0,
    }
}

/// `v_i = e_i + ξ·Σ_{j ~ i} e_j` for a graph in which every vertex has
/// degree 2.
pub fn gen_cycle_vectors(g: &GraphInstance, xi: Option<f64>, metric: Metric) -> Result<SparseInstance> {
    if let Some((v, d)) = g.degrees().into_iter().enumerate().find(|&(_, d)| d != 2) {
        return Err(Error::input(format!("vertex {v} has degree {d}; cycle vectors need a 2-regular graph")));
    }
    let xi = xi.unwrap_or_else(|| default_xi(metric));
    let mut rows: Vec<Vec<(usize, f64)>> = (0..g.n_vertices).map(|i| vec![(i, 1.0)]).collect();
    for &(a, b) in &g.edges {
        rows[a].push((b, xi));
        rows[b].push((a, xi));
    }
    let points = rows
        .into_iter()
        .map(|r| SparsePoint::from_unsorted(g.n_vertices, r))
        .collect::<Result<_>>()?;
    Ok(SparseInstance { points, metric })
}

/// One vector per edge with a 1 on each endpoint coordinate.
pub fn gen_edge_vectors(g: &GraphInstance, metric: Metric) -> Result<SparseInstance> {
    if let Some(v) = g.degrees().iter().position(|&d| d == 0) {
        return Err(Error::input(format!("vertex {v} is isolated")));
    }
    let points = g
        .edges
        .iter()
        .map(|&(a, b)| SparsePoint::new(g.n_vertices, vec![(a, 1.0), (b, 1.0)]))
        .collect::<Result<_>>()?;
    Ok(SparseInstance { points, metric })
}

/// `(i, i)` for every vertex followed by `(u, v)` for every edge, under the
/// Hamming distance.
pub fn gen_hamming_points(g: &GraphInstance) -> Result<PointSet> {
    let rows = (0..g.n_vertices)
        .map(|i| vec![i as f64, i as f64])
        .chain(g.edges.iter().map(|&(a, b)| vec![a as f64, b as f64]))
        .collect();
    PointSet::new(rows, Metric::L0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JlParams {
    pub target_dim: usize,
    pub eps: f64,
    pub seed: Seed,
}

pub const DEFAULT_C_JL: f64 = 8.0;

impl JlParams {
    /// `target_dim = ⌈c_jl · ln n / eps²⌉`.
    pub fn for_points(n: usize, eps: f64, c_jl: f64, seed: Seed) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) || !(c_jl > 0.0) {
            return Err(Error::input(format!("invalid JL parameters eps={eps}, c_jl={c_jl}")));
        }
        let target_dim = ((c_jl * (n.max(2) as f64).ln()) / (eps * eps)).ceil() as usize;
        Ok(JlParams {
            target_dim,
            eps,
            seed,
        })
    }
}

/// `v ↦ M·v / √k` with `M` a `k × d` matrix of independent standard
/// Gaussians. Column `j` is drawn from its own stream, so only the columns
/// touched by some nonzero entry are generated.
pub fn jl_project(vs: &[SparsePoint], p: &JlParams) -> Result<PointSet> {
    let k = p.target_dim;
    if k == 0 {
        return Err(Error::input("JL target dimension must be positive"));
    }
    let used: BTreeSet<usize> = vs.iter().flat_map(|v| v.entries().iter().map(|e| e.0)).collect();
    let scale = 1.0 / (k as f64).sqrt();
    let columns: std::collections::HashMap<usize, Vec<f64>> = used
        .into_par_iter()
        .map(|j| {
            let mut rng = p.seed.stream(&format!("jl/col/{j}"));
            (j, (0..k).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect())
        })
        .collect();
    let rows = vs
        .iter()
        .map(|v| {
            let mut out = vec![0.0; k];
            for &(j, x) in v.entries() {
                for (o, m) in out.iter_mut().zip(&columns[&j]) {
                    *o += x * m;
                }
            }
            out
        })
        .collect();
    PointSet::new(rows, Metric::L2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::sparse_distance;

    fn distinct_distances(inst: &SparseInstance) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for i in 0..inst.points.len() {
            for j in i + 1..inst.points.len() {
                let d = sparse_distance(&inst.points[i], &inst.points[j], inst.metric).unwrap();
                if !out.iter().any(|x| (x - d).abs() < 1e-9) {
                    out.push(d);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn graph_shapes() {
        let g = GraphInstance::one_cycle(5).unwrap();
        assert_eq!(g.edges.len(), 5);
        assert!(g.degrees().iter().all(|&d| d == 2));
        let h = GraphInstance::two_cycles(8).unwrap();
        assert_eq!(h.edges.len(), 8);
        assert!(GraphInstance::two_cycles(7).is_err());
        assert!(GraphInstance::arbitrary(3, [(1, 1)]).is_err());
    }

    #[test]
    fn cycle_vector_pair_distances() {
        let g = GraphInstance::one_cycle(10).unwrap();
        let l2 = gen_cycle_vectors(&g, None, Metric::L2).unwrap();
        assert!(l2.points.iter().all(|p| p.nnz() == 3));
        let adj = sparse_distance(&l2.points[0], &l2.points[1], Metric::L2).unwrap();
        let far = sparse_distance(&l2.points[0], &l2.points[5], Metric::L2).unwrap();
        let root2 = 2f64.sqrt();
        assert!((adj - root2 * (2.0 - root2).sqrt()).abs() < 1e-12);
        assert!((far - 2.0).abs() < 1e-12);
        assert!((far / adj - (2.0 + root2).sqrt()).abs() < 1e-12);

        let l1 = gen_cycle_vectors(&g, None, Metric::L1).unwrap();
        assert_eq!(sparse_distance(&l1.points[0], &l1.points[1], Metric::L1).unwrap(), 2.0);
        assert_eq!(sparse_distance(&l1.points[0], &l1.points[5], Metric::L1).unwrap(), 6.0);
    }

    #[test]
    fn cycle_vectors_need_two_regular_graph() {
        let path = GraphInstance::arbitrary(3, [(0, 1), (1, 2)]).unwrap();
        assert!(gen_cycle_vectors(&path, None, Metric::L2).is_err());
    }

    #[test]
    fn edge_vectors_two_values() {
        let g = GraphInstance::one_cycle(12).unwrap();
        let l2 = gen_edge_vectors(&g, Metric::L2).unwrap();
        let vals = distinct_distances(&l2);
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - 2f64.sqrt()).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
        let l1 = gen_edge_vectors(&g, Metric::L1).unwrap();
        assert_eq!(distinct_distances(&l1), vec![2.0, 4.0]);
        let isolated = GraphInstance::arbitrary(3, [(0, 1)]).unwrap();
        assert!(gen_edge_vectors(&isolated, Metric::L2).is_err());
    }

    #[test]
    fn hamming_points_and_objectives() {
        let single = GraphInstance::arbitrary(2, [(0, 1)]).unwrap();
        let ps = gen_hamming_points(&single).unwrap();
        assert_eq!(ps.to_rows(), vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]);

        let connected = gen_hamming_points(&GraphInstance::one_cycle(6).unwrap()).unwrap();
        let t = oracle::exact_mst(&connected).unwrap();
        assert_eq!(t.sorted_weights().last(), Some(&1.0));
        let split = gen_hamming_points(&GraphInstance::arbitrary(4, [(0, 1), (2, 3)]).unwrap()).unwrap();
        let t = oracle::exact_mst(&split).unwrap();
        assert_eq!(t.sorted_weights().last(), Some(&2.0));
    }

    #[test]
    fn jl_dimension_and_zero_vector() {
        let p = JlParams::for_points(64, 0.2, DEFAULT_C_JL, Seed(1)).unwrap();
        assert_eq!(p.target_dim, 832);
        let zero = SparsePoint::new(10, vec![]).unwrap();
        let out = jl_project(&[zero], &p).unwrap();
        assert!(out.point(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn jl_is_deterministic_and_linear() {
        let p = JlParams {
            target_dim: 50,
            eps: 0.2,
            seed: Seed(4),
        };
        let a = SparsePoint::new(6, vec![(1, 2.0)]).unwrap();
        let b = SparsePoint::new(6, vec![(1, 1.0)]).unwrap();
        let out = jl_project(&[a.clone(), b], &p).unwrap();
        for k in 0..50 {
            assert!((out.point(0)[k] - 2.0 * out.point(1)[k]).abs() < 1e-12);
        }
        assert_eq!(jl_project(&[a.clone()], &p).unwrap().point(0), out.point(0));
    }
}
