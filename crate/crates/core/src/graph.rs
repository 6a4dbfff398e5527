//! Weighted edges, edge lists, spanning forests and a disjoint-set forest.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An undirected weighted edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    /// Normalizes endpoint order so that `u < v`.
    pub fn new(a: usize, b: usize, w: f64) -> Self {
        let (u, v) = if a <= b { (a, b) } else { (b, a) };
        Edge { u, v, w }
    }

    /// The `(weight, u, v)` order used for every tie-break in the crate.
    #[inline]
    pub fn order(&self, other: &Edge) -> Ordering {
        self.w
            .total_cmp(&other.w)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }
}

/// Graph given by an edge list over vertices `0..n_vertices`. Parallel edges
/// are collapsed to the lightest one; self-loops are dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedEdgeList {
    n_vertices: usize,
    edges: Vec<Edge>,
}

impl WeightedEdgeList {
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut best: HashMap<(usize, usize), f64> = HashMap::new();
        for e in edges {
            let e = Edge::new(e.u, e.v, e.w);
            if e.v >= n_vertices {
                return Err(Error::input(format!(
                    "edge ({}, {}) out of range for {n_vertices} vertices",
                    e.u, e.v
                )));
            }
            if !(e.w >= 0.0) || !e.w.is_finite() {
                return Err(Error::input(format!(
                    "edge ({}, {}) has invalid weight {}",
                    e.u, e.v, e.w
                )));
            }
            if e.u == e.v {
                continue;
            }
            best.entry((e.u, e.v))
                .and_modify(|w| *w = w.min(e.w))
                .or_insert(e.w);
        }
        let mut edges: Vec<Edge> = best.into_iter().map(|((u, v), w)| Edge { u, v, w }).collect();
        edges.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        Ok(WeightedEdgeList { n_vertices, edges })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// A spanning forest: acyclic, with one tree per connected component of
/// the graph it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanningTree {
    n_vertices: usize,
    edges: Vec<Edge>,
}

impl SpanningTree {
    /// Validates acyclicity and endpoint ranges.
    pub fn new(n_vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut dsu = DisjointSets::new(n_vertices);
        for e in &edges {
            if e.u >= n_vertices || e.v >= n_vertices {
                return Err(Error::input(format!(
                    "tree edge ({}, {}) out of range",
                    e.u, e.v
                )));
            }
            if !dsu.union(e.u, e.v) {
                return Err(Error::input(format!(
                    "tree edge ({}, {}) closes a cycle",
                    e.u, e.v
                )));
            }
        }
        Ok(SpanningTree { n_vertices, edges })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Number of trees in the forest.
    pub fn components(&self) -> usize {
        self.n_vertices - self.edges.len()
    }

    pub fn is_spanning_tree(&self) -> bool {
        self.n_vertices == 0 || self.edges.len() + 1 == self.n_vertices
    }

    /// Edge weights in nondecreasing order.
    pub fn sorted_weights(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self.edges.iter().map(|e| e.w).collect();
        w.sort_by(f64::total_cmp);
        w
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_dedups_to_min() {
        let g = WeightedEdgeList::new(
            3,
            [Edge::new(1, 0, 2.0), Edge::new(0, 1, 1.0), Edge::new(2, 2, 0.0)],
        )
        .unwrap();
        assert_eq!(g.edges(), &[Edge { u: 0, v: 1, w: 1.0 }]);
        assert!(WeightedEdgeList::new(2, [Edge::new(0, 2, 1.0)]).is_err());
        assert!(WeightedEdgeList::new(2, [Edge::new(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn tree_rejects_cycles() {
        let cyc = vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(2, 0, 1.0)];
        assert!(SpanningTree::new(3, cyc).is_err());
        let t = SpanningTree::new(4, vec![Edge::new(0, 1, 2.0), Edge::new(2, 3, 1.0)]).unwrap();
        assert_eq!(t.components(), 2);
        assert_eq!(t.sorted_weights(), vec![1.0, 2.0]);
        assert!(!t.is_spanning_tree());
    }

    #[test]
    fn edge_order_breaks_ties_by_endpoints() {
        let a = Edge::new(0, 5, 1.0);
        let b = Edge::new(1, 2, 1.0);
        assert_eq!(a.order(&b), Ordering::Less);
        assert_eq!(Edge::new(3, 4, 0.5).order(&a), Ordering::Less);
    }
}
