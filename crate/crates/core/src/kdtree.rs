//! Bucketed kd-tree answering "nearest point with a different component
//! label" queries, with optional `(1 + ε)` approximate pruning.

use crate::Metric;

const LEAF: usize = 12;

struct Node {
    start: usize,
    end: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    children: Option<(usize, usize)>,
    /// Set when every point below carries the same label.
    uniform: Option<usize>,
}

pub(crate) struct KdTree {
    dim: usize,
    metric: Metric,
    /// Coordinates in tree order.
    coords: Vec<f64>,
    /// Tree position -> caller's local index.
    order: Vec<usize>,
    /// Caller's local index -> tree position.
    position: Vec<usize>,
    nodes: Vec<Node>,
}

/// Best candidate so far: distance, then the caller-supplied global ids as
/// tie-breaker.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Hit {
    pub dist: f64,
    pub local: usize,
    pub key: (usize, usize),
}

impl Hit {
    #[inline]
    fn better_than(&self, other: &Option<Hit>) -> bool {
        match other {
            None => true,
            Some(o) => self
                .dist
                .total_cmp(&o.dist)
                .then(self.key.cmp(&o.key))
                .is_lt(),
        }
    }
}

impl KdTree {
    /// `points[i]` is the coordinate slice of local point `i`.
    pub fn build(points: &[&[f64]], metric: Metric) -> Self {
        let n = points.len();
        let dim = points.first().map_or(0, |p| p.len());
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF + 1);
        build_node(points, &mut order, 0, n, dim, &mut nodes);
        let mut coords = Vec::with_capacity(n * dim);
        let mut position = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            coords.extend_from_slice(points[i]);
            position[i] = pos;
        }
        KdTree {
            dim,
            metric,
            coords,
            order,
            position,
            nodes,
        }
    }

    #[inline]
    fn coords_at(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    /// Recomputes per-node label uniformity; `labels` is indexed by local id.
    pub fn set_labels(&mut self, labels: &[usize]) {
        for idx in (0..self.nodes.len()).rev() {
            let uniform = match self.nodes[idx].children {
                Some((l, r)) => match (self.nodes[l].uniform, self.nodes[r].uniform) {
                    (Some(a), Some(b)) if a == b => Some(a),
                    _ => None,
                },
                None => {
                    let node = &self.nodes[idx];
                    let first = labels[self.order[node.start]];
                    self.order[node.start..node.end]
                        .iter()
                        .all(|&i| labels[i] == first)
                        .then_some(first)
                }
            };
            self.nodes[idx].uniform = uniform;
        }
    }

    /// Nearest point to local point `query` whose label differs from
    /// `labels[query]` and whose distance is at most `bound`. Subtrees are
    /// skipped once `(1 + eps)·lower_bound` exceeds the best distance, so
    /// the hit is within `(1 + eps)` of the true nearest foreign point.
    /// `gid` maps local ids to the global ids used for tie-breaking.
    pub fn nearest_foreign(
        &self,
        query: usize,
        labels: &[usize],
        gid: &[usize],
        bound: f64,
        eps: f64,
    ) -> Option<Hit> {
        let mut best = None;
        let q = self.coords_at(self.position[query]).to_vec();
        self.descend(0, &q, query, labels, gid, bound, 1.0 + eps, &mut best);
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        idx: usize,
        q: &[f64],
        query: usize,
        labels: &[usize],
        gid: &[usize],
        bound: f64,
        slack: f64,
        best: &mut Option<Hit>,
    ) {
        let node = &self.nodes[idx];
        let own = labels[query];
        if node.uniform == Some(own) {
            return;
        }
        match node.children {
            None => {
                for pos in node.start..node.end {
                    let j = self.order[pos];
                    if labels[j] == own {
                        continue;
                    }
                    let dist = self.metric.eval(q, self.coords_at(pos));
                    if dist > bound {
                        continue;
                    }
                    let (a, b) = (gid[query], gid[j]);
                    let hit = Hit {
                        dist,
                        local: j,
                        key: (a.min(b), a.max(b)),
                    };
                    if hit.better_than(best) {
                        *best = Some(hit);
                    }
                }
            }
            Some((l, r)) => {
                let ll = self.lower_bound(l, q);
                let lr = self.lower_bound(r, q);
                let (first, lf, second, ls) = if ll <= lr { (l, ll, r, lr) } else { (r, lr, l, ll) };
                for (child, lb) in [(first, lf), (second, ls)] {
                    let limit = best.map_or(bound, |b| b.dist.min(bound));
                    if lb > bound || lb * slack > limit {
                        continue;
                    }
                    self.descend(child, q, query, labels, gid, bound, slack, best);
                }
            }
        }
    }

    fn lower_bound(&self, idx: usize, q: &[f64]) -> f64 {
        let node = &self.nodes[idx];
        let gaps = q
            .iter()
            .zip(node.lo.iter().zip(&node.hi))
            .map(|(&x, (&lo, &hi))| (lo - x).max(x - hi).max(0.0));
        self.metric.norm_of_gaps(gaps)
    }
}

fn build_node(
    points: &[&[f64]],
    order: &mut [usize],
    start: usize,
    end: usize,
    dim: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &i in &order[start..end] {
        for k in 0..dim {
            lo[k] = lo[k].min(points[i][k]);
            hi[k] = hi[k].max(points[i][k]);
        }
    }
    let idx = nodes.len();
    nodes.push(Node {
        start,
        end,
        lo,
        hi,
        children: None,
        uniform: None,
    });
    if end - start <= LEAF {
        return idx;
    }
    let node = &nodes[idx];
    let (axis, width) = (0..dim)
        .map(|k| (k, node.hi[k] - node.lo[k]))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if width <= 0.0 {
        return idx;
    }
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        points[a][axis].total_cmp(&points[b][axis])
    });
    let l = build_node(points, order, start, mid, dim, nodes);
    let r = build_node(points, order, mid, end, dim, nodes);
    nodes[idx].children = Some((l, r));
    idx
}
