//! Point sets, sparse vectors and `ℓp` distances for `p ∈ {0, 1, 2, ∞}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Distance function over `R^d`.
///
/// `L0` is the Hamming distance: the number of coordinates that differ
/// under exact floating-point equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L0,
    L1,
    L2,
    Linf,
}

impl Metric {
    /// Distance between two equal-length slices. The caller guarantees the
    /// lengths match; use [`distance`] for a checked version.
    #[inline]
    pub fn eval(self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), v.len());
        let pairs = u.iter().zip(v);
        match self {
            Metric::L0 => pairs.filter(|(a, b)| a != b).count() as f64,
            Metric::L1 => pairs.map(|(a, b)| (a - b).abs()).sum(),
            Metric::L2 => pairs.map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Metric::Linf => pairs.map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        }
    }

    /// Combines per-coordinate absolute gaps into a norm. Used for lower
    /// bounds against axis-aligned boxes.
    #[inline]
    pub(crate) fn norm_of_gaps(self, gaps: impl Iterator<Item = f64>) -> f64 {
        match self {
            Metric::L0 => gaps.filter(|g| *g > 0.0).count() as f64,
            Metric::L1 => gaps.sum(),
            Metric::L2 => gaps.map(|g| g * g).sum::<f64>().sqrt(),
            Metric::Linf => gaps.fold(0.0, f64::max),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::L0 => "l0",
            Metric::L1 => "l1",
            Metric::L2 => "l2",
            Metric::Linf => "linf",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l0" | "hamming" => Ok(Metric::L0),
            "l1" | "manhattan" => Ok(Metric::L1),
            "l2" | "euclidean" => Ok(Metric::L2),
            "linf" | "inf" | "chebyshev" => Ok(Metric::Linf),
            other => Err(Error::input(format!("unknown metric {other:?}"))),
        }
    }
}

/// Checked `ℓp` distance between two dense vectors.
pub fn distance(u: &[f64], v: &[f64], metric: Metric) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(metric.eval(u, v))
}

/// `n ≥ 1` points of a common dimension `d ≥ 1`, stored row-major, tagged
/// with the metric they are clustered under. Point ids are `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    metric: Metric,
}

impl PointSet {
    pub fn new(rows: Vec<Vec<f64>>, metric: Metric) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::input(format!(
                    "point {i} has dimension {} but point 0 has {dim}",
                    row.len()
                )));
            }
            coords.extend_from_slice(row);
        }
        Self::from_flat(dim, coords, metric)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, metric: Metric) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("point dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(Error::input("point set must contain at least one point"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::input(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::input(format!(
                "non-finite coordinate in point {}",
                pos / dim
            )));
        }
        Ok(PointSet {
            dim,
            coords,
            metric,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false: a point set holds at least one point.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Same coordinates under a different metric.
    pub fn with_metric(&self, metric: Metric) -> PointSet {
        PointSet {
            metric,
            ..self.clone()
        }
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.eval(self.point(i), self.point(j))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Per-coordinate `(min, max)` over all points.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.iter() {
            for (slot, &x) in b.iter_mut().zip(p) {
                slot.0 = slot.0.min(x);
                slot.1 = slot.1.max(x);
            }
        }
        b
    }

    /// True when every coordinate is an integer (as required by the Hamming
    /// routines).
    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.fract() == 0.0)
    }
}

/// A vector stored as strictly increasing `(index, value)` pairs with
/// nonzero values; every other coordinate of the `dim`-dimensional vector is
/// zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoint {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparsePoint {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::input("sparse indices must be strictly increasing"));
            }
        }
        if let Some(&(i, _)) = entries.iter().find(|(i, _)| *i >= dim) {
            return Err(Error::input(format!(
                "sparse index {i} out of range for dimension {dim}"
            )));
        }
        if entries.iter().any(|(_, v)| *v == 0.0 || !v.is_finite()) {
            return Err(Error::input("sparse values must be finite and nonzero"));
        }
        Ok(SparsePoint { dim, entries })
    }

    /// Builds from unsorted entries, summing duplicates and dropping zeros.
    pub fn from_unsorted(dim: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        Self::new(dim, merged)
    }

    pub fn from_dense(v: &[f64]) -> Self {
        SparsePoint {
            dim: v.len(),
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, x)| (i, *x))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &(i, x) in &self.entries {
            v[i] = x;
        }
        v
    }
}

/// Distance between two sparse vectors without densifying them. Implicit
/// zeros participate like explicit ones, so the result equals
/// [`distance`] on the dense forms for every metric.
pub fn sparse_distance(u: &SparsePoint, v: &SparsePoint, metric: Metric) -> Result<f64> {
    if u.dim != v.dim {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            u.dim, v.dim
        )));
    }
    let (a, b) = (&u.entries, &v.entries);
    let (mut i, mut j) = (0, 0);
    let mut gaps = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        let gap = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.0 == y.0 => {
                i += 1;
                j += 1;
                (x.1 - y.1).abs()
            }
            (Some(x), Some(y)) if x.0 < y.0 => {
                i += 1;
                x.1.abs()
            }
            (Some(x), None) => {
                i += 1;
                x.1.abs()
            }
            (_, Some(y)) => {
                j += 1;
                y.1.abs()
            }
            (None, None) => unreachable!(),
        };
        gaps.push(gap);
    }
    Ok(metric.norm_of_gaps(gaps.into_iter()))
}
