//! Point storage, Euclidean distances and exact k-nearest-neighbor radii.
//!
//! Neighbor search is an exact all-pairs scan. Distances are compared as
//! squared sums evaluated in coordinate order, so every caller that goes
//! through [`PointSet::sq_distance`] sees bit-identical values regardless of
//! argument order.

use std::collections::HashMap;
use std::io::Read;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A finite sample of `n` points in `d` dimensions, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Validates and packs raw coordinate rows.
    ///
    /// Rows keep their input order as point indices. Ragged rows, non-finite
    /// values and exact duplicates are rejected.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                row: 0,
                expected: 1,
                found: 0,
            });
        }

        let mut coords = Vec::with_capacity(rows.len() * dim);
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(rows.len());
        for (row, values) in rows.iter().enumerate() {
            let values = values.as_ref();
            if values.len() != dim {
                return Err(Error::DimensionMismatch {
                    row,
                    expected: dim,
                    found: values.len(),
                });
            }
            if let Some(column) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidValue { row, column });
            }
            // +0.0 and -0.0 are the same location.
            let key: Vec<u64> = values.iter().map(|&v| (v + 0.0).to_bits()).collect();
            if let Some(&original) = seen.get(&key) {
                return Err(Error::DuplicatePoint {
                    original,
                    duplicate: row,
                });
            }
            seen.insert(key, row);
            coords.extend_from_slice(values);
        }

        Ok(Self { dim, coords })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    #[inline]
    pub fn sq_distance(&self, i: usize, j: usize) -> f64 {
        sq_euclidean(self.point(i), self.point(j))
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.sq_distance(i, j).sqrt()
    }
}

/// Reads one point per CSV row. Fields are trimmed decimal floats; blank
/// lines are skipped; `has_header` drops the first row.
pub fn read_points_csv<R: Read>(reader: R, has_header: bool) -> Result<PointSet> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row, record) in csv_reader.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(column, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidValue { row, column })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    PointSet::from_rows(&rows)
}

#[inline]
pub fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let diff = x - y;
            diff * diff
        })
        .sum()
}

/// k-NN radii and neighbor lists for a fixed `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnIndex {
    k: usize,
    radii: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl KnnIndex {
    /// Computes, for every point, the distance to its `k`-th nearest other
    /// point and the `k` indices realizing it.
    ///
    /// Neighbors are ordered by distance, ties broken by ascending index.
    pub fn build(points: &PointSet, k: usize) -> Result<Self> {
        let n = points.len();
        if k == 0 || k >= n {
            return Err(Error::parameter(format!(
                "k must satisfy 1 <= k <= n-1 (k = {k}, n = {n})"
            )));
        }

        let (radii, neighbors): (Vec<f64>, Vec<Vec<usize>>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut candidates: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (points.sq_distance(i, j), j))
                    .collect();
                let by_distance =
                    |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                candidates.select_nth_unstable_by(k - 1, by_distance);
                candidates.truncate(k);
                candidates.sort_unstable_by(by_distance);
                let radius = candidates[k - 1].0.sqrt();
                (radius, candidates.into_iter().map(|(_, j)| j).collect())
            })
            .unzip();

        Ok(Self {
            k,
            radii,
            neighbors,
        })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// `r_{k,n}(X_i)` for every point.
    #[inline]
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    #[inline]
    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }
}
