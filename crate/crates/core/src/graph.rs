//! k-NN and mutual k-NN graphs with a radius scale `theta`.

use std::io::Write;

use rayon::prelude::*;

use crate::density::DensityEstimate;
use crate::error::{Error, Result};
use crate::geometry::{KnnIndex, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// `X_i ~ X_j` when either point lies in the other's scaled k-NN ball.
    Knn,
    /// `X_i ~ X_j` when each point lies in the other's scaled k-NN ball.
    Mutual,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Knn => "knn",
            GraphKind::Mutual => "mutual",
        }
    }
}

impl std::fmt::Display for GraphKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(GraphKind::Knn),
            "mutual" => Ok(GraphKind::Mutual),
            _ => Err(Error::parameter(format!(
                "unknown graph kind {s:?} (expected knn or mutual)"
            ))),
        }
    }
}

/// Undirected graph over sample indices with the density value of every vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelGraph {
    kind: GraphKind,
    theta: f64,
    adjacency: Vec<Vec<usize>>,
    densities: Vec<f64>,
}

impl LevelGraph {
    /// Builds the graph from the empirical radii `r_{k,n}` using closed balls.
    pub fn build(
        points: &PointSet,
        index: &KnnIndex,
        density: &DensityEstimate,
        kind: GraphKind,
        theta: f64,
    ) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::parameter(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        let n = points.len();
        if index.len() != n || density.len() != n {
            return Err(Error::parameter(
                "k-NN index and density estimate do not match the point set",
            ));
        }

        let reach: Vec<f64> = index.radii().iter().map(|r| theta * r).collect();
        let adjacency: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| {
                        if j == i {
                            return false;
                        }
                        let dist = points.distance(i, j);
                        let in_i = dist <= reach[i];
                        let in_j = dist <= reach[j];
                        match kind {
                            GraphKind::Knn => in_i || in_j,
                            GraphKind::Mutual => in_i && in_j,
                        }
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            kind,
            theta,
            adjacency,
            densities: density.values().to_vec(),
        })
    }

    /// Assembles a graph from an explicit edge list; used for hand-built
    /// instances. Edges are symmetrized and deduplicated.
    pub fn from_edges(
        densities: Vec<f64>,
        edges: &[(usize, usize)],
        kind: GraphKind,
        theta: f64,
    ) -> Result<Self> {
        let n = densities.len();
        if let Some(i) = densities.iter().position(|f| !f.is_finite()) {
            return Err(Error::parameter(format!("vertex {i} has a non-finite level")));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::parameter(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::parameter(format!("self-loop at vertex {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            kind,
            theta,
            adjacency,
            densities,
        })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn density(&self, i: usize) -> f64 {
        self.densities[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Writes the edge list as headerless `i,j` rows.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for (i, j) in self.edges() {
            writer.write_record([i.to_string(), j.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}
