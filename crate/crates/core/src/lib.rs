//! Cluster trees from k-nearest-neighbor graphs.
//!
//! A sample is turned into a k-NN (or mutual k-NN) graph whose vertices carry
//! the k-NN density estimate. Removing vertices in increasing order of
//! density yields a nested family of subgraphs whose connected components
//! form the empirical cluster tree ([`clustertree::MergeTree`]). Branches
//! caused by sampling noise are removed by [`pruning::prune`], which
//! reconnects components at level `lambda` when they already share a
//! component slightly lower down, at `lambda - eps`.
//!
//! ```
//! use knn_cluster_tree::{geometry::PointSet, graph::GraphKind, pruning, Pipeline};
//!
//! let points = PointSet::from_rows(&[[0.0], [0.1], [0.25], [5.0], [5.2], [5.3]]).unwrap();
//! let run = Pipeline::run(points, 2, GraphKind::Knn, 1.0).unwrap();
//! let pruned = pruning::prune(&run.tree, 0.0).unwrap();
//! assert_eq!(pruned.leaf_count(), run.tree.leaf_count());
//! ```

pub mod cli;
pub mod clustertree;
pub mod density;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod graph;
pub mod pruning;
pub mod synth;
mod union_find;
pub mod validation;

pub use error::{Error, Result};

use density::DensityEstimate;
use geometry::{KnnIndex, PointSet};
use graph::{GraphKind, LevelGraph};

/// Every intermediate product of one run, from points to the unpruned tree.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub points: PointSet,
    pub index: KnnIndex,
    pub density: DensityEstimate,
    pub graph: LevelGraph,
    pub tree: clustertree::MergeTree,
}

impl Pipeline {
    pub fn run(points: PointSet, k: usize, kind: GraphKind, theta: f64) -> Result<Self> {
        let index = KnnIndex::build(&points, k)?;
        let density = DensityEstimate::from_index(&index, points.dim())?;
        let graph = LevelGraph::build(&points, &index, &density, kind, theta)?;
        let tree = clustertree::MergeTree::build(&graph);
        Ok(Self {
            points,
            index,
            density,
            graph,
            tree,
        })
    }
}

/// `k = round((ln n)^1.5)`, at least 1.
pub fn k_logn15(n: usize) -> usize {
    if n < 2 {
        return 1;
    }
    ((n as f64).ln().powf(1.5).round() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_rule() {
        assert_eq!(k_logn15(1), 1);
        assert_eq!(k_logn15(2), 1);
        assert_eq!(k_logn15(500), 15);
        assert_eq!(k_logn15(2000), 21);
    }
}
