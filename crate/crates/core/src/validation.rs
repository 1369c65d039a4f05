//! Brute-force oracles over explicitly materialized level subgraphs.
//!
//! Nothing here goes through the merge tree or union-find: every query
//! rebuilds the vertex set `{i : f_n(X_i) >= lambda}`, walks the induced
//! edges breadth-first and applies the pruning rule by set intersection.

use std::collections::VecDeque;

use crate::clustertree::Partition;
use crate::error::{Error, Result};
use crate::graph::LevelGraph;

pub const DEFAULT_ORACLE_CAP: usize = 500;

#[derive(Clone, Copy, Debug)]
pub struct Oracle<'a> {
    graph: &'a LevelGraph,
}

impl<'a> Oracle<'a> {
    pub fn new(graph: &'a LevelGraph) -> Result<Self> {
        Self::with_cap(graph, DEFAULT_ORACLE_CAP)
    }

    pub fn with_cap(graph: &'a LevelGraph, cap: usize) -> Result<Self> {
        if graph.len() > cap {
            return Err(Error::OracleSize {
                n: graph.len(),
                cap,
            });
        }
        Ok(Self { graph })
    }

    /// BFS components of the subgraph induced on vertices with level `>= lambda`.
    pub fn components(&self, lambda: f64) -> Partition {
        let g = self.graph;
        let n = g.len();
        let present: Vec<bool> = (0..n).map(|v| g.density(v) >= lambda).collect();
        let mut seen = vec![false; n];
        let mut blocks = Vec::new();
        for start in 0..n {
            if !present[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut block = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &u in g.neighbors(v) {
                    if present[u] && !seen[u] {
                        seen[u] = true;
                        block.push(u);
                        queue.push_back(u);
                    }
                }
            }
            block.sort_unstable();
            blocks.push(block);
        }
        blocks
    }

    /// The pruning rule evaluated directly: blocks at `lambda` are joined when
    /// they meet the same block at `lambda - epsilon_tilde`. When
    /// `epsilon_tilde > 0` and `lambda <= epsilon_tilde`, all present vertices
    /// form one block.
    pub fn pruned_components(&self, lambda: f64, epsilon_tilde: f64) -> Result<Partition> {
        if !(epsilon_tilde >= 0.0 && epsilon_tilde.is_finite()) {
            return Err(Error::Parameter(format!(
                "pruning parameter must be finite and nonnegative, got {epsilon_tilde}"
            )));
        }
        let upper = self.components(lambda);
        if epsilon_tilde > 0.0 && lambda <= epsilon_tilde {
            let mut all: Vec<usize> = upper.into_iter().flatten().collect();
            all.sort_unstable();
            return Ok(if all.is_empty() { Vec::new() } else { vec![all] });
        }
        let lower = self.components(lambda - epsilon_tilde);
        let mut lower_block = vec![usize::MAX; self.graph.len()];
        for (b, block) in lower.iter().enumerate() {
            for &v in block {
                lower_block[v] = b;
            }
        }
        // Collect upper blocks by the lower block they sit in.
        let mut grouped: Vec<Vec<usize>> = vec![Vec::new(); lower.len()];
        for block in upper {
            let target = lower_block[block[0]];
            grouped[target].extend(block);
        }
        let mut result: Partition = grouped
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        result.sort_unstable_by_key(|b| b[0]);
        Ok(result)
    }
}

/// [`Oracle::components`] under the default size cap.
pub fn oracle_components(graph: &LevelGraph, lambda: f64) -> Result<Partition> {
    Ok(Oracle::new(graph)?.components(lambda))
}

/// [`Oracle::pruned_components`] under the default size cap.
pub fn oracle_prune(graph: &LevelGraph, lambda: f64, epsilon_tilde: f64) -> Result<Partition> {
    Oracle::new(graph)?.pruned_components(lambda, epsilon_tilde)
}
