//! Mode-recovery experiments on synthetic mixtures.
//!
//! * `fig3_left`: five-mode mixture in d = 7, n = 500, `k = round((ln n)^1.5)`,
//!   theta = 1. Leaf counts over 32 evenly spaced values of eps in
//!   `[0, 1.5 F / sqrt(k)]`, for both graph kinds. `F` is the largest
//!   density estimate over the whole seed batch.
//! * `fig3_right`: same mixture, eps = `F / (4 sqrt(k))`, n in
//!   {250, 500, 1000, 2000, 4000}; `F` is the batch maximum for each n.
//! * `fig2`: two-mode mixture in d = 2, n = 500, k = 12, theta = 1, k-NN
//!   graph, eps = `F / sqrt(k)` with `F` the run's own maximum. Also reports
//!   the number of vertices above ten evenly spaced levels up to `F`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{suggest_epsilon_tilde, EpsilonMode};
use crate::error::{Error, Result};
use crate::graph::GraphKind;
use crate::pruning::prune;
use crate::synth::MixtureSpec;
use crate::{k_logn15, Pipeline};

pub const FIG3_DIM: usize = 7;
pub const FIG3_LEFT_N: usize = 500;
pub const FIG3_LEFT_GRID: usize = 32;
pub const FIG3_LEFT_SPAN: f64 = 1.5;
pub const FIG3_RIGHT_NS: [usize; 5] = [250, 500, 1000, 2000, 4000];
pub const FIG2_N: usize = 500;
pub const FIG2_K: usize = 12;
pub const FIG2_LEVELS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentName {
    Fig3Left,
    Fig3Right,
    Fig2,
}

impl ExperimentName {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Fig3Left => "fig3_left",
            ExperimentName::Fig3Right => "fig3_right",
            ExperimentName::Fig2 => "fig2",
        }
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3_left" => Ok(Self::Fig3Left),
            "fig3_right" => Ok(Self::Fig3Right),
            "fig2" => Ok(Self::Fig2),
            _ => Err(Error::parameter(format!("unknown experiment {s:?}"))),
        }
    }
}

/// One CSV row. `row_kind` is `run` (one seed), `mean` (average over the
/// seeds of one configuration) or `level` (vertex count above `lambda`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub row_kind: &'static str,
    pub experiment: &'static str,
    pub graph: &'static str,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub theta: f64,
    pub seed: Option<u64>,
    pub f_max: f64,
    pub epsilon_tilde: Option<f64>,
    pub leaf_count: Option<usize>,
    pub mean_leaf_count: Option<f64>,
    pub lambda: Option<f64>,
    pub level_count: Option<usize>,
}

impl ExperimentRow {
    fn base(experiment: ExperimentName, graph: GraphKind, n: usize, d: usize, k: usize) -> Self {
        Self {
            row_kind: "run",
            experiment: experiment.as_str(),
            graph: graph.as_str(),
            n,
            d,
            k,
            theta: 1.0,
            seed: None,
            f_max: f64::NAN,
            epsilon_tilde: None,
            leaf_count: None,
            mean_leaf_count: None,
            lambda: None,
            level_count: None,
        }
    }
}

const KINDS: [GraphKind; 2] = [GraphKind::Knn, GraphKind::Mutual];

struct Batch {
    /// Per seed: one pipeline per graph kind.
    runs: Vec<(u64, Vec<Pipeline>)>,
    f_max: f64,
}

fn run_batch(
    spec: &MixtureSpec,
    n: usize,
    k: usize,
    kinds: &[GraphKind],
    seeds: &[u64],
) -> Result<Batch> {
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let points = spec.sample(n, seed)?;
            let per_kind = kinds
                .iter()
                .map(|&kind| Pipeline::run(points.clone(), k, kind, 1.0))
                .collect::<Result<Vec<_>>>()?;
            Ok((seed, per_kind))
        })
        .collect::<Result<Vec<_>>>()?;
    let f_max = runs
        .iter()
        .map(|(_, p)| p[0].density.f_max())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Batch { runs, f_max })
}

/// Averages `run` rows per configuration. Configurations are (graph, n) and,
/// when `by_epsilon`, the pruning parameter as well; otherwise `f_max` and
/// `epsilon_tilde` are averaged too.
fn mean_rows(rows: &[ExperimentRow], by_epsilon: bool) -> Vec<ExperimentRow> {
    struct Acc {
        row: ExperimentRow,
        leaves: usize,
        f_max: f64,
        eps: f64,
        count: usize,
    }
    let key = |r: &ExperimentRow| {
        (
            r.graph,
            r.n,
            if by_epsilon { r.epsilon_tilde.map(f64::to_bits) } else { None },
        )
    };
    let mut groups: Vec<Acc> = Vec::new();
    for row in rows.iter().filter(|r| r.row_kind == "run") {
        let leaves = row.leaf_count.unwrap_or(0);
        let eps = row.epsilon_tilde.unwrap_or(0.0);
        match groups.iter_mut().find(|g| key(&g.row) == key(row)) {
            Some(g) => {
                g.leaves += leaves;
                g.f_max += row.f_max;
                g.eps += eps;
                g.count += 1;
            }
            None => {
                let mut mean = row.clone();
                mean.row_kind = "mean";
                mean.seed = None;
                mean.leaf_count = None;
                groups.push(Acc {
                    row: mean,
                    leaves,
                    f_max: row.f_max,
                    eps,
                    count: 1,
                });
            }
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let mut row = g.row;
            let count = g.count as f64;
            row.mean_leaf_count = Some(g.leaves as f64 / count);
            if !by_epsilon {
                row.f_max = g.f_max / count;
                row.epsilon_tilde = Some(g.eps / count);
            }
            row
        })
        .collect()
}

/// Runs an experiment over seeds `first_seed .. first_seed + seeds`.
pub fn run_experiment(name: ExperimentName, seeds: usize, first_seed: u64) -> Result<Vec<ExperimentRow>> {
    if seeds == 0 {
        return Err(Error::parameter("at least one seed is required"));
    }
    let seed_list: Vec<u64> = (0..seeds as u64).map(|s| first_seed + s).collect();
    let mut rows = Vec::new();
    match name {
        ExperimentName::Fig3Left => {
            let spec = MixtureSpec::five_modes(FIG3_DIM)?;
            let n = FIG3_LEFT_N;
            let k = k_logn15(n);
            let batch = run_batch(&spec, n, k, &KINDS, &seed_list)?;
            let top = FIG3_LEFT_SPAN * batch.f_max / (k as f64).sqrt();
            let grid: Vec<f64> = (0..FIG3_LEFT_GRID)
                .map(|j| top * j as f64 / (FIG3_LEFT_GRID - 1) as f64)
                .collect();
            for (kind_index, &kind) in KINDS.iter().enumerate() {
                for &eps in &grid {
                    for (seed, pipelines) in &batch.runs {
                        let pruned = prune(&pipelines[kind_index].tree, eps)?;
                        let mut row = ExperimentRow::base(name, kind, n, FIG3_DIM, k);
                        row.seed = Some(*seed);
                        row.f_max = batch.f_max;
                        row.epsilon_tilde = Some(eps);
                        row.leaf_count = Some(pruned.leaf_count());
                        rows.push(row);
                    }
                }
            }
        }
        ExperimentName::Fig3Right => {
            let spec = MixtureSpec::five_modes(FIG3_DIM)?;
            for &n in &FIG3_RIGHT_NS {
                let k = k_logn15(n);
                let batch = run_batch(&spec, n, k, &KINDS, &seed_list)?;
                let eps = suggest_epsilon_tilde(EpsilonMode::FOverFourSqrtK, batch.f_max, k, n)?;
                for (kind_index, &kind) in KINDS.iter().enumerate() {
                    for (seed, pipelines) in &batch.runs {
                        let pruned = prune(&pipelines[kind_index].tree, eps)?;
                        let mut row = ExperimentRow::base(name, kind, n, FIG3_DIM, k);
                        row.seed = Some(*seed);
                        row.f_max = batch.f_max;
                        row.epsilon_tilde = Some(eps);
                        row.leaf_count = Some(pruned.leaf_count());
                        rows.push(row);
                    }
                }
            }
        }
        ExperimentName::Fig2 => {
            let spec = MixtureSpec::two_modes();
            let (n, k) = (FIG2_N, FIG2_K);
            let batch = run_batch(&spec, n, k, &[GraphKind::Knn], &seed_list)?;
            for (seed, pipelines) in &batch.runs {
                let run = &pipelines[0];
                let f_max = run.density.f_max();
                let eps = suggest_epsilon_tilde(EpsilonMode::FOverSqrtK, f_max, k, n)?;
                let pruned = prune(&run.tree, eps)?;
                let mut row = ExperimentRow::base(name, GraphKind::Knn, n, spec.d, k);
                row.seed = Some(*seed);
                row.f_max = f_max;
                row.epsilon_tilde = Some(eps);
                row.leaf_count = Some(pruned.leaf_count());
                rows.push(row.clone());
                for j in 1..=FIG2_LEVELS {
                    let lambda = f_max * j as f64 / FIG2_LEVELS as f64;
                    let mut level = row.clone();
                    level.row_kind = "level";
                    level.leaf_count = None;
                    level.lambda = Some(lambda);
                    level.level_count =
                        Some(run.density.values().iter().filter(|&&f| f >= lambda).count());
                    rows.push(level);
                }
            }
        }
    }
    let means = mean_rows(&rows, name == ExperimentName::Fig3Left);
    rows.extend(means);
    Ok(rows)
}

pub fn write_rows<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names() {
        assert_eq!("fig2".parse::<ExperimentName>().unwrap(), ExperimentName::Fig2);
        assert!("fig4".parse::<ExperimentName>().is_err());
    }

    #[test]
    fn fig2_levels_shrink() {
        let rows = run_experiment(ExperimentName::Fig2, 2, 0).unwrap();
        for seed in [0, 1] {
            let counts: Vec<usize> = rows
                .iter()
                .filter(|r| r.row_kind == "level" && r.seed == Some(seed))
                .map(|r| r.level_count.unwrap())
                .collect();
            assert_eq!(counts.len(), FIG2_LEVELS);
            assert!(counts.windows(2).all(|w| w[0] >= w[1]));
            assert!(*counts.last().unwrap() >= 1);
        }
        let means: Vec<_> = rows.iter().filter(|r| r.row_kind == "mean").collect();
        assert_eq!(means.len(), 1);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = run_experiment(ExperimentName::Fig2, 1, 3).unwrap();
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "row_kind,experiment,graph,n,d,k,theta,seed,f_max,epsilon_tilde,leaf_count,mean_leaf_count,lambda,level_count"
        );
        assert_eq!(lines.count(), rows.len());
    }
}
