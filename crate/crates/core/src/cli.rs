//! Command implementations behind the `knntree` binary.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::density::{suggest_epsilon_tilde, EpsilonMode};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, write_rows, ExperimentName};
use crate::geometry::{read_points_csv, PointSet};
use crate::graph::GraphKind;
use crate::pruning::prune;
use crate::synth::MixtureSpec;
use crate::{k_logn15, Pipeline};

#[derive(Clone, Debug, PartialEq)]
pub enum InputSource {
    Csv { path: PathBuf, has_header: bool },
    Mixture { spec: PathBuf, n: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    /// `round((ln n)^1.5)`.
    LogN15,
}

impl KChoice {
    pub fn resolve(self, n: usize) -> Result<usize> {
        let k = match self {
            KChoice::Fixed(k) => k,
            KChoice::LogN15 => k_logn15(n),
        };
        if k == 0 {
            return Err(Error::parameter("k must be at least 1"));
        }
        Ok(k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: InputSource,
    pub k: KChoice,
    pub theta: f64,
    pub graph: GraphKind,
    pub epsilon: EpsilonMode,
    /// Tree JSON destination.
    pub out: Option<PathBuf>,
    /// Leaf summary CSV destination (prune only).
    pub leaves_out: Option<PathBuf>,
    /// Edge list CSV destination.
    pub edges_out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(input: InputSource) -> Self {
        Self {
            input,
            k: KChoice::LogN15,
            theta: 1.0,
            graph: GraphKind::Knn,
            epsilon: EpsilonMode::FOverSqrtK,
            out: None,
            leaves_out: None,
            edges_out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub leaf_count: usize,
    pub f_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_tilde: Option<f64>,
}

fn load_points(input: &InputSource) -> Result<PointSet> {
    match input {
        InputSource::Csv { path, has_header } => {
            read_points_csv(BufReader::new(File::open(path)?), *has_header)
        }
        InputSource::Mixture { spec, n, seed } => {
            let text = std::fs::read_to_string(spec)?;
            // A malformed spec file is an input problem, not a parameter one.
            let spec = MixtureSpec::from_json(&text)?;
            spec.sample(*n, *seed)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run_pipeline(config: &RunConfig) -> Result<Pipeline> {
    let points = load_points(&config.input)?;
    let k = config.k.resolve(points.len())?;
    let run = Pipeline::run(points, k, config.graph, config.theta)?;
    if let Some(path) = &config.edges_out {
        let mut out = create(path)?;
        run.graph.write_edge_csv(&mut out)?;
        out.flush()?;
    }
    Ok(run)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Builds the unpruned tree, writes its JSON when requested and returns the
/// run summary.
pub fn cmd_tree(config: &RunConfig) -> Result<Summary> {
    let run = run_pipeline(config)?;
    if let Some(path) = &config.out {
        write_json(path, &run.tree.document())?;
    }
    Ok(Summary {
        n: run.points.len(),
        d: run.points.dim(),
        k: run.index.k(),
        leaf_count: run.tree.leaf_count(),
        f_max: run.density.f_max(),
        epsilon_tilde: None,
    })
}

/// Builds and prunes the tree. `F` is the run's largest density estimate.
pub fn cmd_prune(config: &RunConfig) -> Result<Summary> {
    let run = run_pipeline(config)?;
    let k = run.index.k();
    let n = run.points.len();
    let eps = suggest_epsilon_tilde(config.epsilon, run.density.f_max(), k, n)?;
    let pruned = prune(&run.tree, eps)?;
    if let Some(path) = &config.out {
        write_json(path, &pruned.document())?;
    }
    if let Some(path) = &config.leaves_out {
        let mut out = create(path)?;
        pruned.write_leaf_csv(&mut out)?;
        out.flush()?;
    }
    Ok(Summary {
        n,
        d: run.points.dim(),
        k,
        leaf_count: pruned.leaf_count(),
        f_max: run.density.f_max(),
        epsilon_tilde: Some(eps),
    })
}

/// Runs an experiment and writes its CSV to `out`, or to `stdout` when no
/// path is given.
pub fn cmd_experiment(
    name: ExperimentName,
    seeds: usize,
    first_seed: u64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<usize> {
    let rows = run_experiment(name, seeds, first_seed)?;
    match out {
        Some(path) => {
            let mut file = create(path)?;
            write_rows(&rows, &mut file)?;
            file.flush()?;
        }
        None => write_rows(&rows, stdout)?,
    }
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_choice() {
        assert_eq!(KChoice::Fixed(3).resolve(10).unwrap(), 3);
        assert!(KChoice::Fixed(0).resolve(10).is_err());
        assert_eq!(KChoice::LogN15.resolve(500).unwrap(), 15);
    }

    #[test]
    fn tree_and_prune_on_line() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("points.csv");
        std::fs::write(&input, "0\n1\n3\n").unwrap();
        let mut config = RunConfig::new(InputSource::Csv {
            path: input,
            has_header: false,
        });
        config.k = KChoice::Fixed(1);
        config.out = Some(dir.path().join("tree.json"));
        let summary = cmd_tree(&config).unwrap();
        assert_eq!((summary.n, summary.d, summary.k), (3, 1, 1));
        assert_eq!(summary.leaf_count, 1);
        assert_eq!(summary.f_max, 1.0 / 6.0);

        config.epsilon = EpsilonMode::Fixed(0.0);
        let pruned = cmd_prune(&config).unwrap();
        assert_eq!(pruned.leaf_count, summary.leaf_count);
        config.epsilon = EpsilonMode::Fixed(1e6);
        assert_eq!(cmd_prune(&config).unwrap().leaf_count, 1);
    }

    #[test]
    fn missing_file_is_input_error() {
        let config = RunConfig::new(InputSource::Csv {
            path: PathBuf::from("/nonexistent/points.csv"),
            has_header: false,
        });
        assert_eq!(cmd_tree(&config).unwrap_err().exit_code(), 2);
    }
}
