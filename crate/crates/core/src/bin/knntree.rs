use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use knn_cluster_tree::cli::{cmd_experiment, cmd_prune, cmd_tree, InputSource, KChoice, RunConfig};
use knn_cluster_tree::density::EpsilonMode;
use knn_cluster_tree::experiment::ExperimentName;
use knn_cluster_tree::graph::GraphKind;
use knn_cluster_tree::{Error, Result};

/// Cluster trees from k-NN graphs, with pruning of spurious branches.
#[derive(Parser, Debug)]
#[command(name = "knntree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the unpruned cluster tree.
    Tree(RunArgs),
    /// Build and prune the cluster tree.
    Prune(RunArgs),
    /// Like `prune`, but print only the leaf count.
    Modes(RunArgs),
    /// Reproduce a mode-recovery experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// CSV file with one point per row.
    #[arg(long, conflicts_with = "mixture", required_unless_present = "mixture")]
    input: Option<PathBuf>,
    /// Skip the first CSV row.
    #[arg(long, requires = "input")]
    header: bool,
    /// Mixture spec JSON to sample from instead of reading a CSV.
    #[arg(long, requires = "n")]
    mixture: Option<PathBuf>,
    /// Sample size for --mixture.
    #[arg(long)]
    n: Option<usize>,
    /// Seed for --mixture.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighbor count.
    #[arg(long, conflicts_with = "k_rule")]
    k: Option<usize>,
    /// Rule for k when --k is not given.
    #[arg(long, value_enum, default_value_t = KRule::Logn15)]
    k_rule: KRule,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = Graph::Knn)]
    graph: Graph,
    /// fixed:V | fsqrtk | f4sqrtk | theory[:DELTA]
    #[arg(long, default_value = "fsqrtk")]
    epsilon: String,
    /// Where to write the tree JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the leaf summary CSV.
    #[arg(long)]
    leaves: Option<PathBuf>,
    /// Where to write the graph edge list CSV.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KRule {
    Logn15,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Graph {
    Knn,
    Mutual,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Experiment {
    #[value(name = "fig3_left")]
    Fig3Left,
    #[value(name = "fig3_right")]
    Fig3Right,
    #[value(name = "fig2")]
    Fig2,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: Experiment,
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// First seed of the batch.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let input = match (&self.input, &self.mixture) {
            (Some(path), None) => InputSource::Csv {
                path: path.clone(),
                has_header: self.header,
            },
            (None, Some(spec)) => InputSource::Mixture {
                spec: spec.clone(),
                n: self.n.ok_or_else(|| Error::Parameter("--mixture needs --n".into()))?,
                seed: self.seed,
            },
            _ => {
                return Err(Error::Parameter(
                    "exactly one of --input and --mixture is required".into(),
                ))
            }
        };
        let mut config = RunConfig::new(input);
        config.k = match (self.k, self.k_rule) {
            (Some(k), _) => KChoice::Fixed(k),
            (None, KRule::Logn15) => KChoice::LogN15,
        };
        config.theta = self.theta;
        config.graph = match self.graph {
            Graph::Knn => GraphKind::Knn,
            Graph::Mutual => GraphKind::Mutual,
        };
        config.epsilon = self.epsilon.parse::<EpsilonMode>()?;
        config.out = self.out.clone();
        config.leaves_out = self.leaves.clone();
        config.edges_out = self.edges.clone();
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    match cli.command {
        Command::Tree(args) => {
            let summary = cmd_tree(&args.config()?)?;
            writeln!(stdout, "{}", serde_json::to_string(&summary)?)?;
        }
        Command::Prune(args) => {
            let summary = cmd_prune(&args.config()?)?;
            writeln!(stdout, "{}", serde_json::to_string(&summary)?)?;
        }
        Command::Modes(args) => {
            let summary = cmd_prune(&args.config()?)?;
            writeln!(stdout, "{}", summary.leaf_count)?;
        }
        Command::Experiment(args) => {
            let name = match args.name {
                Experiment::Fig3Left => ExperimentName::Fig3Left,
                Experiment::Fig3Right => ExperimentName::Fig3Right,
                Experiment::Fig2 => ExperimentName::Fig2,
            };
            cmd_experiment(name, args.seeds, args.seed, args.out.as_deref(), &mut stdout)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // Usage errors share the parameter-error code.
            return if err.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
