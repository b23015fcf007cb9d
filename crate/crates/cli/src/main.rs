//! `causeway` - causal edge inference on transition networks.
//!
//! Subcommands compose into the full pipeline (synth -> ingest -> build ->
//! featurize -> train -> predict -> evaluate / cluster / importance), or run
//! end to end through the `experiment` presets. All randomness flows from
//! `--seed` (default 0); reruns with the same inputs and seed are
//! bit-identical regardless of `--threads`.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "causeway", version, about = "Causal edge inference on transition networks")]
struct Cli {
    /// Worker thread cap (default: available cores). Results do not depend
    /// on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse event records and extract transitions
    Ingest(IngestArgs),
    /// Aggregate transitions into a transition network
    Build(BuildArgs),
    /// Compute the per-edge feature matrix of a network
    Featurize(FeaturizeArgs),
    /// Generate a synthetic dataset with planted causal structure
    Synth(SynthArgs),
    /// Train an edge classifier
    Train(TrainArgs),
    /// Score edges with a trained model
    Predict(PredictArgs),
    /// Evaluate predictions against labels
    Evaluate(EvaluateArgs),
    /// PAM clustering of the feature matrix
    Cluster(ClusterArgs),
    /// Variable importance, per-feature histograms, and KS separation
    Importance(ImportanceArgs),
    /// Run a full experiment preset
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Event file (CSV header `entity_id,event_code,timestamp`, or JSONL)
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    output: PathBuf,
    /// Keep only transitions whose edge occurs at least this often
    #[arg(long)]
    min_edge_count: Option<usize>,
    /// Drop transitions with intervals above this cutoff
    #[arg(long)]
    max_interval: Option<i64>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// transitions.csv from `ingest`
    #[arg(long)]
    transitions: PathBuf,
    /// codes.csv (per-code frequencies) from `ingest`
    #[arg(long)]
    codes: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct FeaturizeArgs {
    /// network.json from `build`
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    min_edge_count: Option<u64>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Planted-network spec (TOML)
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Override the spec's rng_seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// features.csv from `featurize`
    #[arg(long)]
    features: PathBuf,
    /// labels.csv (`source,target,label`)
    #[arg(long)]
    labels: PathBuf,
    /// Task: random_vs_causal | direction | mixed
    #[arg(long, default_value = "random_vs_causal")]
    mode: String,
    /// Model kind: rf | logistic
    #[arg(long, default_value = "rf")]
    model: String,
    #[arg(long, default_value_t = 30)]
    trees: usize,
    #[arg(long, default_value_t = 5)]
    depth: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 50)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    /// Candidate features per split: `sqrt` or an integer
    #[arg(long, default_value = "sqrt")]
    features_per_split: String,
    /// Skip cross-validation (train the final model only)
    #[arg(long)]
    no_cv: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// predictions.csv from `predict`
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "random_vs_causal")]
    mode: String,
    /// Calibration risk-decile count
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Ground-truth labels; enables the agreement (ARI) report
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "random_vs_causal")]
    mode: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ImportanceArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "random_vs_causal")]
    mode: String,
    /// Number of top predictors to profile
    #[arg(long, default_value_t = 8)]
    top: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// exp1 | exp2 | exp3 | exp4
    #[arg(long)]
    preset: String,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Synthetic world spec (TOML); default: the preset's built-in world
    #[arg(long)]
    synth_config: Option<PathBuf>,
    /// exp4: user grouping map (CSV `code,group`)
    #[arg(long)]
    grouping_map: Option<PathBuf>,
    /// exp4: collapse codes into this many groups when no map is given
    #[arg(long, default_value_t = 20)]
    groups: usize,
    /// exp3: retention threshold; default: Youden threshold from an
    /// internal direction run
    #[arg(long)]
    threshold: Option<f64>,
    /// exp3: edge-count filter for the fresh sample
    #[arg(long, default_value_t = 21)]
    min_edge_count: u64,
    /// exp3: fresh sample size
    #[arg(long, default_value_t = 1600)]
    sample_size: usize,
    /// Also write events.csv for the generated world
    #[arg(long)]
    keep_events: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // ignore failure if a pool already exists (tests call main repeatedly)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result: Result<()> = match cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Build(args) => commands::build::run(args),
        Command::Featurize(args) => commands::featurize::run(args),
        Command::Synth(args) => commands::synth::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Predict(args) => commands::predict::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Cluster(args) => commands::cluster::run(args),
        Command::Importance(args) => commands::importance::run(args),
        Command::Experiment(args) => commands::experiment::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 1 validation/metric, 2 I/O or file format, 3 configuration.
fn exit_code(err: &anyhow::Error) -> u8 {
    use causeway_core::graph::GraphError;
    use causeway_core::ingest::IngestError;
    use causeway_core::matrix::MatrixError;
    use causeway_core::model::ModelError;
    use causeway_core::synth::SynthError;

    for cause in err.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
        if let Some(ingest) = cause.downcast_ref::<IngestError>() {
            return match ingest {
                IngestError::UnknownFormat(_) => 3,
                _ => 2,
            };
        }
        if let Some(matrix) = cause.downcast_ref::<MatrixError>() {
            return match matrix {
                MatrixError::Io(_)
                | MatrixError::Malformed(_)
                | MatrixError::RowWidth(..)
                | MatrixError::UnknownLabel(_) => 2,
                MatrixError::MissingLabels(..) => 1,
            };
        }
        if let Some(graph) = cause.downcast_ref::<GraphError>() {
            return match graph {
                GraphError::Malformed(_) | GraphError::UnsupportedVersion(_) => 2,
                _ => 1,
            };
        }
        if let Some(model) = cause.downcast_ref::<ModelError>() {
            return match model {
                ModelError::Malformed(_) | ModelError::UnsupportedVersion(_) => 2,
                ModelError::InvalidConfig(_) => 3,
                _ => 1,
            };
        }
        if let Some(synth) = cause.downcast_ref::<SynthError>() {
            return match synth {
                SynthError::InvalidSpec(_) | SynthError::Sampling { .. } => 3,
            };
        }
        if cause.downcast_ref::<causeway_core::eval::EvalError>().is_some() {
            return 1;
        }
    }
    1
}
