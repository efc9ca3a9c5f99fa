//! `backchannel`: train, evaluate and run detectors of non-lexical
//! confirmations.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use backchannel_core::{Error, ErrorCategory};
use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "backchannel", version, about = "Detect non-lexical confirmations in speech audio")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by all commands. Flags override values from `--config`.
#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving all artifacts and `run.json`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Feature set, e.g. `stacked-formants`, `mfcc-delta`, `pitch`
    #[arg(long, short = 'f', global = true)]
    feature_set: Option<String>,
    #[arg(long, global = true)]
    stack_depth: Option<usize>,
    /// SVM box constraint
    #[arg(long, global = true)]
    c: Option<f64>,
    /// SMO stopping tolerance
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// RBF kernel width
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Retained variance for PCA
    #[arg(long, global = true)]
    pca_epsilon: Option<f64>,
    /// Rolling vote mean that must be exceeded to latch a segment
    #[arg(long, global = true, allow_negative_numbers = true)]
    majority_threshold: Option<f64>,
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write per-segment feature dumps (CSV plus JSON sidecar)
    Extract,
    /// Train a model on every segment of the manifest
    Train,
    /// Score the hyperparameter grid by leave-one-speaker-out CV
    GridSearch,
    /// Train on one speaker-disjoint part of the corpus and test on the rest
    Evaluate(EvaluateArgs),
    /// Classify segments offline and write per-frame decisions
    Classify(InputArgs),
    /// Stream segments through the online classifier and write triggers
    Listen(ListenArgs),
    /// Generate the synthetic corpus (WAV files and manifest)
    SynthCorpus(SynthArgs),
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Evaluate every feature set instead of only `--feature-set`
    #[arg(long)]
    all: bool,
    /// Pick hyperparameters by grid search on the training part
    #[arg(long)]
    grid: bool,
    /// Separate test manifest; without it the corpus is split by speaker
    #[arg(long)]
    test_manifest: Option<PathBuf>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Skip leave-one-speaker-out CV on the training part
    #[arg(long)]
    no_cv: bool,
    /// Also write the segment-level ROC curve
    #[arg(long)]
    segment_roc: bool,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Classify voice-activity segments of a WAV file instead of a manifest
    #[arg(long, conflicts_with = "manifest")]
    wav: Option<PathBuf>,
    #[arg(long)]
    vad_threshold: Option<f64>,
    #[arg(long)]
    vad_hangover_ms: Option<u64>,
}

#[derive(Debug, Args)]
struct ListenArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Samples are delivered in chunks of this many milliseconds
    #[arg(long, default_value_t = 10)]
    chunk_ms: u64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    speakers: usize,
    #[arg(long, default_value_t = 40)]
    segments_per_speaker: usize,
    #[arg(long, default_value_t = 0.08)]
    confirmation_rate: f64,
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Config => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Numerical => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let c = cli.common;
    let file = match &c.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut flags = Overrides {
        feature_set: c.feature_set,
        stack_depth: c.stack_depth,
        pca_epsilon: c.pca_epsilon,
        majority_threshold: c.majority_threshold,
        seed: c.seed,
        manifest: c.manifest,
        model: c.model,
        out: c.out,
        c: c.c,
        eps: c.eps,
        gamma: c.gamma,
        ..Default::default()
    };
    match &cli.command {
        Command::Evaluate(a) => {
            flags.test_manifest = a.test_manifest.clone();
            flags.train_fraction = a.train_fraction;
        }
        Command::Classify(i) | Command::Listen(ListenArgs { input: i, .. }) => {
            flags.vad_threshold = i.vad_threshold;
            flags.vad_hangover_ms = i.vad_hangover_ms;
        }
        _ => {}
    }
    let cfg = RunConfig::resolve(&file, &flags)?;
    let mut run = commands::Run::start(command_name(&cli.command), cfg)?;
    match cli.command {
        Command::Extract => commands::extract(&mut run)?,
        Command::Train => commands::train(&mut run)?,
        Command::GridSearch => commands::grid_search(&mut run)?,
        Command::Evaluate(a) => commands::evaluate(
            &mut run,
            &commands::EvaluateOptions {
                all: a.all,
                grid: a.grid,
                cross_validate: !a.no_cv,
                segment_roc: a.segment_roc,
            },
        )?,
        Command::Classify(i) => commands::classify(&mut run, i.wav.as_deref())?,
        Command::Listen(a) => commands::listen(&mut run, a.input.wav.as_deref(), a.chunk_ms)?,
        Command::SynthCorpus(a) => commands::synth_corpus(
            &mut run,
            a.speakers,
            a.segments_per_speaker,
            a.confirmation_rate,
        )?,
    }
    run.finish()
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Extract => "extract",
        Command::Train => "train",
        Command::GridSearch => "grid-search",
        Command::Evaluate(_) => "evaluate",
        Command::Classify(_) => "classify",
        Command::Listen(_) => "listen",
        Command::SynthCorpus(_) => "synth-corpus",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use backchannel_core::learn::LearnError;

    #[test]
    fn categories_map_to_exit_codes() {
        let numerical: Error = LearnError::ConvergenceFailure {
            iterations: 1,
            kernel_evaluations: 1,
            gap: 1.0,
        }
        .into();
        assert_eq!(exit_code(numerical.category()), 4);
        assert_eq!(exit_code(Error::Config("x".into()).category()), 2);
        assert_eq!(exit_code(Error::from(LearnError::SingleClass).category()), 3);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
