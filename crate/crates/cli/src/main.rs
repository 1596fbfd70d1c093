//! Command-line pipeline over knowledge-graph edit histories: ingest dumps,
//! analyze editing dynamics, split chronologically, export RDF, train
//! embedding and supervised typing models, and evaluate them.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "kghist", version, about = "Edit-history toolkit for collaborative knowledge graphs")]
struct Cli {
    /// Optional key=value config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Upper bound on worker threads. The desk-scale pipeline runs
    /// single-threaded, so any bound is honored trivially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Force single-threaded numeric sections. Always on in this build.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IngestFormat {
    Xml,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Transitions,
    ClassOps,
    RemovedProps,
    EditWars,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportKind {
    Static,
    Dynamic,
}

#[derive(Args)]
struct TrainArgs {
    /// Split directory produced by `kghist split`.
    #[arg(long)]
    split_dir: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Embedding model kind: transe, rotate, or mure.
    #[arg(long, default_value = "transe")]
    model: String,
    /// Negative sampler: basic, edits, edits-no-wars, or inverse.
    #[arg(long, default_value = "basic")]
    sampler: String,
    /// Train the supervised walk-embedding + forest typer instead.
    #[arg(long)]
    supervised: bool,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random-search budget; 0 trains the given configuration directly.
    #[arg(long, default_value_t = 0)]
    search_budget: usize,
    /// Walks per entity (supervised mode).
    #[arg(long)]
    walks: Option<usize>,
    /// Maximum walk depth (supervised mode).
    #[arg(long)]
    depth: Option<usize>,
    /// Number of forest trees (supervised mode).
    #[arg(long)]
    trees: Option<usize>,
    /// Deduplicate labeled triples, keeping the chronologically last label.
    #[arg(long)]
    dedup_labels: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a revision dump and build the file store.
    Ingest {
        #[arg(long, value_enum)]
        format: IngestFormat,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Editing-dynamics reports over a built store.
    Analyze {
        #[arg(long)]
        store_dir: PathBuf,
        #[arg(long, value_enum)]
        report: ReportKind,
        #[arg(long, value_enum, default_value = "csv")]
        format: ReportFormat,
        /// Class id for the removed-properties report, e.g. Q100.
        #[arg(long)]
        class: Option<String>,
        /// Transition-pruning fraction.
        #[arg(long)]
        prune: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Class importance scores from instance PageRank.
    Classrank {
        #[arg(long)]
        store_dir: PathBuf,
        /// Precomputed `id,score` CSV; computed from the store when absent.
        #[arg(long)]
        pagerank_file: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        top: usize,
        /// Drop classes whose label contains this term.
        #[arg(long)]
        filter_label: Option<String>,
        #[arg(long)]
        damping: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Aggregate instance scores by mean instead of sum.
        #[arg(long)]
        mean: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chronological per-entity split of the operation stream.
    Split {
        #[arg(long)]
        store_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        train: Option<f64>,
        #[arg(long)]
        valid: Option<f64>,
    },
    /// N-Triples export of the final graph or the revision history.
    Export {
        #[arg(long)]
        store_dir: PathBuf,
        /// Export the final triple set.
        #[arg(long, conflicts_with = "dynamic", required_unless_present = "dynamic")]
        r#static: bool,
        /// Export the revision/operation history.
        #[arg(long)]
        dynamic: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an embedding model or the supervised typer.
    Train(TrainArgs),
    /// Rank test-split type additions and report MR/MRR/hits@k.
    Evaluate {
        /// Model stem (embedding) or typer JSON path.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        split_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compare evaluation outputs pairwise with significance tests.
    Compare {
        /// Comma-separated evaluation directories.
        #[arg(long, value_delimiter = ',')]
        models: Vec<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Use the uncorrected statistic instead of the continuity-corrected one.
        #[arg(long)]
        no_continuity_correction: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the deterministic synthetic fixture corpus.
    MakeFixture {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        entities: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_config = match config::FileConfig::load(cli.config.as_deref()) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Ingest { format, input, out_dir } => {
            commands::ingest(format, &input, &out_dir)
        }
        Command::Analyze { store_dir, report, format, class, prune, out } => {
            commands::analyze(&store_dir, report, format, class.as_deref(), prune, &out, &file_config)
        }
        Command::Classrank { store_dir, pagerank_file, top, filter_label, damping, iterations, mean, out } => {
            commands::classrank(
                &store_dir,
                pagerank_file.as_deref(),
                top,
                filter_label.as_deref(),
                damping,
                iterations,
                mean,
                &out,
                &file_config,
            )
        }
        Command::Split { store_dir, out_dir, train, valid } => {
            commands::split(&store_dir, &out_dir, train, valid, &file_config)
        }
        Command::Export { store_dir, r#static: _, dynamic, out } => {
            let kind = if dynamic { ExportKind::Dynamic } else { ExportKind::Static };
            commands::export(&store_dir, kind, &out)
        }
        Command::Train(args) => commands::train(&args, &file_config),
        Command::Evaluate { model, split_dir, out_dir } => {
            commands::evaluate(&model, &split_dir, &out_dir)
        }
        Command::Compare { models, alpha, no_continuity_correction, out } => {
            commands::compare(&models, alpha, !no_continuity_correction, &out, &file_config)
        }
        Command::MakeFixture { out_dir, seed, entities } => {
            commands::make_fixture(&out_dir, seed, entities, &file_config)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
