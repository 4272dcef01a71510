use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scriptsim::pipeline::{Pipeline, Stage};

#[derive(Parser)]
#[command(
    name = "scriptsim",
    version,
    about = "Chapter similarity, clustering and classification for sacred texts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "SCRIPTSIM_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage in order, or just one with --stage.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        stage: Option<Stage>,
    },
    /// Load and segment the books.
    Ingest(Common),
    /// Tokenize and build the document-term matrix.
    Dtm(Common),
    /// Within-book and between-book distance matrices.
    Dist(Common),
    /// k-means sweep, book graphs and dendrograms.
    Cluster(Common),
    /// Classifier benchmark.
    Classify(Common),
    /// Collate existing artifacts into summary.json.
    Report(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (common, stage) = match cli.command {
        Command::Run { common, stage } => (common, stage),
        Command::Ingest(c) => (c, Some(Stage::Ingest)),
        Command::Dtm(c) => (c, Some(Stage::Dtm)),
        Command::Dist(c) => (c, Some(Stage::Dist)),
        Command::Cluster(c) => (c, Some(Stage::Cluster)),
        Command::Classify(c) => (c, Some(Stage::Classify)),
        Command::Report(c) => (c, Some(Stage::Report)),
    };
    match run(common, stage) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(common: Common, stage: Option<Stage>) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build_global()?;
    let pipeline = Pipeline::load(&common.config, common.out.as_deref(), common.seed)?;
    match stage {
        Some(s) => pipeline.run_stage(s)?,
        None => pipeline.run()?,
    }
    log::info!("artifacts in {}", pipeline.out_dir.display());
    Ok(())
}
