//! Subcommand parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::Config;
use crate::workflows::{self, Context};
use crate::Result;

#[derive(Debug, Parser)]
#[command(name = "docforge", version, about = "Synthesize tampered document images with exact masks")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML config; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed (default: the config's, else 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Treat skipped documents and short tuples as errors.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score, filter and embed crops into a crop database.
    BuildDb {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// GSCR score store to use instead of the algorithmic scorer.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// FEMB embedding store to use instead of classical features.
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Tamper every document of a corpus.
    Generate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Directory written by `build-db`; built in memory when absent.
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Export contrastive tuples for the similarity model.
    MinePairs {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export labelled boxes for the quality model.
    PrepareQualityData {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop training images that share a patch with any evaluation image.
    FilterLeakage {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        eval: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Patch stride, 1..=64.
        #[arg(long)]
        stride: Option<u32>,
    },
    /// Write algorithmic quality scores as a GSCR store.
    Score {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a synthetic corpus with exact character boxes.
    SynthCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        pages: usize,
    },
}

fn context(common: &Common, stride: Option<u32>) -> Result<Context> {
    let mut config = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = stride {
        config.dedup.stride = s;
        config.validate()?;
    }
    let seed = common.seed.unwrap_or(config.seed);
    let workers = common.workers.unwrap_or(config.workers);
    Context::new(config, seed, workers, common.strict)
}

fn v<T: Serialize>(summary: &T) -> serde_json::Value {
    serde_json::to_value(summary).expect("summary serializes")
}

fn print<T: Serialize>(command: &str, summary: &T) {
    let v = serde_json::json!({ "command": command, "summary": summary });
    println!("{v}");
}

/// Run a parsed command line and return its summary as JSON.
pub fn execute(cli: &Cli) -> Result<serde_json::Value> {
    let stride = match &cli.command {
        Command::FilterLeakage { stride, .. } => *stride,
        _ => None,
    };
    let ctx = context(&cli.common, stride)?;
    Ok(match &cli.command {
        Command::BuildDb {
            corpus,
            out,
            scores,
            embeddings,
        } => {
            let p = workflows::prepare(&ctx, corpus, false)?;
            v(&workflows::build_db(&ctx, &p, scores.as_deref(), embeddings.as_deref(), out)?)
        }
        Command::Generate {
            corpus,
            out,
            db,
            embeddings,
        } => {
            let p = workflows::prepare(&ctx, corpus, false)?;
            v(&workflows::generate(&ctx, &p, db.as_deref(), embeddings.as_deref(), out)?)
        }
        Command::MinePairs { corpus, out } => {
            let p = workflows::prepare(&ctx, corpus, true)?;
            v(&workflows::mine_pairs(&ctx, &p, out)?)
        }
        Command::PrepareQualityData { corpus, out } => {
            let p = workflows::prepare(&ctx, corpus, false)?;
            v(&workflows::prepare_quality_data(&ctx, &p, out)?)
        }
        Command::FilterLeakage { train, eval, out, .. } => v(&workflows::filter_leakage(&ctx, train, eval, out)?),
        Command::Score { corpus, out } => {
            let p = workflows::prepare(&ctx, corpus, false)?;
            v(&workflows::score(&ctx, &p, out)?)
        }
        Command::SynthCorpus { out, pages } => v(&workflows::synth_corpus(&ctx, *pages, out)?),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::BuildDb { .. } => "build-db",
        Command::Generate { .. } => "generate",
        Command::MinePairs { .. } => "mine-pairs",
        Command::PrepareQualityData { .. } => "prepare-quality-data",
        Command::FilterLeakage { .. } => "filter-leakage",
        Command::Score { .. } => "score",
        Command::SynthCorpus { .. } => "synth-corpus",
    }
}

/// Parse `argv`, run, print a one-line JSON summary. Returns the exit code:
/// 0 success, 1 usage or config error, 2 corpus or IO error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print(command_name(&cli.command), &summary);
            0
        }
        Err(e) => {
            eprintln!("docforge: {e}");
            e.exit_code()
        }
    }
}
