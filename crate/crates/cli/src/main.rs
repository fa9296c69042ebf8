mod error;
mod eval;
mod manifest;
mod rewrite;
mod train;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "cfrewrite",
    version,
    about = "Rewrite story endings for a counterfactual context"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a Kneser-Ney n-gram model and write it as an ARPA-style file.
    TrainNgram(TrainArgs),
    /// Rewrite the ending of every story in a dataset.
    Rewrite(RewriteArgs),
    /// Score rewritten endings against the dataset references.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CorpusFormat {
    /// One text per line.
    Text,
    /// Story dataset lines; trains on both versions of every story.
    Stories,
}

#[derive(clap::Args)]
pub struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: CorpusFormat,
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = cfrewrite::ngram::DEFAULT_DISCOUNT)]
    discount: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum Backend {
    Ngram,
    Remote,
}

#[derive(clap::Args)]
pub struct RewriteArgs {
    #[arg(long, required_unless_present = "from_manifest")]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "from_manifest")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ngram")]
    backend: Backend,
    #[arg(long)]
    ngram_model: Option<PathBuf>,
    #[arg(long, env = "REWRITER_SERVER_URL")]
    server_url: Option<String>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    top_k: usize,
    #[arg(long, default_value_t = 0.95)]
    temp_base: f64,
    #[arg(long, default_value_t = 5)]
    temp_interval: usize,
    #[arg(long, default_value_t = 3)]
    min_ending_len: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write every accepted step as a JSON line.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Request timeout for the remote backend, in seconds.
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    /// Replay the run described by a manifest. `--output` redirects the replayed output.
    #[arg(long, conflicts_with = "input")]
    from_manifest: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct EvalArgs {
    /// Output of `rewrite`.
    #[arg(long)]
    hypotheses: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Lines of {"story_id", "coherence_score"} with scores in [0, 100].
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::TrainNgram(args) => train::run(&args),
        Command::Rewrite(args) => rewrite::run(&args),
        Command::Eval(args) => eval::run(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
