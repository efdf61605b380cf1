//! The `lectalign` command-line pipeline: cleaning, translation, sentence
//! alignment, evaluation, review and split construction, plus language
//! model profiling.
//!
//! Exit codes: 0 success, 2 usage error, 3 configuration error, 4 data
//! error. Errors are printed to stderr as `{"error": {code, kind, message}}`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod server;

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "lectalign", version, about = "Sentence alignment pipeline for lecture transcripts")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for per-document work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize, split and filter raw transcript pairs.
    Clean(CleanArgs),
    /// Attach machine translations to every pair.
    Translate(TranslateArgs),
    /// Align sentences of every pair.
    Align(AlignArgs),
    /// Score predicted alignments against gold.
    EvalAlign(EvalArgs),
    /// Rank pairs by mean alignment score.
    Rank(RankArgs),
    /// Human review of ranked alignments.
    #[command(subcommand)]
    Review(ReviewCommand),
    /// Write test/dev/train files from a judgment log.
    Split(SplitArgs),
    /// Sentence length statistics per language.
    Stats(StatsArgs),
    /// 4-gram language models.
    #[command(subcommand)]
    Lm(LmCommand),
    /// Multistage fine-tuning schedule.
    Plan(PlanArgs),
    /// Generate a synthetic aligned corpus with gold alignments.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    /// Manifest of raw transcript pairs.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory for cleaned documents and manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub imbalance_factor: Option<f64>,
    /// Meta-text pattern; `re:` prefix for a regex. Replaces the defaults.
    #[arg(long = "meta-pattern")]
    pub meta_patterns: Vec<String>,
    /// External language identifier (document on stdin, tag on stdout).
    #[arg(long)]
    pub detector_command: Option<String>,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Command translating source sentences, one per line.
    #[arg(long)]
    pub src_command: Option<String>,
    /// Precomputed source translation file template.
    #[arg(long)]
    pub src_template: Option<String>,
    /// Command translating target sentences back (symmetric scoring).
    #[arg(long)]
    pub tgt_command: Option<String>,
    #[arg(long)]
    pub tgt_template: Option<String>,
    /// Translation cache directory.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScorerArgs {
    /// cosine, l2 or bleu.
    #[arg(long)]
    pub scorer: Option<String>,
    /// Word embeddings in `V D` text format.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Lowercase tokens before embedding lookup.
    #[arg(long)]
    pub lowercase: bool,
    /// Average both translation directions.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long)]
    pub bleu_epsilon: Option<f64>,
    /// LANG=whitespace|chars|cmd:COMMAND
    #[arg(long = "tokenizer")]
    pub tokenizers: Vec<String>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// dp, flow or greedy.
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[arg(long)]
    pub max_chunk: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub skip_penalty: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub min_pair_score: Option<f64>,
    #[arg(long)]
    pub flow_cost_scale: Option<i64>,
    /// Output JSONL file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SessionArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub alignments: Option<PathBuf>,
    /// Judgment log (JSONL), appended to and replayed on start.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub test_volume: Option<usize>,
    #[arg(long)]
    pub dev_volume: Option<usize>,
    #[arg(long)]
    pub ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub alignments: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ReviewCommand {
    /// Serve the review API (and UI assets) on localhost.
    Serve(ServeArgs),
    /// Judge every candidate with a scripted judge.
    Auto(AutoArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long)]
    pub port: Option<u16>,
    /// Built UI assets served at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    /// Judge name recorded when a request names none.
    #[arg(long, default_value = "annotator")]
    pub judge_name: String,
}

#[derive(Debug, Args)]
pub struct AutoArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// gold:FILE (good iff the alignment is in gold), threshold:X (good iff
    /// score >= X), good or bad.
    #[arg(long)]
    pub judge: String,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave rejected documents out of train.
    #[arg(long)]
    pub discard_rejected: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long = "tokenizer")]
    pub tokenizers: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum LmCommand {
    /// Train a model on a whitespace-tokenized corpus.
    Train(LmTrainArgs),
    /// Per-token log-likelihood matrix over named corpora.
    Sim(LmSimArgs),
}

#[derive(Debug, Args)]
pub struct LmTrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LmSimArgs {
    /// name=path,name=path,...
    #[arg(long)]
    pub corpora: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Also write the matrix JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub in_domain: String,
    /// name=path,...: sizes are sentence counts; the matrix is computed.
    #[arg(long, conflicts_with = "matrix")]
    pub corpora: Option<String>,
    /// Matrix JSON from `lm sim`.
    #[arg(long, requires = "sizes")]
    pub matrix: Option<PathBuf>,
    /// name=size,...
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub documents: usize,
    #[arg(long, default_value_t = 10)]
    pub units_per_document: usize,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    match commands::dispatch(cli) {
        Ok(output) => {
            if let Some(v) = output {
                let text = serde_json::to_string_pretty(&v).expect("serializable output");
                let _ = writeln!(std::io::stdout(), "{text}");
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
