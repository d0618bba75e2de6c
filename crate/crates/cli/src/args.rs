use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evarena::agents::Objective;
use evarena::arena::Protocol;
use evarena::eval::EvidenceMode;
use evarena::judges::JudgeKind;

#[derive(Debug, Parser)]
#[command(name = "evarena", version, about = "Evidence agents for multiple-choice reading comprehension")]
pub struct Cli {
    /// Global seed; every stochastic step derives a labeled sub-seed from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for per-example parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Log more to stderr (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Import a RACE directory or DREAM JSON file into a normalized corpus file.
    Ingest(IngestArgs),
    /// Build an IDF table from a corpus.
    BuildIdf(BuildIdfArgs),
    /// Record judge reactions to every single sentence.
    PrecomputeTargets(TargetsArgs),
    /// Train a linear sentence scorer on precomputed targets.
    TrainScorer(TrainArgs),
    /// Individual evidence selection for one agent and judge.
    Select(SelectArgs),
    /// Free-for-all or round-robin competitions.
    Compete(CompeteArgs),
    /// Convincingness matrix of agents against judges.
    Matrix(MatrixArgs),
    /// Judge QA accuracy under an evidence condition.
    Accuracy(AccuracyArgs),
    /// Train/eval split sweep over turn budgets.
    Generalize(GeneralizeArgs),
    /// Confidence buckets or human agreement tables.
    Report(ReportArgs),
    /// Run the human-evaluation session server.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dataset {
    Race,
    Dream,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(value_enum)]
    pub dataset: Dataset,
    /// RACE root directory or DREAM JSON file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildIdfArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Resources shared by every command that scores evidence.
#[derive(Debug, Args, Clone)]
pub struct JudgeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Precomputed IDF table; built from the corpus when absent.
    #[arg(long)]
    pub idf: Option<PathBuf>,
    /// Subword vocabulary for TF-IDF tokenization.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Word vectors in text format.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Remote judge base address.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Remote judge timeout in milliseconds.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TargetsArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    #[arg(long, default_value = "tfidf-sa")]
    pub judge: JudgeKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long, default_value = "p-mse")]
    pub objective: Objective,
    #[arg(long, default_value_t = 0.02)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.2)]
    pub decay: f64,
    #[arg(long, default_value_t = 60)]
    pub epochs: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Training report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Which agent to run.
#[derive(Debug, Args, Clone)]
pub struct AgentArgs {
    /// `search`, `search:<judge>`, `learned`, `answer-free:<method>` or `human`.
    #[arg(long, default_value = "search")]
    pub agent: String,
    /// Scorer file for learned agents.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Recorded selections for the `human` agent.
    #[arg(long)]
    pub human_selections: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long, default_value = "tfidf-sa")]
    pub judge: JudgeKind,
    #[arg(long, default_value = "1")]
    pub turns: usize,
    /// Restrict to one example id.
    #[arg(long)]
    pub example: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompeteArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long, default_value = "tfidf-sa")]
    pub judge: JudgeKind,
    #[arg(long, default_value = "round-robin")]
    pub protocol: Protocol,
    #[arg(long, default_value = "1")]
    pub turns: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    /// Judges (repeat or comma-separate).
    #[arg(long, value_delimiter = ',', default_value = "tfidf-sa")]
    pub judge: Vec<JudgeKind>,
    /// Agents (repeat or comma-separate); `search` expands to one search
    /// agent per listed judge.
    #[arg(long, value_delimiter = ',', default_value = "search")]
    pub agent: Vec<String>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub human_selections: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long, default_value = "tfidf-sa")]
    pub judge: JudgeKind,
    #[arg(long, default_value = "full-passage")]
    pub mode: EvidenceMode,
    /// Sentences drawn by random-k / answer-free selectors.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Answer-free method for `--mode answer-free`.
    #[arg(long, default_value = "tfidf-question")]
    pub method: evarena::arena::AnswerFreeMethod,
    #[arg(long, default_value = "1")]
    pub turns: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeneralizeArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    #[arg(long, default_value = "tfidf-sa")]
    pub judge: JudgeKind,
    #[arg(long, default_value = "generalize")]
    pub experiment: String,
    #[arg(long)]
    pub train_min_sentences: Option<usize>,
    #[arg(long)]
    pub train_max_sentences: Option<usize>,
    #[arg(long)]
    pub eval_min_sentences: Option<usize>,
    #[arg(long)]
    pub eval_max_sentences: Option<usize>,
    /// Turn budgets: `3..6`, `3..=6`, `4` or `3,5`.
    #[arg(long, default_value = "3..6", value_parser = parse_turns)]
    pub turns: TurnSweep,
    /// `search`, `learned:<objective>`, `answer-free:<method>`.
    #[arg(long, value_delimiter = ',', default_value = "search")]
    pub agents: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub random_factor: usize,
    /// Permit passages in both splits.
    #[arg(long)]
    pub allow_overlap: bool,
    /// JSON report path; CSV rows go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnSweep(pub Vec<usize>);

/// `a..b` and `a..=b` are both inclusive, matching how budgets are quoted.
pub fn parse_turns(s: &str) -> Result<TurnSweep, String> {
    let bad = || format!("invalid turn list `{s}` (expected e.g. 3..6, 4 or 3,5)");
    let range = s.split_once("..=").or_else(|| s.split_once(".."));
    let turns: Vec<usize> = match range {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            (a..=b).collect()
        }
        None => s
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?,
    };
    if turns.is_empty() || turns.contains(&0) {
        return Err(bad());
    }
    Ok(TurnSweep(turns))
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(subcommand)]
    pub kind: ReportKind,
}

#[derive(Debug, Subcommand)]
pub enum ReportKind {
    /// Scorer accuracy bucketed by |delta| at the judge's preferred sentence.
    Buckets(BucketArgs),
    /// Judge probability next to human pick rate per (question, answer).
    Human(HumanArgs),
}

#[derive(Debug, Args)]
pub struct BucketArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    /// Number of equal-count buckets.
    #[arg(long, default_value_t = 4)]
    pub buckets: usize,
    /// Explicit ascending edges; overrides `--buckets`.
    #[arg(long, value_delimiter = ',')]
    pub edges: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HumanArgs {
    #[command(flatten)]
    pub res: JudgeArgs,
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long, default_value = "tfidf-sa")]
    pub judge: JudgeKind,
    /// JSONL of `{example_id, answer_index, choice}`.
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Overrides EVARENA_PORT.
    #[arg(long)]
    pub port: Option<u16>,
    /// Overrides EVARENA_DATA_DIR.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Built UI bundle served for unmatched paths.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}
