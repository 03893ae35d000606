use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Emote-aware sentiment analysis for Twitch chat.
///
/// Settings come from built-in defaults, then the `--config` TOML file, then
/// command-line flags (highest precedence).
#[derive(Debug, Parser)]
#[command(name = "loove", version)]
pub struct Cli {
    /// Global random seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Caps the number of worker threads
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect and split datasets
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Tokenize messages and print tagged tokens as JSON lines
    Tokenize(TokenizeArgs),
    /// Build an n-gram vocabulary from a labeled dataset
    Features(FeaturesArgs),
    /// Train a bag-of-ngram classifier
    Train(TrainArgs),
    /// Evaluate a trained classifier on a labeled dataset
    Eval(EvalArgs),
    /// Train and query skip-gram embeddings
    #[command(subcommand)]
    Embed(EmbedCmd),
    /// Build, score and query the emote pseudo-dictionary
    #[command(subcommand)]
    Pseudodict(PseudodictCmd),
    /// Train and use the two-stage fusion classifier
    #[command(subcommand)]
    Loove(LooveCmd),
    /// Corpus and model analyses as CSV tables
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Run the experiment tables
    #[command(subcommand)]
    Grid(GridCmd),
    /// Re-hash the files recorded in an output directory's manifest
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutArg {
    /// Output directory (created if missing)
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmoteArgs {
    /// Emote code lists, one code per line (repeatable)
    #[arg(long = "emotes")]
    pub emotes: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TextArgs {
    /// Processing level: P1, P2 or P3
    #[arg(long)]
    pub level: Option<String>,
    /// N-gram order: 1 (unigrams) or 2 (unigrams and bigrams)
    #[arg(long)]
    pub order: Option<u8>,
    /// NB, ME, SVM or RF
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Drop n-grams seen fewer times than this
    #[arg(long)]
    pub min_count: Option<usize>,
    /// Binary presence features instead of counts
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VectorArgs {
    /// Vector file in word2vec text format
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// JSON sidecar with kinds and frequencies (defaults to <vectors>.json)
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    /// Message counts of a chat log or labeled dataset
    Stats(CorpusStatsArgs),
    /// Stratified train/test split of a labeled dataset
    Split(CorpusSplitArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorpusStatsArgs {
    /// Chat log, one JSON object per line
    #[arg(long)]
    pub chat: Option<PathBuf>,
    /// Labeled dataset, `text<TAB>label` per line
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorpusSplitArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TokenizeArgs {
    /// Messages to tokenize; reads lines from --input or stdin when empty
    pub text: Vec<String>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also apply a processing level
    #[arg(long)]
    pub level: Option<String>,
    #[command(flatten)]
    pub emotes: EmoteArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Model written by `train`
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Also write Gini importances (random forests only)
    #[arg(long)]
    pub importance: bool,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum EmbedCmd {
    /// Train embeddings on a chat log
    Train(EmbedTrainArgs),
    /// Nearest neighbors of a token
    Nn(EmbedNnArgs),
    /// Neighbors of sum(positive) - sum(negative)
    Analogy(EmbedAnalogyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedTrainArgs {
    #[arg(long)]
    pub chat: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedNnArgs {
    pub token: String,
    #[arg(short, default_value_t = 10)]
    pub k: usize,
    /// Only return these kinds (comma separated: word,emote,emoji,emoticon)
    #[arg(long, value_delimiter = ',')]
    pub kind: Vec<String>,
    #[command(flatten)]
    pub vectors: VectorArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedAnalogyArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub positive: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub negative: Vec<String>,
    #[arg(short, default_value_t = 3)]
    pub k: usize,
    #[command(flatten)]
    pub vectors: VectorArgs,
}

#[derive(Debug, Subcommand)]
pub enum PseudodictCmd {
    /// Infer emote valences from embedding neighbors
    Build(PdBuildArgs),
    /// RMSE against a reference, or a leave-one-out self-test on the lexicon
    Eval(PdEvalArgs),
    /// Print one entry
    Lookup(PdLookupArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LexiconArgs {
    /// Sentiment lexicons (repeatable; later files override earlier ones)
    #[arg(long = "lexicon")]
    pub lexicons: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PdBuildArgs {
    #[command(flatten)]
    pub vectors: VectorArgs,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    #[arg(short)]
    pub k: Option<usize>,
    #[arg(long)]
    pub search_cap: Option<usize>,
    /// Weight neighbors by cosine similarity
    #[arg(long)]
    pub weighted: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PdEvalArgs {
    /// Pseudo-dictionary TSV or JSON
    #[arg(long)]
    pub dict: Option<PathBuf>,
    /// Reference valences (`token<TAB>valence`, already in [-1, 1])
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Score word valences inferred from the store against the lexicon
    #[arg(long)]
    pub self_test: bool,
    #[command(flatten)]
    pub vectors: VectorArgs,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    #[arg(short)]
    pub k: Option<usize>,
    #[arg(long)]
    pub search_cap: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PdLookupArgs {
    pub emote: String,
    #[arg(long)]
    pub dict: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LooveCmd {
    /// Train the fusion classifier and write a model bundle
    Train(LooveTrainArgs),
    /// Predict messages with a bundle
    Predict(LoovePredictArgs),
    /// Evaluate a bundle on a labeled dataset
    Eval(LooveEvalArgs),
    /// Gini importances of the fusion features
    Importance(LooveImportanceArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LooveTrainArgs {
    /// Labeled Twitch training data
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// First-stage model written by `train`; omit for the stats-only model
    #[arg(long)]
    pub clf1: Option<PathBuf>,
    /// Name of the dataset CLF1 was trained on
    #[arg(long, default_value = "custom")]
    pub clf1_tag: String,
    #[arg(long)]
    pub pseudodict: Option<PathBuf>,
    /// Fusion classifier algorithm
    #[arg(long)]
    pub clf2: Option<String>,
    /// Use CLF1's label only (no emote statistics)
    #[arg(long)]
    pub no_stats: bool,
    /// Encode CLF1 as class probabilities instead of a one-hot label
    #[arg(long)]
    pub probabilities: bool,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LoovePredictArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    pub text: Vec<String>,
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LooveEvalArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LooveImportanceArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCmd {
    /// Unique tokens per kind
    Tokens(AnalyzeCorpusArgs),
    /// Power-law fit of rank-frequency per kind
    Zipf(AnalyzeZipfArgs),
    /// Kind mix of nearest neighbors per kind
    Neighbors(AnalyzeNeighborsArgs),
    /// Valence histograms of sentiment-tagged neighbors
    Senthist(AnalyzeSenthistArgs),
    /// Rank histogram of emote features among top importances
    Features(AnalyzeFeaturesArgs),
    /// Top tokens per kind with vectors, for projection tools
    ExportVectors(AnalyzeExportArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeCorpusArgs {
    #[arg(long)]
    pub chat: Option<PathBuf>,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeZipfArgs {
    #[arg(long)]
    pub chat: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub rank_start: usize,
    #[arg(long, default_value_t = 100_000)]
    pub rank_end: usize,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeNeighborsArgs {
    #[command(flatten)]
    pub vectors: VectorArgs,
    #[arg(long, default_value_t = 1000)]
    pub per_kind: usize,
    #[arg(short, default_value_t = 100)]
    pub k: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeSenthistArgs {
    #[command(flatten)]
    pub vectors: VectorArgs,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// Also tag emotes with pseudo-dictionary valences
    #[arg(long)]
    pub pseudodict: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value_t = 1000)]
    pub neighbors: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeFeaturesArgs {
    /// Random-forest model written by `train`
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub top_n: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeExportArgs {
    #[command(flatten)]
    pub vectors: VectorArgs,
    #[arg(long, default_value_t = 1000)]
    pub per_kind: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum GridCmd {
    /// Level x algorithm x n-gram order accuracy table
    Baseline(GridBaselineArgs),
    /// First-stage dataset x fusion algorithm accuracy table
    Loove(GridLooveArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridBaselineArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridLooveArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// First-stage datasets as TAG=PATH (repeatable, in row order)
    #[arg(long = "external")]
    pub external: Vec<String>,
    #[arg(long)]
    pub pseudodict: Option<PathBuf>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[command(flatten)]
    pub emotes: EmoteArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Output directory or manifest file
    pub path: PathBuf,
}
