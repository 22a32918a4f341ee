use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "rarevoice", version, about = "Rare-class active learning over comment corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate raw JSON-lines records into a corpus file.
    Ingest(IngestArgs),
    /// Train subword-aware word embeddings on the corpus.
    EmbedTrain(EmbedTrainArgs),
    /// Compose comment and user vectors from an embedding table.
    EmbedCompose(EmbedComposeArgs),
    /// Build a normalized nearest-neighbor store from a vector store.
    IndexBuild(IndexBuildArgs),
    /// Induce a polarity lexicon by propagation over the word graph.
    LexiconInduce(LexiconInduceArgs),
    /// Descriptive corpus reports.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Propose a batch of comments to label.
    #[command(subcommand)]
    Sample(SampleCommand),
    /// Resolve a labeled round and add it to the pool.
    Resolve(ResolveArgs),
    /// Train a classifier on the labeled pool.
    Train(TrainArgs),
    /// Repeated random-split evaluation on the labeled pool.
    Eval(EvalArgs),
    /// Rank unlabeled comments by predicted probability.
    Rank(RankArgs),
    /// Serve the annotation API for one batch.
    Serve(ServeArgs),
    /// Export the labeled pool as CSV.
    Export(ExportArgs),
    /// Generate a synthetic corpus with planted labels.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Write the ingest manifest here (stdout otherwise).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Mark comments as English when their function-word ratio reaches this.
    #[arg(long)]
    pub language_threshold: Option<f64>,
    /// Fail on malformed lines instead of reporting them.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct EmbedTrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output table; a `.txt` or `.vec` extension selects the text format.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 2)]
    pub min_count: u64,
    #[arg(long, default_value_t = 200_000)]
    pub buckets: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EmbedComposeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub table: PathBuf,
    /// Comment vector store to write.
    #[arg(long)]
    pub comments: PathBuf,
    /// User vector store to write.
    #[arg(long)]
    pub users: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IndexBuildArgs {
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct LexiconInduceArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Comma-separated positive seed words (built-in list otherwise).
    #[arg(long, value_delimiter = ',')]
    pub positive: Vec<String>,
    /// Comma-separated negative seed words (built-in list otherwise).
    #[arg(long, value_delimiter = ',')]
    pub negative: Vec<String>,
    #[arg(long, default_value_t = rarevoice::lexicon::DEFAULT_GRAPH_K)]
    pub k: usize,
    #[arg(long, default_value_t = rarevoice::lexicon::DEFAULT_RESTART_BETA)]
    pub beta: f64,
    #[arg(long)]
    pub max_vocab: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CorpusOut {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Report file (stdout otherwise).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub io: CorpusOut,
    /// File with one focus channel id per line.
    #[arg(long)]
    pub channels: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Counts of tokens following a template phrase.
    Template {
        #[command(flatten)]
        io: CorpusOut,
        #[arg(long)]
        template: String,
        /// Only the most frequent continuations.
        #[arg(long)]
        top: Option<usize>,
    },
    /// Rank and percentile of a phrase among n-grams of its order.
    NgramRank {
        #[command(flatten)]
        io: CorpusOut,
        #[arg(long)]
        phrase: String,
    },
    /// Split videos by channel list.
    Partition(PartitionArgs),
    /// Commenter overlap of the two video sides.
    Overlap(PartitionArgs),
    /// Users who comment mostly on one side.
    Dominant {
        #[command(flatten)]
        part: PartitionArgs,
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
    },
    /// Lexicon sentiment shares of the English comments.
    Sentiment {
        #[command(flatten)]
        io: CorpusOut,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = rarevoice::lexicon::DEFAULT_CUTOFF)]
        cutoff: f64,
    },
    /// Mean and standard deviation of video engagement.
    VideoStats {
        #[command(flatten)]
        io: CorpusOut,
        /// Also report per side of this channel partition.
        #[arg(long)]
        channels: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Labeled pool (absent means empty).
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Batch file to write.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comment vector store, required by models with embedding features.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SampleCommand {
    Random {
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    NnComment {
        #[command(flatten)]
        pool: PoolArgs,
        /// JSON array of seed comment ids.
        #[arg(long)]
        seeds: PathBuf,
        /// Comment vector store.
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 50)]
        k_per_seed: usize,
        /// Merge all neighbor lists and keep the closest.
        #[arg(long)]
        pooled: bool,
    },
    Certainty {
        #[command(flatten)]
        pool: PoolArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        k: usize,
    },
    Uncertainty {
        #[command(flatten)]
        pool: PoolArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        k: usize,
    },
    NnUser {
        #[command(flatten)]
        pool: PoolArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// User vector store.
        #[arg(long)]
        users: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct ResolveArgs {
    #[arg(long, requires = "labels", required_unless_present = "seeds")]
    pub batch: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub adjudications: Option<PathBuf>,
    /// Add a curated seed round instead: JSON `{"positive": [...], "negative": [...]}`.
    #[arg(long, conflicts_with = "batch")]
    pub seeds: Option<PathBuf>,
    /// Pool to extend in place (created when absent).
    #[arg(long)]
    pub pool: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    #[arg(long, default_value_t = 2)]
    pub min_df: usize,
    #[arg(long)]
    pub tfidf: bool,
    /// Append comment embeddings to the n-gram features.
    #[arg(long, requires = "vectors")]
    pub with_embeddings: bool,
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub splits: usize,
    #[arg(long, default_value_t = 0.9)]
    pub train_frac: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    pub top: usize,
    /// CSV file (stdout otherwise).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub batch: PathBuf,
    /// Label log, created when absent.
    #[arg(long)]
    pub labels: PathBuf,
    /// Adjudication log, created when absent.
    #[arg(long)]
    pub adjudications: PathBuf,
    /// Enables the rank endpoint.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub pool: PathBuf,
    /// CSV file (stdout otherwise).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub output: PathBuf,
    /// Planted labels and seeds as JSON.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Focus channel list, one id per line.
    #[arg(long)]
    pub channels: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub comments: usize,
    #[arg(long, default_value_t = 2_000)]
    pub users: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
