use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Bag-of-words document classification: features, models, tuning and
/// repeated-split evaluation.
#[derive(Debug, Parser)]
#[command(name = "textbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tokenize a JSONL corpus and print one JSON line of tokens per document
    Preprocess(PreprocessArgs),
    /// Build a document-term matrix in the triplet format
    Dtm(DtmArgs),
    /// Fit one model on a document-term matrix
    Train(TrainArgs),
    /// Score a document-term matrix with a saved model
    Predict(PredictArgs),
    /// Tune every configured model on the tuning split
    Tune(ConfigArgs),
    /// Sample a synthetic labelled corpus
    Synth(SynthArgs),
    /// Run the configured models over every split and write the tables
    Experiment(ConfigArgs),
    /// Compare the models of a saved result on one metric
    Compare(CompareArgs),
    /// Re-render the tables and CSV files of a saved result
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    /// JSONL corpus with `id`, `text` and optional `label`
    #[arg(long)]
    corpus: PathBuf,
    /// Stop-word file, one word per line [default: built-in list]
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Output file [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WeightingArg {
    Count,
    Binary,
    Tfidf,
}

#[derive(Debug, Args)]
struct DtmArgs {
    /// JSONL corpus
    #[arg(long)]
    corpus: PathBuf,
    /// Longest n-gram: 1 for unigrams, 2 adds bigrams [default: 2, or the order of --vocab]
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    ngrams: Option<u8>,
    /// Cell values: raw counts, 0/1 presence, or L2-normalized TF-IDF
    #[arg(long, value_enum, default_value = "count")]
    weighting: WeightingArg,
    /// Drop terms found in fewer documents; ignored with --vocab
    #[arg(long, default_value_t = 1)]
    min_df: usize,
    /// Stop-word file, one word per line [default: built-in list]
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Reuse this vocabulary instead of building one from the corpus
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Write the vocabulary used
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Reuse these inverse document frequencies (tfidf only)
    #[arg(long)]
    idf: Option<PathBuf>,
    /// Write the inverse document frequencies used (tfidf only)
    #[arg(long)]
    idf_out: Option<PathBuf>,
    /// Write the corpus labels as `row label` lines
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Output file [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Mnb,
    Svm,
    Nbsvm,
    Rf,
    Lda,
    Lsa,
    NnSum,
    NnAvg,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Model to fit
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Training matrix; count weighting for mnb, svm, lda and lsa, binary
    /// for nbsvm and the networks, tfidf for rf
    #[arg(long)]
    dtm: PathBuf,
    /// Training labels as `row label` lines
    #[arg(long)]
    labels: PathBuf,
    /// Validation matrix for early stopping (networks only)
    #[arg(long)]
    val_dtm: Option<PathBuf>,
    /// Validation labels (networks only)
    #[arg(long, requires = "val_dtm")]
    val_labels: Option<PathBuf>,
    /// Seed for every random choice in fitting
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to save the fitted model (JSON)
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    hyper: Hyper,
}

/// Hyperparameters; each applies to the models named and defaults to the
/// model's built-in value.
#[derive(Debug, Default, Args)]
struct Hyper {
    /// Smoothing (mnb, nbsvm)
    #[arg(long)]
    alpha: Option<f64>,
    /// Weight interpolation, 1 keeps the SVM weights (nbsvm)
    #[arg(long)]
    beta: Option<f64>,
    /// SVM cost (svm, nbsvm, lda, lsa)
    #[arg(long)]
    c: Option<f64>,
    /// Number of topics (lda)
    #[arg(long)]
    topics: Option<usize>,
    /// Gibbs sweeps when fitting (lda)
    #[arg(long)]
    lda_iters: Option<usize>,
    /// Rank of the decomposition (lsa)
    #[arg(long)]
    rank: Option<usize>,
    /// Trees in the forest (rf)
    #[arg(long)]
    n_trees: Option<usize>,
    /// Positive-call cutoff on the vote share (rf)
    #[arg(long)]
    threshold: Option<f64>,
    /// Top-ranked features kept, 0 for all (rf)
    #[arg(long)]
    n_top: Option<usize>,
    /// Dropout rate on the pooled embedding (networks)
    #[arg(long)]
    dropout: Option<f64>,
    /// Epochs without validation improvement before stopping (networks)
    #[arg(long)]
    patience: Option<usize>,
    /// Embedding dimension (networks)
    #[arg(long)]
    dim: Option<usize>,
    /// Minibatch size (networks)
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam step size (networks)
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Epoch limit (networks)
    #[arg(long)]
    max_epochs: Option<usize>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model saved by `train`
    #[arg(long)]
    model: PathBuf,
    /// Matrix with the model's training vocabulary and weighting
    #[arg(long)]
    dtm: PathBuf,
    /// Positive when score >= threshold [default: the model's own, 0.47 for rf]
    #[arg(long)]
    threshold: Option<f64>,
    /// Output CSV `row,label,score` [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Experiment config (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: config `output_dir`, then $TEXTBENCH_OUT, then ./results]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// TOML table of generator settings; flags override it
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of documents
    #[arg(long)]
    n_docs: Option<usize>,
    /// Share of positive documents
    #[arg(long)]
    prevalence: Option<f64>,
    /// Distance between the class word distributions; 0 makes them equal
    #[arg(long)]
    separation: Option<f64>,
    /// Pick the separation whose naive-Bayes-optimal accuracy reaches this
    #[arg(long, conflicts_with = "separation")]
    target_accuracy: Option<f64>,
    /// Generator seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSONL [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    Accuracy,
    DiffPos,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// `result.json` from an experiment
    #[arg(long)]
    results: PathBuf,
    /// Metric whose best mean picks the referent
    #[arg(long, value_enum, default_value = "accuracy")]
    metric: MetricArg,
    /// Output CSV [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// `result.json` from an experiment
    #[arg(long)]
    results: PathBuf,
    /// Output directory [default: print the tables]
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.code())
        }
    }
}
