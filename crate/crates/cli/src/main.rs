//! `oodlab`: batch front end for the oodlab toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;
mod output;
mod pool;

use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "oodlab",
    version,
    about = "Out-of-distribution analysis for text-line recognition"
)]
struct Cli {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (default 42; OODLAB_SEED wins over this flag).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-domain work; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check manifests and images; print per-domain split sizes.
    #[command(after_help = "Output CSV columns: name,language,train,val,test,images,distinct_chars")]
    Ingest(IngestArgs),
    /// Render a synthetic domain (images, manifest.jsonl, style.json).
    Synth(SynthArgs),
    /// Character n-gram divergence between every pair of domains.
    #[command(
        after_help = "Output CSV: header `source,<domain>...`, one row per source domain; cell (i, j) is the divergence of domain j from domain i."
    )]
    Textdiv(TextdivArgs),
    /// Autoencoder reconstruction divergence.
    #[command(subcommand)]
    Visdiv(VisdivCommand),
    /// CER, WER and optionally ECE of a prediction log.
    #[command(
        after_help = "Output CSV columns: metric,value (rows cer, wer, then ece with --ece). Rates are percentages."
    )]
    Eval(EvalArgs),
    /// Factor analysis and OOD-error regression over a metrics table.
    #[command(
        after_help = "Files written to --out-dir:\n  eigenvalues.csv  index,eigenvalue,retained\n  loadings.csv     metric,F1..Fk (rotated)\n  factor.json      full factor model\n  regression.json  model and evaluation\n  predictions.csv  model,source,target,actual,predicted,residual\n  residuals.csv    lower,upper,count,cumulative_pct"
    )]
    Analyze(AnalyzeArgs),
    /// Pick a checkpoint from validation results.
    #[command(
        after_help = "Input CSV columns: checkpoint,domain,val_cer\nOutput CSV columns: strategy,domain,checkpoint,score"
    )]
    Select(SelectArgs),
    /// In-distribution / best-source OOD summary of a cross-domain CER table.
    #[command(
        after_help = "Input CSV columns: model,source,target,cer\nOutputs (files in --out-dir, or stdout sections in this order):\n  summary.csv      model,target,id_cer,ood_cer,gap,best_source,outlier\n  averages.csv     model,mean_id,mean_ood,mean_gap\n  best_source.csv  model,<target>... (name of the best source)"
    )]
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    manifests: Vec<PathBuf>,
    /// Skip decoding every image.
    #[arg(long)]
    no_images: bool,
    /// Also write the unified alphabet as a JSON array.
    #[arg(long)]
    alphabet: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory for the domain.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    name: String,
    /// `en` or `fr`; ignored for generation when --text is given.
    #[arg(long, default_value = "en")]
    lang: String,
    #[arg(long, default_value_t = 200)]
    lines: usize,
    /// Render these lines (one per line) instead of generated text.
    #[arg(long)]
    text: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0.0)]
    slant: f64,
    #[arg(long, default_value_t = 0)]
    ink: u8,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    jitter: u32,
    #[arg(long, default_value_t = 32)]
    height: usize,
    #[arg(long, default_value_t = 4)]
    margin: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
    All,
}

#[derive(Debug, Args)]
struct TextdivArgs {
    manifests: Vec<PathBuf>,
    /// Which transcripts represent each domain.
    #[arg(long, value_enum, default_value_t = SplitArg::All)]
    split: SplitArg,
    /// Highest n-gram order, 1 to 5.
    #[arg(long)]
    nmax: Option<usize>,
    /// Map off-diagonal entries onto [0, 100].
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Heatmap image (binary PGM).
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VisdivCommand {
    /// Train one autoencoder per domain on its train split.
    #[command(
        after_help = "Writes <out-dir>/<domain>.oodae and <out-dir>/<domain>.log.csv (epoch,train_mse,val_mse).\nStdout CSV columns: domain,best_epoch,best_val_mse,updates,params"
    )]
    Train(VisTrainArgs),
    /// Score every target split with every source autoencoder.
    #[command(
        after_help = "Output CSV: header `source,<domain>...`; cell (i, j) is the mean reconstruction MSE of domain j under domain i's autoencoder."
    )]
    Score(VisScoreArgs),
}

#[derive(Debug, Args)]
struct AeArgs {
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// Encoder channels, starting with 1, e.g. 1,8,16.
    #[arg(long, value_delimiter = ',')]
    channels: Option<Vec<usize>>,
    #[arg(long)]
    latent: Option<usize>,
    #[arg(long)]
    slope: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
}

#[derive(Debug, Args)]
struct VisTrainArgs {
    manifests: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    ae: AeArgs,
}

#[derive(Debug, Args)]
struct VisScoreArgs {
    manifests: Vec<PathBuf>,
    /// Directory holding <domain>.oodae files.
    #[arg(long)]
    params_dir: PathBuf,
    /// Split of each target that is reconstructed.
    #[arg(long, value_enum, default_value_t = SplitArg::Val)]
    split: SplitArg,
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Tab-separated log: sample_id, reference, hypothesis[, confidences].
    predictions: PathBuf,
    /// Also compute calibration error (needs the confidences column).
    #[arg(long)]
    ece: bool,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Lodo,
    InSample,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Metrics CSV: model,source,target and the nine metric columns.
    metrics: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Columns entering the factor analysis (default: all nine).
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Regression features (default: the label-free set).
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = ProtocolArg::Lodo)]
    protocol: ProtocolArg,
    #[arg(long, default_value_t = 5.0)]
    bucket_width: f64,
    /// Also write loadings.pgm (|loading| as darkness).
    #[arg(long)]
    pgm: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    All,
    NoSelection,
    Heldout,
    Oracle,
}

#[derive(Debug, Args)]
struct SelectArgs {
    validation: PathBuf,
    /// Target domain (the source domain for no-selection).
    #[arg(long)]
    domain: String,
    #[arg(long, value_enum, default_value_t = StrategyArg::All)]
    strategy: StrategyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScopeArg {
    IdAndOod,
    IdOnly,
}

#[derive(Debug, Args)]
struct ReportArgs {
    cross: PathBuf,
    /// CSV with columns model,target naming outlier results.
    #[arg(long)]
    outliers: Option<PathBuf>,
    /// Outlier as MODEL:TARGET; repeatable.
    #[arg(long = "outlier")]
    outlier: Vec<String>,
    #[arg(long, value_enum, default_value_t = ScopeArg::IdAndOod)]
    outlier_scope: ScopeArg,
    /// Round numbers to this many decimals.
    #[arg(long)]
    decimals: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Settings shared by every command after merging file, flags and env.
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub jobs: usize,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = Context {
        seed: config.seed(cli.seed)?,
        jobs: cli.jobs.or(config.jobs).unwrap_or(0),
        config,
    };
    match cli.command {
        Command::Ingest(a) => commands::ingest(&ctx, a),
        Command::Synth(a) => commands::synth(&ctx, a),
        Command::Textdiv(a) => commands::textdiv(&ctx, a),
        Command::Visdiv(VisdivCommand::Train(a)) => commands::visdiv_train(&ctx, a),
        Command::Visdiv(VisdivCommand::Score(a)) => commands::visdiv_score(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Select(a) => commands::select(&ctx, a),
        Command::Report(a) => commands::report(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oodlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
