//! `fsd`: run first story detection experiments from the command line.

mod commands;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fsd_core::{BiasForm, Exec, NormPolicy, StreamFormat, StreamOrdering, TfScheme};

#[derive(Debug, Parser)]
#[command(
    name = "fsd",
    version,
    about = "First story detection on document streams"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score every document of a stream and write a novelty CSV.
    Detect(DetectArgs),
    /// Evaluate a novelty CSV against ground truth, with skip rounds.
    Eval(EvalArgs),
    /// Sample the mean IDF of the vocabulary along a stream.
    TraceIdf(TraceArgs),
    /// Grid-search the distance bias parameters on a labeled stream.
    Tune(TuneArgs),
    /// Paired randomization test between two evaluation reports.
    Compare(CompareArgs),
    /// Generate a seeded synthetic stream (and truth, for planted topics).
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Tsv,
}

impl From<FormatArg> for StreamFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => StreamFormat::Jsonl,
            FormatArg::Tsv => StreamFormat::Tsv,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum OrderArg {
    /// Keep file order.
    #[default]
    AsIs,
    /// Stable sort by (timestamp, id).
    Timestamp,
}

impl From<OrderArg> for StreamOrdering {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::AsIs => StreamOrdering::AsIs,
            OrderArg::Timestamp => StreamOrdering::ByTimestamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetectorArg {
    Exhaustive,
    Recency,
    Lsh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormsArg {
    Fresh,
    Frozen,
}

impl From<NormsArg> for NormPolicy {
    fn from(n: NormsArg) -> Self {
        match n {
            NormsArg::Fresh => NormPolicy::Fresh,
            NormsArg::Frozen => NormPolicy::Frozen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BiasArg {
    None,
    Optimized,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    Normalized,
    Literal,
}

impl From<FormArg> for BiasForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Normalized => BiasForm::Normalized,
            FormArg::Literal => BiasForm::Literal,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TfArg {
    Raw,
    Sublinear,
}

impl From<TfArg> for TfScheme {
    fn from(t: TfArg) -> Self {
        match t {
            TfArg::Raw => TfScheme::Raw,
            TfArg::Sublinear => TfScheme::Sublinear,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

impl From<ExecArg> for Exec {
    fn from(e: ExecArg) -> Self {
        match e {
            ExecArg::Sequential => Exec::Sequential,
            ExecArg::Parallel => Exec::Parallel,
        }
    }
}

fn default_exec() -> ExecArg {
    if Exec::default().is_parallel() {
        ExecArg::Parallel
    } else {
        ExecArg::Sequential
    }
}

#[derive(Debug, Args)]
struct StreamArgs {
    /// JSONL (`{id, timestamp, text, topic?}`) or TSV (`id, timestamp, topic, text`).
    #[arg(long)]
    input: PathBuf,
    /// Defaults to the input file extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum, default_value_t = OrderArg::AsIs)]
    order: OrderArg,
    /// Drop common English stopwords while tokenizing.
    #[arg(long)]
    stopwords: bool,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    stream: StreamArgs,
    #[arg(long, value_enum, default_value_t = DetectorArg::Exhaustive)]
    detector: DetectorArg,
    #[arg(long, value_enum, default_value_t = NormsArg::Fresh)]
    norms: NormsArg,
    #[arg(long, value_enum, default_value_t = BiasArg::None)]
    bias: BiasArg,
    #[arg(long, default_value_t = 0.036)]
    delta: f64,
    #[arg(long, default_value_t = 0.61)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = FormArg::Normalized)]
    bias_form: FormArg,
    /// Recency window, or the exact window of the LSH detector.
    #[arg(long, default_value_t = 2000)]
    window: usize,
    #[arg(long, default_value_t = 13)]
    lsh_bits: u32,
    #[arg(long, default_value_t = 70)]
    lsh_tables: u32,
    #[arg(long, default_value_t = 0.6)]
    lsh_threshold: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TfArg::Raw)]
    tf: TfArg,
    #[arg(long, value_enum, default_value_t = default_exec())]
    exec: ExecArg,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CostArgs {
    #[arg(long, default_value_t = 1.0)]
    c_miss: f64,
    #[arg(long, default_value_t = 0.1)]
    c_fa: f64,
    #[arg(long, default_value_t = 0.02)]
    p_target: f64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    novelty: PathBuf,
    /// JSONL, one `{"topic": ..., "positions": [...]}` per line.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 3)]
    skip_rounds: usize,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long, value_enum, default_value_t = default_exec())]
    exec: ExecArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[command(flatten)]
    stream: StreamArgs,
    #[arg(long, default_value_t = 1000)]
    every: u64,
    /// CSV `position,mean_idf`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    CMinRound0,
    CMinSkipMean,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    stream: StreamArgs,
    #[arg(long)]
    truth: PathBuf,
    /// `delta=v1,v2,...;gamma=v1,v2,...`
    #[arg(long)]
    grid: String,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::CMinRound0)]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 3)]
    skip_rounds: usize,
    #[arg(long, value_enum, default_value_t = FormArg::Normalized)]
    bias_form: FormArg,
    #[arg(long, value_enum, default_value_t = TfArg::Raw)]
    tf: TfArg,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long, value_enum, default_value_t = default_exec())]
    exec: ExecArg,
    /// CSV `delta,gamma,c_min`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// `report.json` written by `eval`.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Skip-evaluation round to compare.
    #[arg(long, default_value_t = 0)]
    round: usize,
    #[arg(long, default_value_t = fsd_core::eval::DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = default_exec())]
    exec: ExecArg,
    /// Also write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Unlabeled Zipfian stream.
    Zipf,
    /// Planted topics amid growing-vocabulary noise, with truth.
    Planted,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Stream length; defaults to the generator's own default.
    #[arg(long)]
    docs: Option<usize>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Invalid flag combination; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Detect(a) => commands::detect(a),
        Command::Eval(a) => commands::eval(a),
        Command::TraceIdf(a) => commands::trace_idf(a),
        Command::Tune(a) => commands::tune(a),
        Command::Compare(a) => commands::compare(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
