mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use typeprompt_core::frontend::TargetKind;
use typeprompt_core::llm::BackendKind;

/// Few-shot type inference for Python with sliced code, type hints and
/// chain-of-thought examples.
#[derive(Debug, Parser)]
#[command(name = "typeprompt", version)]
pub struct Cli {
    /// TOML file with default settings; command-line flags take precedence.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(flatten)]
    pub run: RunArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Hop threshold for graph slicing.
    #[arg(long, global = true)]
    pub max_hop: Option<u32>,
    /// Number of in-context examples.
    #[arg(long, global = true)]
    pub shots: Option<usize>,
    /// Generations sampled per target.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    /// Ranked predictions kept per target.
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
    /// Maximum number of names in the type hint line.
    #[arg(long, global = true)]
    pub hint_cap: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Base URL of an OpenAI-compatible endpoint.
    #[arg(long, global = true)]
    pub base_url: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Canned generations for the mock backend (JSON array).
    #[arg(long, global = true, value_name = "FILE")]
    pub mock_fixtures: Option<PathBuf>,
    /// Prompt size limit in estimated tokens; 0 disables it.
    #[arg(long, global = true)]
    pub token_budget: Option<usize>,
    /// Comma-separated example ids used instead of retrieval.
    #[arg(long, global = true, value_delimiter = ',')]
    pub fixed_examples: Option<Vec<String>>,
    /// Omit control-flow headers and dedent slices.
    #[arg(long, global = true)]
    pub flat_slices: bool,
    /// Compare type text without normalization.
    #[arg(long, global = true)]
    pub strict_text: bool,
    /// Prefix third-party hints with their package.
    #[arg(long, global = true, alias = "qualified")]
    pub qualified_hints: bool,
    /// Recorded for reproducibility; no stage is randomized.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for `infer` (default: one per CPU).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// BM25 index of solved examples.
    #[arg(long, global = true, value_name = "FILE")]
    pub index: Option<PathBuf>,
    /// Third-party type database.
    #[arg(long, global = true, value_name = "FILE")]
    pub typedb: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Mock,
    Http,
}

impl From<BackendArg> for BackendKind {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Mock => BackendKind::Mock,
            BackendArg::Http => BackendKind::Http,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Arg,
    Ret,
    Local,
    Global,
}

impl From<KindArg> for TargetKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Arg => TargetKind::Argument,
            KindArg::Ret => TargetKind::ReturnValue,
            KindArg::Local => TargetKind::LocalVariable,
            KindArg::Global => TargetKind::GlobalVariable,
        }
    }
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// `FILE.py:LINE:NAME`; use the function name for return values.
    pub locator: String,
    /// Target kind when the locator is ambiguous.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Project root for import resolution (default: the file's directory).
    #[arg(long)]
    pub root: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the code slice of a target.
    Slice(TargetArgs),
    /// Print the type hint line of a file.
    Hints {
        file: PathBuf,
        #[arg(long)]
        root: Option<PathBuf>,
    },
    /// Print the chain-of-thought answer for a target of known type.
    Cot {
        #[command(flatten)]
        target: TargetArgs,
        /// Annotated type quoted in the conclusion.
        #[arg(long = "type", value_name = "TYPE")]
        ty: String,
    },
    /// Print the full prompt for a target.
    Prompt(TargetArgs),
    /// Print the sliced type dependency graph of a target.
    Tdg {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: GraphFormat,
    },
    /// Print the type extracted from a generation (argument or stdin).
    Extract { text: Option<String> },
    /// Collect the annotated targets below a directory.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Build the BM25 index of solved examples.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Build the third-party type database.
    #[command(subcommand)]
    Typedb(TypedbCommand),
    /// Predict types for every record of a dataset.
    Infer {
        dataset: PathBuf,
        /// Directory the dataset paths are relative to (default: the
        /// dataset's directory).
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score predictions against a dataset.
    Eval {
        dataset: PathBuf,
        predictions: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    Build {
        root: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum IndexCommand {
    Build {
        /// Annotated training records (JSON Lines).
        train: PathBuf,
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum TypedbCommand {
    Build {
        /// A site-packages style directory.
        site: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("typeprompt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
