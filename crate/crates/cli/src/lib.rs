//! Stage-oriented pipeline: ingest → signals → fuse → train → summarize →
//! eval. Each stage reads the files of earlier stages from the output
//! directory and writes its own.

pub mod config;
pub mod stages;
pub mod store;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use weaksum::scorer::BudgetMode;
use weaksum::signals::SignalName;
use weaksum::synth::SynthOptions;

pub use config::{Overrides, RunConfig};
pub use store::System;

/// Exit code for usage and configuration errors.
pub const EXIT_CONFIG: i32 = 1;
/// Exit code for errors in the data being processed.
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(weaksum::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Data(weaksum::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(message) => write!(f, "config error: {message}"),
            CliError::Data(e) => write!(f, "data error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<weaksum::Error> for CliError {
    fn from(e: weaksum::Error) -> Self {
        CliError::Data(e)
    }
}

fn parse_mode(s: &str) -> Result<BudgetMode, String> {
    s.parse().map_err(|e: weaksum::Error| e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "weaksum",
    version,
    about = "Topic-focused extractive summarization from weak supervision"
)]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Training seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// one_sentence or twenty_words.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<BudgetMode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct SystemArgs {
    /// Zero the weights of these signals (comma separated).
    #[arg(long, conflicts_with = "only")]
    drop: Option<String>,
    /// Keep only these signals (comma separated).
    #[arg(long)]
    only: Option<String>,
}

impl SystemArgs {
    fn system(&self) -> Result<System, CliError> {
        let parse = |list: &str| SignalName::parse_list(list).map_err(|e| CliError::Config(e.to_string()));
        match (&self.drop, &self.only) {
            (Some(list), _) => {
                let set = parse(list)?;
                Ok(if set.is_empty() { System::All } else { System::Drop(set) })
            }
            (None, Some(list)) => {
                let set = parse(list)?;
                if set.is_empty() {
                    return Err(CliError::Config("--only needs at least one signal".into()));
                }
                Ok(System::Only(set))
            }
            (None, None) => Ok(System::All),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read the corpus into the document store.
    Ingest,
    /// Compute supervision signals for every (document, topic) instance.
    Signals,
    /// Fuse signals into soft targets.
    Fuse(SystemArgs),
    /// Train the sentence scorer on fused targets.
    Train(SystemArgs),
    /// Write summaries with a trained scorer or the oracle.
    Summarize {
        #[command(flatten)]
        system: SystemArgs,
        /// Select sentences from reference-aligned labels instead.
        #[arg(long)]
        oracle: bool,
    },
    /// Score summaries files against references. Without arguments, every
    /// summaries file of the current mode in the output directory is used.
    Eval { files: Vec<PathBuf> },
    /// Generate a synthetic corpus with embeddings, QA answers and a config.
    Synth {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 200)]
        documents: usize,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let Some(path) = &cli.config else {
        return Err(CliError::Config("--config is required".into()));
    };
    let overrides = Overrides {
        out_dir: cli.out.clone(),
        seed: cli.seed,
        mode: cli.mode,
    };
    let config = RunConfig::load(path, &overrides)?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::io(&config.out_dir, e))?;
    let resolved = serde_json::to_string_pretty(&config).map_err(weaksum::Error::from)?;
    store::write_atomic(
        &config.out_dir.join(store::RESOLVED_CONFIG),
        format!("{resolved}\n").as_bytes(),
    )?;
    Ok(config)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Command::Synth { dir, documents } = &cli.command {
        let options = SynthOptions {
            documents: *documents,
            seed: cli.seed.unwrap_or(SynthOptions::default().seed),
            ..Default::default()
        };
        return stages::cmd_synth(dir, &options, out);
    }
    let config = load_config(&cli)?;
    match &cli.command {
        Command::Ingest => stages::cmd_ingest(&config, out).map(drop),
        Command::Signals => stages::cmd_signals(&config, out).map(drop),
        Command::Fuse(args) => stages::cmd_fuse(&config, &args.system()?, out).map(drop),
        Command::Train(args) => stages::cmd_train(&config, &args.system()?, out).map(drop),
        Command::Summarize { system, oracle } => {
            let system = if *oracle { System::Oracle } else { system.system()? };
            stages::cmd_summarize(&config, &system, out).map(drop)
        }
        Command::Eval { files } => stages::cmd_eval(&config, files, out).map(drop),
        Command::Synth { .. } => unreachable!(),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
