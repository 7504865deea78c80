//! `mdid` command-line front end: synthesize echoes, build spectrogram
//! images, train and cross-validate the classifier.
//!
//! Besides its own flags, every subcommand accepts `--<key> <value>` for any
//! scalar configuration key (hyphens and underscores are interchangeable),
//! applied on top of `--config`.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mdid_core::config::{Config, SCALAR_KEYS};
use mdid_core::Error;

pub use commands::{crossval, eval, info, spectrogram, synth, train};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &Error) -> i32 {
    use Error::*;
    if e.is_numerical() {
        return EXIT_NUMERICAL;
    }
    match e {
        InFold { source, .. } => core_exit_code(source),
        Config(_)
        | InvalidParams(_)
        | NonIntegralDimensions { .. }
        | InvalidProfile(_)
        | InvalidScenario(_)
        | InvalidHyperparams(_)
        | GridTooCoarse { .. }
        | WindowLongerThanSeries { .. } => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

#[derive(Debug, Parser)]
#[command(name = "mdid", version, about = "Radar micro-Doppler personal identification")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Configuration file (TOML, flat keys).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed; every random stream of the command derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render synthetic trials to frame files plus a manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert the frame files of a manifest to 32×100 PGM images.
    Spectrogram {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Background frame file; defaults to background.uwbf next to the manifest.
        #[arg(long, conflicts_with = "no_clutter_removal")]
        background: Option<PathBuf>,
        /// Skip background subtraction.
        #[arg(long)]
        no_clutter_removal: bool,
        /// Also write each spectrogram as CSV (time_s,velocity_mps,power).
        #[arg(long)]
        csv: bool,
    },
    /// Train a classifier on every image of a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated stratified k-fold cross-validation.
    Crossval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify the images of a manifest with a trained model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Directory for the confusion table and CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the derived radar and image parameters.
    Info {
        /// Also describe this model file.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also describe this frame file.
        #[arg(long)]
        frames: Option<PathBuf>,
    },
}

/// Configuration overrides as (key, value) text pairs.
pub type Overrides = Vec<(String, String)>;

/// Pulls `--<key> <value>` / `--<key>=<value>` pairs for configuration keys
/// out of `args`, returning the remaining arguments and the overrides.
pub fn split_overrides(args: Vec<OsString>) -> Result<(Vec<OsString>, Overrides), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let Some(text) = arg.to_str().and_then(|s| s.strip_prefix("--")) else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match text.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (text.to_string(), None),
        };
        let key = name.replace('-', "_");
        if !SCALAR_KEYS.contains(&key.as_str()) {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => iter.next().and_then(|v| v.into_string().ok()).ok_or_else(|| CliError::Usage(format!("--{name} needs a value")))?,
        };
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

/// Runs the command line and returns the process exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let (args, overrides) = match split_overrides(args.into_iter().collect()) {
        Ok(split) => split,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, &overrides) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, overrides: &[(String, String)]) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set up {n} threads: {e}")))?;
    }
    let config = Config::read_with_overrides(cli.global.config.as_deref(), overrides)?;
    let seed = cli.global.seed;
    match &cli.command {
        Command::Synth { out } => synth(&config, out, seed),
        Command::Spectrogram { manifest, out, background, no_clutter_removal, csv } => {
            spectrogram(&config, manifest, out, background.as_deref(), *no_clutter_removal, *csv)
        }
        Command::Train { manifest, out } => train(&config, manifest, out, seed),
        Command::Crossval { manifest, out } => crossval(&config, manifest, out, seed),
        Command::Eval { model, manifest, out } => eval(model, manifest, out.as_deref()),
        Command::Info { model, frames } => info(&config, model.as_deref(), frames.as_deref()),
    }
}
