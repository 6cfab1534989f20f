//! The `permattack` command line.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 numeric divergence.

mod commands;
mod config;
mod load;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::attacks::AttackTask;
use crate::permkit::PatternKind;
use crate::Error;

pub use config::{DataConfig, RunConfig, TrainOverrides};
pub use load::{load_images, load_lwc, load_lwc_split, ImageData};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Config(_) => EXIT_USAGE,
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_DATA,
    }
}

#[derive(Debug, Parser)]
#[command(name = "permattack", version, about = "Cryptanalysis workbench for permutation image ciphers and lightweight block ciphers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Seed for every random choice of the command.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Refuse to run without an explicit seed.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CipherArg {
    Katan,
    Simon,
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got '{s}'"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a multi-round P-box schedule (PBX1).
    GenPbox {
        #[arg(long)]
        pattern: PatternKind,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Generator parameters; unset ones keep their preset values.
        #[arg(long, num_args = 1.., value_parser = parse_kv)]
        params: Vec<(String, String)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Permute every image of an IDX file.
    Encrypt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Existing schedule to apply.
        #[arg(long, conflicts_with = "pattern", required_unless_present = "pattern")]
        keys: Option<PathBuf>,
        #[arg(long, requires = "rounds")]
        pattern: Option<PatternKind>,
        #[arg(long, num_args = 1.., value_parser = parse_kv, requires = "pattern")]
        params: Vec<(String, String)>,
        #[arg(long)]
        rounds: Option<usize>,
        /// Where to save the generated schedule.
        #[arg(long, requires = "pattern")]
        keys_out: Option<PathBuf>,
    },
    /// Undo a schedule on every image of an IDX file.
    Decrypt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a KATAN32 or SIMON32/64 known-plaintext corpus (LWC1).
    MakeLwc {
        #[arg(long, value_enum)]
        cipher: CipherArg,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        val: Option<usize>,
        /// SIMON only.
        #[arg(long)]
        test: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Re-encrypt this many records from the written files (default 1000).
        #[arg(long, num_args = 0..=1, default_missing_value = "1000")]
        audit: Option<usize>,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Train an attack model from a run config.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Must match the task of the config when given.
        #[arg(long)]
        task: Option<AttackTask>,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Continue training (or, with zero epochs, just evaluate) from a checkpoint.
    Transfer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: PathBuf,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Run a checkpoint on cipher images (IDX) or an LWC1 split.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Matching plain images, for triptychs and metrics.
        #[arg(long)]
        plain: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
        /// Images shown in the PGM grid.
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Score trained runs and write the results table.
    Eval {
        /// Output directory of a `train` or `transfer` run; repeatable.
        #[arg(long, required = true)]
        run: Vec<PathBuf>,
        /// Directory with train/t10k images and labels for the classifier.
        #[arg(long, required_unless_present = "classifier")]
        classifier_data: Option<PathBuf>,
        /// Reuse a trained classifier.
        #[arg(long)]
        classifier: Option<PathBuf>,
        #[arg(long)]
        classifier_limit: Option<usize>,
        #[arg(long, default_value_t = 10)]
        classifier_epochs: usize,
        /// Pure-noise images classified as a chance baseline.
        #[arg(long, default_value_t = 1000)]
        noise: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Genetic key search against the synthetic template oracle.
    Ga {
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        /// Take the template from this IDX file instead of random pixels.
        #[arg(long)]
        images: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Encrypt with the first round key of a generator instead of a random key.
        #[arg(long)]
        pattern: Option<PatternKind>,
        #[arg(long, num_args = 1.., value_parser = parse_kv, requires = "pattern")]
        params: Vec<(String, String)>,
        #[arg(long, default_value_t = 50)]
        population: usize,
        #[arg(long, default_value_t = 200)]
        generations: usize,
        #[arg(long, default_value_t = 0.01)]
        mutation: f64,
        /// Survivors per generation; half the population by default.
        #[arg(long)]
        elitism: Option<usize>,
        /// Smallest connected run of correct pixels the oracle reports.
        #[arg(long, default_value_t = 4)]
        min_run: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArgs,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match crate::parallel::with_env_workers(|| commands::dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
