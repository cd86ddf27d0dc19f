//! `dexkit` command-line tool.
//!
//! Exit codes: 0 success, 1 fatal error, 2 some files failed, 64 usage error.

mod compare;
mod convert;
mod error;
mod plan;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use dexkit::tensor::parse_dims;
use dexkit::{DeviceProfile, Shape};

use error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "dexkit", version, about = "Channel extension and fit planning for tiny accelerator inputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert an image or a directory of images into .dext tensors.
    Convert(ConvertArgs),
    /// Check whether a tensor fits a device and report utilization.
    Plan(PlanArgs),
    /// Run several strategies on one image and tabulate them.
    Compare(CompareArgs),
    /// Tabulate utilization across a list of output channel counts.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Image file or directory.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Required unless given by --config.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Output shape CxHxW. Required unless given by --config.
    #[arg(long, value_parser = parse_shape)]
    pub out_shape: Option<Shape>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub profile: Option<String>,
    /// JSON pipeline config; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write normalized f32 instead of Q7.
    #[arg(long)]
    pub no_quantize: bool,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Tensor shape CxHxW as fed to the accelerator.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Shape,
    #[arg(long, default_value = "max78000")]
    pub profile: String,
    /// Original image shape CxHxW, enables the information metrics.
    #[arg(long, value_parser = parse_shape)]
    pub orig_shape: Option<Shape>,
    /// Strategy that produced the tensor; decides the information ratio.
    #[arg(long, default_value = "dex")]
    pub strategy: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub bytes_per_value: u64,
    /// First-layer kernel edge.
    #[arg(long, requires = "layer_out")]
    pub kernel: Option<usize>,
    /// First-layer output channels.
    #[arg(long, requires = "kernel")]
    pub layer_out: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// A single image file.
    #[arg(long)]
    pub input: PathBuf,
    /// CxHxW; C is ignored by strategies that fix their own channel count.
    #[arg(long, value_parser = parse_shape)]
    pub out_shape: Shape,
    /// Comma-separated strategy names.
    #[arg(long)]
    pub strategies: String,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "max78000")]
    pub profile: String,
    /// Also write one PGM per output channel.
    #[arg(long)]
    pub previews: bool,
    #[arg(long)]
    pub no_quantize: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated output channel counts.
    #[arg(long, default_value = "3,6,18,36,64", allow_hyphen_values = true)]
    pub channels: String,
    #[arg(long, value_parser = parse_shape)]
    pub orig_shape: Shape,
    /// Output spatial size HxW.
    #[arg(long, value_parser = parse_plane)]
    pub out_shape: (usize, usize),
    #[arg(long, default_value = "max78000")]
    pub profile: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    s.parse().map_err(|e: dexkit::DexError| e.to_string())
}

fn parse_plane(s: &str) -> Result<(usize, usize), String> {
    match parse_dims(s).map_err(|e| e.to_string())?.as_slice() {
        &[h, w] => Ok((h, w)),
        _ => Err(format!("expected HxW, got {s:?}")),
    }
}

pub fn resolve_profile(name: &str) -> Result<DeviceProfile, CliError> {
    DeviceProfile::resolve(name).map_err(CliError::usage)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Convert(args) => convert::run(&args),
        Command::Plan(args) => plan::run(&args),
        Command::Compare(args) => compare::run(&args),
        Command::Sweep(args) => sweep::run(&args),
    };
    match result {
        Ok(outcome) => outcome.into(),
        Err(err) => {
            eprintln!("dexkit: {err}");
            err.exit_code()
        }
    }
}
