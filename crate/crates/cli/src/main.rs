//! `phasetv` command-line driver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod report;

#[derive(Parser, Debug)]
#[command(name = "phasetv", version, about = "Total-variation denoising of wrapped phase maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic wrapped-phase problem with calibrated noise.
    Generate(GenerateArgs),
    /// Denoise the noisy channel pair found in a problem directory.
    Denoise(DenoiseArgs),
    /// Score a result directory against a reference problem directory.
    Metrics(MetricsArgs),
    /// Tabulate several run directories into one CSV.
    Compare(CompareArgs),
    /// Convert an 8/16-bit greyscale image into a wrapped-phase problem directory.
    Import(ImportArgs),
    /// Generate, denoise and score in one go from an experiment JSON file.
    Run(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SceneArg {
    Ramp,
    Gaussian,
    Custom,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub scene: Option<SceneArg>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Target SNR of the noisy wrapped phase, dB.
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Noise seed (also stored as the scene seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Peak-to-peak extent of the smooth part of the phase, radians.
    #[arg(long = "phase-range")]
    pub phase_range: Option<f64>,
    /// Height of the vertical step, radians.
    #[arg(long = "jump-height", allow_negative_numbers = true)]
    pub jump_height: Option<f64>,
    /// Expression for `--scene custom`, in i, j, rows, cols, phase_range, jump_height, pi.
    #[arg(long)]
    pub expr: Option<String>,
    /// JSON file with `scene` and/or `noise` sections; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    FixedPoint,
    GradientDescent,
    Strobel,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    Mean3,
    Gaussian,
}

#[derive(Args, Debug)]
pub struct DenoiseArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub lambda3: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "max-outer")]
    pub max_outer: Option<usize>,
    /// Gauss–Seidel sweeps per diffusivity refresh.
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Gradient-descent step; defaults to a conservative stability bound.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum)]
    pub filter: Option<FilterArg>,
    /// Width of `--filter gaussian`.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Divide the input pair by its pixelwise amplitude before solving.
    #[arg(long = "normalize-amplitude")]
    pub normalize_amplitude: bool,
    /// JSON file with `solver` and/or `solve` sections; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Directory holding result_real.phf and result_im.phf.
    #[arg(long)]
    pub result: PathBuf,
    /// Problem directory holding the clean pair and the noisy phase.
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ImportArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Denoise(a) => commands::denoise(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Import(a) => commands::import(&a),
        Command::Run(a) => commands::run(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
