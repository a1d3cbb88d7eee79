mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "l2gauss", version, about = "Gaussian processes on L²[0,1]: simulation, likelihoods, determinants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample paths and write one CSV per replicate plus manifest.json
    Simulate(SimulateArgs),
    /// Functional log-likelihood of a data file
    Loglik(LoglikArgs),
    /// Fredholm determinant of a registry kernel
    Fredholm(FredholmArgs),
    /// Maximum-likelihood fit
    Fit(FitArgs),
    /// Matrix-vs-functional likelihood convergence table
    Converge(ConvergeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Family {
    Mixed,
    BmNoise,
}

#[derive(Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Family,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    /// bm, ou, mixed, bm-noise, or a kernel name (ones, brownian, bb, fwd, ou(a,l))
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Multiplies a registry kernel
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Right end of the time domain for path models
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value = "path")]
    pub prefix: String,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct LoglikArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub n_embed: usize,
    #[arg(long)]
    pub corrected: bool,
    /// Defaults to the number of samples
    #[arg(long)]
    pub n_pen: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DetRouteArg {
    Series,
    Matrix,
    Analytic,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct FredholmArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, value_enum, default_value = "matrix")]
    pub route: DetRouteArg,
    /// Grid size; defaults to 256 (matrix) or 64 (series)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub k_max: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RouteArg {
    Functional,
    Mv,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub model: Family,
    #[arg(long, value_enum, default_value = "functional")]
    pub route: RouteArg,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub n_embed: usize,
    #[arg(long)]
    pub n_pen: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RuleArg {
    Fixed,
    Simulated,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [32, 64, 128, 256, 512])]
    pub schedule: Vec<usize>,
    #[arg(long, value_enum, default_value = "fixed")]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat CSV with columns n,quad,det,D,total
    #[arg(long)]
    pub flat: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Loglik(a) => commands::loglik(&a),
        Command::Fredholm(a) => commands::fredholm(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Converge(a) => commands::converge(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
