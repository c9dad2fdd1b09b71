mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzyjm::simulate::Scenario;
use fuzzyjm::{DistanceMode, ErrorCategory};

#[derive(Parser, Debug)]
#[command(name = "fuzzyjm", version, about = "Fuzzy jump models for regime detection in time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model to a CSV file and write memberships, prototypes and metrics.
    Fit(FitArgs),
    /// Simulate a series with known state probabilities.
    Simulate(SimulateArgs),
    /// Run the Monte Carlo benchmark over a (lambda, m) grid.
    Benchmark(BenchmarkArgs),
    /// Compute the lambda-stability curve for a data set.
    TuneLambda(TuneArgs),
    /// Derive feature columns from a raw CSV.
    Transform(TransformArgs),
    /// Compare estimated states with reference states.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Distance {
    Gower,
    Euclidean,
}

impl From<Distance> for DistanceMode {
    fn from(d: Distance) -> Self {
        match d {
            Distance::Gower => DistanceMode::Gower,
            Distance::Euclidean => DistanceMode::SquaredEuclidean,
        }
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON array of column specs.
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Maximum outer iterations per restart.
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Relative objective change that stops the outer loop.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Distance::Gower)]
    distance: Distance,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    scenario: Scenario,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rho: f64,
    #[arg(long, default_value_t = 0.99, allow_negative_numbers = true)]
    phi: f64,
    /// Overrides the scenario's tau.
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[arg(long)]
    scenario: Scenario,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    replicas: usize,
    /// `min:step:max` or a comma-separated list.
    #[arg(long, default_value = "0:0.05:1")]
    lambda_grid: String,
    /// `min:step:max` or a comma-separated list.
    #[arg(long, default_value = "1.01,1.25,1.5,1.75,2")]
    m_grid: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rho: f64,
    /// JSON report path; the CSV table is written next to it with a `.csv`
    /// extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TuneArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 0.1)]
    lambda_step: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, value_enum, default_value_t = Distance::Gower)]
    distance: Distance,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[arg(long)]
    input: PathBuf,
    /// Transform pipeline JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Metric {
    Mse,
    Ari,
    Bacc,
    Stats,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Estimated memberships (`s_k` columns) or labels.
    #[arg(long)]
    est: PathBuf,
    /// Reference probabilities (`s_k` or `pi_k` columns) or labels.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mse,ari,bacc")]
    metrics: Vec<Metric>,
    /// All-numeric series for `stats`, row-aligned with the estimates.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Usage => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::TuneLambda(a) => commands::tune_lambda(a),
        Command::Transform(a) => commands::transform(a),
        Command::Eval(a) => commands::eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}
