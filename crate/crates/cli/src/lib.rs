//! Experiment runner for the pdflow toolkit.
//!
//! Each subcommand reads one JSON config (see [`config::ExperimentConfig`]),
//! applies command-line overrides and writes its outputs atomically into the
//! output directory. Exit codes: 0 success, 2 configuration error,
//! 3 divergence, 4 not certifiable.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use pdflow_core::certify::Frame;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pdflow",
    version,
    about = "Augmented primal-dual flows: solve, certify, compare, distributed"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a flow and fit its convergence rate.
    Solve(CommonArgs),
    /// Certify an exponential rate through the KYP frequency-domain test.
    Certify(CommonArgs),
    /// Run the standard and augmented flows side by side.
    Compare(CommonArgs),
    /// Run the distributed proportional-integral flow on a graph.
    Distributed(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Number of log-spaced frequencies in the certificate grid.
    #[arg(long)]
    pub rho_grid_points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_frame)]
    pub frame: Option<Frame>,
    /// Tail fraction of the horizon used by the rate fit.
    #[arg(long, allow_negative_numbers = true)]
    pub window_fraction: Option<f64>,
}

fn parse_frame(s: &str) -> Result<Frame, String> {
    s.parse()
}

impl CommonArgs {
    fn overrides(&self) -> config::Overrides {
        config::Overrides {
            out: self.out.clone(),
            horizon: self.horizon,
            step: self.step,
            alpha: self.alpha,
            rho_grid_points: self.rho_grid_points,
            seed: self.seed,
            frame: self.frame,
            window_fraction: self.window_fraction,
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("PDFLOW_LOG", "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Loads the config named on the command line and runs the command.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let (args, cmd): (&CommonArgs, fn(&config::Experiment) -> error::Result<()>) =
        match &cli.command {
            Command::Solve(a) => (a, commands::solve),
            Command::Certify(a) => (a, commands::certify),
            Command::Compare(a) => (a, commands::compare),
            Command::Distributed(a) => (a, commands::distributed),
        };
    let exp = config::load(&args.config, &args.overrides())?;
    cmd(&exp)
}

/// Parses `argv`, runs the command and maps the outcome to an exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pdflow: {e}");
            e.exit_code()
        }
    }
}
