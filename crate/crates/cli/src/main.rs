use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use halfline_nls_cli::commands::{self, Failure};
use halfline_nls_cli::config::{Config, ConfigError, Overrides};

#[derive(Parser)]
#[command(name = "halfline-nls", version, about = "Half-line NLS with nonlinear Neumann boundary data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem over [0, T] with restarts.
    Solve(Common),
    /// Ratio sweeps for the boundary operator bounds.
    VerifyLinear(Common),
    /// Ratio sweeps for the nonlinearity and interpolation bounds.
    VerifyEstimates(Common),
    /// Grid over (r, lambda, amplitude) reporting status and T_max.
    BlowupScan(Common),
    /// Spectral solver against Crank-Nicolson.
    CompareOracle(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<Config, Failure> {
        let mut cfg = Config::load(&self.config).map_err(|e| match e {
            ConfigError::Schema(m) => Failure::Schema(m),
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
        })?;
        cfg.apply(&Overrides {
            s: self.s,
            p: self.p,
            r: self.r,
            lambda: self.lambda,
            horizon: self.horizon,
            n: self.n,
            dt: self.dt,
            out_dir: self.out_dir.clone(),
        });
        cfg.check().map_err(|e| Failure::Schema(format!("{}: {e}", self.config.display())))?;
        Ok(cfg)
    }
}

fn threads() -> Result<usize, Failure> {
    match std::env::var("HALFLINE_NLS_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Schema(format!("HALFLINE_NLS_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads()?).build().map_err(|e| Failure::Io(e.to_string()))?;
    let (common, f): (&Common, fn(&Config) -> Result<String, Failure>) = match &cli.command {
        Command::Solve(c) => (c, commands::solve),
        Command::VerifyLinear(c) => (c, commands::verify_linear),
        Command::VerifyEstimates(c) => (c, commands::verify_estimates),
        Command::BlowupScan(c) => (c, commands::blowup_scan),
        Command::CompareOracle(c) => (c, commands::compare_oracle),
    };
    let cfg = common.load()?;
    pool.install(|| f(&cfg))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Schema(m) => eprintln!("schema error: {m}"),
                Failure::Numerical { message, dump } => eprintln!("numerical failure: {message}\n{dump}"),
                Failure::Io(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
