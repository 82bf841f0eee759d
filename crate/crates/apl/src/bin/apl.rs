use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use apl::cli;

/// Asymmetric polynomial losses: curve data, gradient analysis, synthetic
/// experiments, and gradient audits.
#[derive(Parser)]
#[command(name = "apl", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write diagnostic curve data as CSV (1: coefficients, 2: negative
    /// loss curves, 3: negative gradient curves).
    Curves {
        #[arg(long)]
        figure: u8,
        /// Loss parameters as a JSON object or array of objects.
        #[arg(long)]
        params: String,
        #[arg(long)]
        out: PathBuf,
        /// Grid points (figures 2 and 3) or series terms (figure 1).
        #[arg(long)]
        points: Option<usize>,
    },
    /// Print the negative-class gradient peak as JSON.
    Pstar {
        #[arg(long)]
        params: String,
    },
    /// Print the worst truncation error of the series cross-entropy.
    TaylorCheck {
        #[arg(long, default_value_t = 200)]
        order: usize,
    },
    /// Train over a grid of loss parameters and write a ranked CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's "out" field.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one configuration per seed and write a JSON-lines history.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's "out" field.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic gradients against finite differences; exits
    /// nonzero if the tolerance is exceeded.
    Audit {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Loss parameters as a JSON object; defaults to the
        /// cross-entropy point.
        #[arg(long)]
        params: Option<String>,
    },
}

fn run(cmd: Cmd) -> Result<i32, cli::CliError> {
    match cmd {
        Cmd::Curves {
            figure,
            params,
            out,
            points,
        } => {
            cli::cmd_curves(figure, &params, points, &out)?;
            Ok(0)
        }
        Cmd::Pstar { params } => {
            println!("{}", cli::cmd_pstar(&params)?);
            Ok(0)
        }
        Cmd::TaylorCheck { order } => {
            println!("{}", cli::cmd_taylor_check(order)?);
            Ok(0)
        }
        Cmd::Sweep { config, out } => {
            cli::cmd_sweep(&config, out.as_deref())?;
            Ok(0)
        }
        Cmd::Train { config, out } => {
            cli::cmd_train(&config, out.as_deref())?;
            Ok(0)
        }
        Cmd::Audit {
            trials,
            seed,
            params,
        } => {
            let outcome = cli::cmd_audit(trials, seed, params.as_deref())?;
            println!("{}", outcome.json);
            Ok(if outcome.pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
