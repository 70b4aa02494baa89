use clap::{Parser, Subcommand};
use fluxlim_cli::{commands, config, init_threads_from_env};
use std::path::PathBuf;
use std::process::ExitCode;

/// Structured-grid solver for a flux-limited chemotaxis-Stokes system with a
/// built-in structural audit: monotone masses, exact difference conservation,
/// max principles, bounded cumulative integrals, incompressibility and
/// convergence to the constant equilibria.
#[derive(Parser)]
#[command(name = "fluxlim", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a run from a JSON config or a built-in demo (demo1d/2d/3d).
    Run {
        config: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Re-run a config across a list of limiter exponents.
    Sweep {
        config: String,
        /// Comma-separated exponents, e.g. --theta 0.1,0.5,1.0
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Manufactured-solution order study (or the channel-flow test).
    Mms {
        case: String,
        /// Comma-separated cell counts, e.g. --grids 32,64,128
        #[arg(long, value_delimiter = ',')]
        grids: Vec<usize>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Closed-form / brute-force / solver cross-validation.
    Oracle {
        case: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Re-audit an existing diag.csv, optionally against tolerance overrides.
    Check {
        diag: PathBuf,
        tolerances: Option<PathBuf>,
    },
    /// List the built-in demo configs.
    Demos,
}

fn main() -> ExitCode {
    init_threads_from_env();
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Run { config, output_dir } => commands::cmd_run(config, output_dir.clone()),
        Cmd::Sweep {
            config,
            theta,
            output_dir,
        } => commands::cmd_sweep(config, theta, output_dir.clone()),
        Cmd::Mms {
            case,
            grids,
            output_dir,
        } => commands::cmd_mms(case, grids, output_dir.clone()),
        Cmd::Oracle { case, output_dir } => commands::cmd_oracle(case, output_dir.clone()),
        Cmd::Check { diag, tolerances } => commands::cmd_check(diag, tolerances.as_deref()),
        Cmd::Demos => {
            for name in config::builtin_names() {
                println!("{name}");
            }
            Ok(0)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code.clamp(0, 255) as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
