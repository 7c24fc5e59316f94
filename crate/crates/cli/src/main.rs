use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fraclangevin::kernels::HVolterraForm;
use fraclangevin_cli::commands::{
    self, CliError, ExitStatus, Overrides, Requirement, VerifyOptions,
};
use fraclangevin_cli::RunConfig;

#[derive(Parser)]
#[command(
    name = "fraclangevin",
    version,
    about = "Four-point fractional Langevin boundary value solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct SolverFlags {
    /// Number of grid panels (at least 8).
    #[arg(long)]
    n_panels: Option<usize>,
    /// Picard stopping tolerance in the C1 norm.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

impl From<SolverFlags> for Overrides {
    fn from(f: SolverFlags) -> Self {
        Overrides {
            n_panels: f.n_panels,
            tol: f.tol,
            max_iter: f.max_iter,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Derived,
    AsPrinted,
}

#[derive(Subcommand)]
enum Command {
    /// Print the existence and uniqueness constants for a config.
    Check {
        config: PathBuf,
        /// Condition that must hold for a zero exit code.
        #[arg(long, value_enum, default_value_t = Requirement::All)]
        require: Requirement,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Solve a config and write the solution, convergence history and report.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run the built-in accuracy checks.
    Verify {
        /// Exponent used for the convolution part of the coupling kernel.
        #[arg(long, value_enum, default_value = "derived")]
        h_volterra_form: FormArg,
        #[arg(long, default_value_t = 256)]
        closed_form_panels: usize,
        #[arg(long, default_value_t = 1e-3)]
        closed_form_tol: f64,
    },
}

fn load(path: &Path, flags: SolverFlags) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    Overrides::from(flags).apply(&mut cfg)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitStatus, CliError> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Check {
            config,
            require,
            solver,
        } => commands::check(&load(&config, solver)?, require, &mut out),
        Command::Solve { config, solver } => commands::solve(&load(&config, solver)?, &mut out),
        Command::Verify {
            h_volterra_form,
            closed_form_panels,
            closed_form_tol,
        } => {
            let opts = VerifyOptions {
                h_volterra_form: match h_volterra_form {
                    FormArg::Derived => HVolterraForm::Derived,
                    FormArg::AsPrinted => HVolterraForm::AsPrinted,
                },
                closed_form_panels,
                closed_form_tol,
            };
            commands::verify(&opts, &mut out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let status = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_status()
    });
    ExitCode::from(status.code() as u8)
}
