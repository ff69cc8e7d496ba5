mod commands;
mod config;
mod exit;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Gap functional, Dirichlet-sum oracle and zero statistics for small gaps
/// between zeros of the Riemann zeta function.
#[derive(Debug, Parser)]
#[command(name = "resgap", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Values given here override the config file.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat key=value file; keys are the long flag names without dashes.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// json, csv or human.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads (falls back to RESGAP_THREADS, then to all cores).
    #[arg(long)]
    pub threads: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate G(phi, ell, f) and its three terms.
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<String>,
        /// Coefficients c_0,c_1,... of f(x) = c_0 + c_1 x + ...
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Find the smallest certified phi for fixed (ell, f).
    Minimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        /// Scan range lo:hi.
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        step: Option<String>,
        #[arg(long = "tol-phi")]
        tol_phi: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Nelder-Mead search over ell and the coefficients of f.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        degree: Option<String>,
        #[arg(long = "ell-range")]
        ell_range: Option<String>,
        /// Box lo:hi applied to every coefficient c_1..c_d.
        #[arg(long = "coeff-range", allow_hyphen_values = true)]
        coeff_range: Option<String>,
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        step: Option<String>,
        #[arg(long)]
        budget: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        starts: Option<String>,
        /// First start as ell,c_1,...,c_d.
        #[arg(long, allow_hyphen_values = true)]
        initial: Option<String>,
        #[arg(long = "tol-phi")]
        tol_phi: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Exact finite Dirichlet sums against the asymptotic integral formula.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Resonator length, or a comma list of increasing lengths for a convergence study.
        #[arg(long = "L")]
        l: Option<String>,
        /// Explicit height (single L only); otherwise L = T/(log T)^2 is solved for T.
        #[arg(long = "T")]
        t: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Statistics of tabulated zero ordinates.
    Zeros {
        #[command(subcommand)]
        command: ZerosCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ZerosCommand {
    /// Normalized gaps and sup(N_h^2 - N_h) over a window.
    Stats {
        #[command(flatten)]
        common: Common,
        /// One ordinate per line; '#' lines are ignored.
        #[arg(long)]
        file: Option<String>,
        /// Read only the first N ordinates.
        #[arg(long)]
        limit: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        /// lo:hi; defaults to the whole table.
        #[arg(long)]
        window: Option<String>,
        #[arg(long = "bin-width")]
        bin_width: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::USAGE),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("resgap: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
