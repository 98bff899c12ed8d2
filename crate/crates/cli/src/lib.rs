//! Configuration-driven driver for G-Strand runs: `simulate`, `verify`,
//! `series` and `ode`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{parse_config, parse_config_str, ConfigError, GroupKind, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gstrand", version, about = "Simulate and certify integrable G-Strand systems")]
pub struct Cli {
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Only print warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time-step the configured run and write diagnostics and snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the constraint rows and zero-curvature residuals.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated spectral parameters; overrides `lambdas`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        lambdas: Option<Vec<f64>>,
    },
    /// Compare Riccati densities of an so3 snapshot with their closed forms.
    Series {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        snapshot: PathBuf,
    },
    /// Simulate spatially uniform data on a one-point grid.
    Ode {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parse a config and apply command-line overrides. The result is
/// validated again so overrides get the same checks as the file.
pub fn load(path: &Path, out: Option<&Path>, lambdas: Option<&[f64]>, uniform: bool) -> Result<RunConfig, CliError> {
    let mut cfg = parse_config(path)?;
    if let Some(out) = out {
        cfg.output_dir = out.to_path_buf();
    }
    if let Some(l) = lambdas {
        cfg.lambdas = l.to_vec();
    }
    if uniform {
        cfg.grid.n = 1;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fmt_map(m: &std::collections::BTreeMap<String, f64>) -> String {
    m.iter().map(|(k, v)| format!("{k} {v:.3e}")).collect::<Vec<_>>().join(", ")
}

/// Run one command. Failing verdicts come back as
/// [`CliError::Verification`] after their report has been written.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };
    match &cli.command {
        Command::Simulate { config } | Command::Ode { config } => {
            let uniform = matches!(cli.command, Command::Ode { .. });
            let cfg = load(config, out, None, uniform)?;
            let s = commands::run_simulate(&cfg)?;
            say(format!("{} steps to t = {}; max drift: {}", s.steps, s.t_end, fmt_map(&s.max_drift)));
            say(format!(
                "constraints r4 {:.3e}, r3 {:.3e}, r2 {:.3e}; output in {}",
                s.max_constraints.r4,
                s.max_constraints.r3,
                s.max_constraints.r2,
                cfg.output_dir.display()
            ));
        }
        Command::Verify { config, lambdas } => {
            let cfg = load(config, out, lambdas.as_deref(), false)?;
            let r = commands::run_verify(&cfg)?;
            say(format!("{} samples; max zcr: {}", r.samples.len(), fmt_map(&r.max_zcr)));
            if let Some(first) = r.failures.first() {
                return Err(CliError::Verification(format!("{} ({} failures in total)", first.describe(), r.failures.len())));
            }
            say("verify: pass".to_string());
        }
        Command::Series { config, snapshot } => {
            let cfg = load(config, out, None, false)?;
            let r = commands::run_series(&cfg, snapshot)?;
            say(format!(
                "rho_m1 err {:.3e}, rho_0 err {:.3e}, integral errs: {}",
                r.rho_m1_pointwise_err,
                r.rho_0_pointwise_err,
                r.integrals.iter().map(|(k, c)| format!("{k} {:.3e}", c.abs_err)).collect::<Vec<_>>().join(", ")
            ));
            if let Some(first) = r.failures.first() {
                return Err(CliError::Verification(first.clone()));
            }
            say("series: pass".to_string());
        }
    }
    Ok(())
}
