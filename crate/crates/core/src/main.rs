use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context as _};
use clap::{Parser, Subcommand};
use levyhom::cli::{self, Command, Context, StudyConfig};

/// Fiber, threshold and resolvent-rate verification for periodic
/// Lévy-type operators.
#[derive(Parser, Debug)]
#[command(name = "levyhom", version)]
struct Args {
    /// JSON study configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides "output" in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Mode truncation N (overrides the config).
    #[arg(long, global = true)]
    truncation: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Certify the coefficient and print the derived constants.
    Validate,
    /// Print c0, mu_eff, d0, delta0 and cross-check c0 by quadrature.
    Constants,
    /// Write the fiber matrix at each quasimomentum as CSV.
    Fiber {
        /// Comma-separated quasimomentum components; repeat for several.
        #[arg(long, required = true, allow_hyphen_values = true)]
        xi: Vec<String>,
    },
    /// Threshold sweep with slope verdicts.
    Thresholds,
    /// Resolvent discrepancy rate study.
    RateStudy,
    /// Closed-form fiber entries and c0 against quadrature (d = 1).
    OracleCheck,
}

fn parse_xi(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad quasimomentum component {s:?}"))
        })
        .collect()
}

fn prepare(args: Args) -> anyhow::Result<(Command, Context)> {
    let Some(path) = args.config else {
        bail!("--config is required");
    };
    let config = StudyConfig::load(&path).with_context(|| format!("reading {}", path.display()))?;
    let command = match args.command {
        Cmd::Validate => Command::Validate,
        Cmd::Constants => Command::Constants,
        Cmd::Fiber { xi } => Command::Fiber {
            xi: xi.iter().map(|s| parse_xi(s)).collect::<anyhow::Result<_>>()?,
        },
        Cmd::Thresholds => Command::Thresholds,
        Cmd::RateStudy => Command::RateStudy,
        Cmd::OracleCheck => Command::OracleCheck,
    };
    let ctx = Context::new(config, args.out, args.workers, args.truncation)?;
    Ok((command, ctx))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LEVYHOM_LOG", "warn")).init();
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() {
                cli::EXIT_USAGE
            } else {
                cli::EXIT_PASS
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match prepare(args) {
        Ok((command, ctx)) => ExitCode::from(cli::run(&command, &ctx) as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(cli::EXIT_USAGE as u8)
        }
    }
}
