//! Configuration ingestion, command dispatch and report emission.
//!
//! Exit codes: 0 when every check passes, 1 for usage and I/O problems,
//! 2 when a verification fails.

pub mod commands;
pub mod config;
pub mod csv;
pub mod report;

use std::path::Path;

pub use commands::Context;
pub use config::StudyConfig;
pub use report::{RunReport, Status, Verdict};

use crate::error::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Validate,
    Constants,
    Fiber { xi: Vec<Vec<f64>> },
    Thresholds,
    RateStudy,
    OracleCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Constants => "constants",
            Command::Fiber { .. } => "fiber",
            Command::Thresholds => "thresholds",
            Command::RateStudy => "rate-study",
            Command::OracleCheck => "oracle-check",
        }
    }
}

/// Usage and I/O problems map to 1, everything else is a verification
/// failure.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidParameter(_) | Error::TruncationTooSmall { .. } | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

pub fn execute(command: &Command, ctx: &Context) -> crate::Result<RunReport> {
    match command {
        Command::Validate => commands::validate(ctx),
        Command::Constants => commands::constants(ctx),
        Command::Fiber { xi } => commands::fiber(ctx, xi),
        Command::Thresholds => commands::thresholds(ctx),
        Command::RateStudy => commands::rate_study(ctx),
        Command::OracleCheck => commands::oracle_check(ctx),
    }
}

/// Runs `command`, prints the verdicts, writes the report when an output
/// directory is known and returns the exit code. Verification errors are
/// turned into a failing report.
pub fn run(command: &Command, ctx: &Context) -> i32 {
    let mut report = match execute(command, ctx) {
        Ok(report) => report,
        Err(e) if exit_code(&e) == EXIT_USAGE => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            let mut report = RunReport::new(command.name(), &ctx.digest);
            report.fail("run", e.to_string());
            report
        }
    };
    report.finish();
    print!("{}", report.render());
    if let Some(dir) = ctx.out_dir.as_deref() {
        if let Err(e) = write_report(&mut report, dir) {
            eprintln!("error: cannot write report: {e}");
            return EXIT_USAGE;
        }
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAILURE
    }
}

fn write_report(report: &mut RunReport, dir: &Path) -> crate::Result<()> {
    std::fs::create_dir_all(dir)?;
    report.write(dir)?;
    Ok(())
}
