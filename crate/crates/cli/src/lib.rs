//! Command-line front end for `histories-core`.
//!
//! Every subcommand writes a JSON [`report::Report`]. Exit status is 0 when
//! all checks pass, 1 when a check fails and 2 for usage or input errors.

#![forbid(unsafe_code)]

pub mod args;
pub mod commands;
pub mod error;
pub mod files;
pub mod report;

use args::{Cli, Command};
pub use error::CliError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Runs one parsed invocation and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let (result, out) = match &cli.command {
        Command::Canonical(a) => (commands::canonical(a), &a.out),
        Command::Noncontext(a) => (commands::noncontext(a), &a.out),
        Command::Consistency(a) => (commands::consistency(a), &a.out),
        Command::Spectral(a) => (commands::spectral(a), &a.out),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Err(e) = report::write_output(out, &report.to_json()) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    if report.passed() {
        EXIT_PASS
    } else {
        for c in report.failures() {
            let value = c.value.map_or("none".to_string(), |v| format!("{v:e}"));
            let relation = match c.relation {
                report::Relation::AtMost => "<=",
                report::Relation::Above => ">",
            };
            eprintln!(
                "check failed: {} = {value} (required {relation} {:e})",
                c.name, c.tolerance
            );
        }
        EXIT_CHECK_FAILED
    }
}
