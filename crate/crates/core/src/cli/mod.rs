//! Command-line front end: parameter grids in, CSV or JSON rows out.
//!
//! Exit codes: 0 success, 1 usage, 2 domain error at some grid point (that
//! row is written as NaN and the run continues), 3 mode sum not converged.

pub mod config;
pub mod run;

use std::ffi::OsString;
use std::io::Write;

pub use config::{parse_args, CommandKind, Format, ParseOutcome, RangeSpec, ScanConfig};
pub use run::{columns, run, RunOutput};

use crate::exec::Execution;

/// Parses, runs and writes output; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(cfg) => cfg,
        Err(ParseOutcome::Info(text)) => {
            print!("{text}");
            return 0;
        }
        Err(ParseOutcome::Usage(text)) => {
            eprint!("{text}");
            if !text.ends_with('\n') {
                eprintln!();
            }
            return 1;
        }
    };
    let out = run(&cfg, Execution::default());
    for d in &out.diagnostics {
        eprintln!("casimir: {d}");
    }
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &out.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(out.text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("casimir: {msg}");
        return 1;
    }
    out.exit_code
}
