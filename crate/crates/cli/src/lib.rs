//! Command-line front end: theory files, the audit suite and the `gns` and
//! `transpose` commands.

pub mod audit;
pub mod commands;
pub mod file;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::CommandError;
use crate::report::render_json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "optaudit", version, about = "Audit finite-dimensional operational probabilistic theories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Theory file (JSON).
    pub file: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit JSON instead of aligned text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the audit suite.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Tolerance for every deviation check.
        #[arg(long)]
        tol: Option<f64>,
        /// Comma-separated check id prefixes to run.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Bilinear form, involution, Gram spectrum and adjoint spot checks.
    Gns {
        #[command(flatten)]
        common: Common,
        /// Joint state coordinates as a JSON array, or @file.
        #[arg(long)]
        state: Option<String>,
    },
    /// Coordinates of the transpose of a transformation.
    Transpose {
        #[command(flatten)]
        common: Common,
        /// `"identity"`, `{"matrix": [[..]]}` or `{"kraus": [..]}`, inline or @file.
        #[arg(long = "map")]
        map: String,
        /// Joint state coordinates as a JSON array, or @file.
        #[arg(long)]
        state: Option<String>,
    },
}

fn text_value(v: &serde_json::Value) -> String {
    let mut out = String::new();
    if let serde_json::Value::Object(m) = v {
        let width = m.keys().map(|k| k.len()).max().unwrap_or(0);
        for (k, v) in m {
            let rendered = match v {
                serde_json::Value::String(s) => s.clone(),
                other => serde_json::to_string(other).expect("value serializes"),
            };
            out.push_str(&format!("{k:<width$}  {rendered}\n"));
        }
    }
    out
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let common = match &cli.command {
        Command::Audit { common, .. } | Command::Gns { common, .. } | Command::Transpose { common, .. } => common,
    };
    let loaded = match file::read(&common.file) {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let result: Result<(String, i32), CommandError> = match &cli.command {
        Command::Audit { tol, checks, .. } => {
            let options = audit::AuditOptions {
                seed: common.seed,
                tol: *tol,
                checks: checks.clone(),
            };
            let report = audit::run(&loaded, &options);
            let code = if report.has_errors() { EXIT_NUMERICAL } else { EXIT_OK };
            let text = if common.json {
                render_json(&report.to_json())
            } else {
                report.to_text()
            };
            Ok((text, code))
        }
        Command::Gns { state, .. } => commands::faithful_state(&loaded, state.as_deref())
            .and_then(|phi| commands::gns_report(&loaded, &phi, common.seed))
            .map(|v| (if common.json { render_json(&v) } else { text_value(&v) }, EXIT_OK)),
        Command::Transpose { map, state, .. } => commands::faithful_state(&loaded, state.as_deref())
            .and_then(|phi| {
                let a = commands::parse_transformation(&loaded, &commands::json_argument(map)?)?;
                commands::transpose_report(&loaded, &phi, &a)
            })
            .map(|v| (if common.json { render_json(&v) } else { text_value(&v) }, EXIT_OK)),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(CommandError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(CommandError::Numerical(m)) => {
            let _ = writeln!(err, "numerical failure: {m}");
            EXIT_NUMERICAL
        }
    }
}
