//! Scenario-driven runner for the outage engines.
//!
//! A run reads a TOML scenario, applies command-line overrides, evaluates
//! the closed form and/or Monte Carlo over an axis, and writes a CSV (or
//! JSON) table plus a `<out>.meta.toml` sidecar. The sidecar is a complete
//! scenario: running the same command on it reproduces every cell.

pub mod error;
pub mod report;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

pub use error::CliError;
pub use report::{format_number, run, Command, Report};
pub use scenario::{Format, Override, Scenario};

/// Environment variable capping the number of Monte Carlo worker threads.
pub const THREADS_ENV: &str = "RELAY_OUTAGE_THREADS";

/// Result of [`execute`]: the report and where its files went.
#[derive(Debug)]
pub struct Execution {
    pub report: Report,
    /// Output file, or `None` when the body went to stdout.
    pub out_path: Option<PathBuf>,
    /// Rendered body (CSV or JSON).
    pub body: String,
}

/// Path of the metadata sidecar for output `out`.
pub fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.toml");
    PathBuf::from(name)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads `scenario_path`, runs `command` and writes the outputs. Overrides
/// are applied in order after the file, so later ones win.
pub fn execute(
    command: Command,
    scenario_path: &Path,
    overrides: &[Override],
) -> Result<Execution, CliError> {
    let text = fs::read_to_string(scenario_path).map_err(|source| CliError::Io {
        path: scenario_path.to_path_buf(),
        source,
    })?;
    let scenario = Scenario::parse(&text, &scenario_path.display().to_string(), overrides)?;
    let report = run(command, &scenario)?;
    let body = match scenario.output.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()?,
    };
    let out_path = scenario.output.path.as_ref().map(PathBuf::from);
    if let Some(path) = &out_path {
        write(path, &body)?;
        write(&metadata_path(path), &report.metadata_file())?;
    }
    Ok(Execution {
        report,
        out_path,
        body,
    })
}
