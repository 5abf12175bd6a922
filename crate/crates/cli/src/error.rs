use std::path::PathBuf;

use thiserror::Error;

/// Everything that can stop a run, grouped by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// The scenario text is not valid TOML or does not match the schema.
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    /// Schema error after overrides were merged; no file position applies.
    #[error("{source_name} (with overrides): {message}")]
    Schema {
        source_name: String,
        message: String,
    },
    /// A `--set key=value` argument is malformed.
    #[error("bad override `{arg}`: {message}")]
    Override { arg: String, message: String },
    /// A value parses but is physically meaningless.
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
    /// Some sweep points failed; the others were written.
    #[error("{failed} of {total} sweep points failed")]
    PointsFailed { failed: usize, total: usize },
    #[error("numeric error: {0}")]
    Engine(#[from] outage_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize output: {0}")]
    Serialize(String),
}

impl CliError {
    /// Process exit status: 2 for unparseable input, 3 for invalid physics,
    /// 4 for a partially failed sweep, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Schema { .. } | CliError::Override { .. } => 2,
            CliError::Invalid { .. } => 3,
            CliError::PointsFailed { .. } => 4,
            CliError::Engine(_) | CliError::Io { .. } | CliError::Serialize(_) => 1,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}
