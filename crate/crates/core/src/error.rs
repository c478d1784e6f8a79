//! Error type shared across the crate.

use thiserror::Error;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input rejected by a domain invariant (empty title, bad counts, ...).
    #[error("{0}")]
    Validation(String),

    /// An entity with the same identity already exists.
    #[error("{0}")]
    Conflict(String),

    /// A referenced study, domain, comparison or outcome does not exist.
    #[error("{0}")]
    NotFound(String),

    /// A set of values violates one of the flow-count equations.
    #[error("{0}")]
    Consistency(String),

    /// An operation that needs data was run on an empty input.
    #[error("{0}")]
    NoData(String),

    /// A file could not be parsed; carries positional context when known.
    #[error("{}", format_parse(message, *line, field.as_deref()))]
    Parse {
        message: String,
        line: Option<usize>,
        field: Option<String>,
    },

    /// The project file declares a schema version this build does not read.
    #[error("unsupported schema version {found} (this build reads version {expected})")]
    Version { found: u64, expected: u64 },

    /// Trim-and-fill failed to stabilise within the iteration budget.
    #[error("trim-and-fill did not converge after {iterations} iterations (last trim count {last_trimmed})")]
    NonConvergence {
        iterations: u32,
        last_trimmed: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_parse(message: &str, line: Option<usize>, field: Option<&str>) -> String {
    let mut out = String::from("parse error");
    if let Some(l) = line {
        out.push_str(&format!(" at line {l}"));
    }
    if let Some(f) = field {
        out.push_str(&format!(" in field `{f}`"));
    }
    out.push_str(": ");
    out.push_str(message);
    out
}

impl Error {
    /// Short machine-readable code used in CLI diagnostics (`error[<code>]: ...`).
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Conflict(_) => "conflict",
            Error::NotFound(_) => "not-found",
            Error::Consistency(_) => "consistency",
            Error::NoData(_) => "no-data",
            Error::Parse { .. } => "parse",
            Error::Version { .. } => "version",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
