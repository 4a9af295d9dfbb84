use thiserror::Error;

/// Errors produced anywhere in the workbench.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("numerical divergence at step {step}: {detail}")]
    Divergence { step: usize, detail: String },

    #[error("rank cutoff exceeded: requested {requested} modes but numerical rank is {rank} (cutoff index {cutoff_index})")]
    Rank {
        requested: usize,
        rank: usize,
        cutoff_index: usize,
    },

    #[error("missing capability: {0}")]
    Capability(String),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("evaluation produced a non-finite value: {0}")]
    NonFinite(String),

    #[error("{path}: bad magic string (expected {expected:?})")]
    BadMagic { path: String, expected: &'static str },

    #[error("{path}: malformed header: {detail}")]
    Header { path: String, detail: String },

    #[error("{path}: truncated payload (wanted {wanted} bytes, got {got})")]
    Truncated {
        path: String,
        wanted: usize,
        got: usize,
    },

    #[error("{path}: checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    Checksum {
        path: String,
        stored: u64,
        computed: u64,
    },

    #[error("parse error at byte {offset}: {detail}")]
    Parse { offset: usize, detail: String },

    #[error("grid search failed, every point diverged:\n{outcomes}")]
    SearchFailure { outcomes: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse classification used by the CLI to pick an exit code.
    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::Divergence { .. } | Error::NonFinite(_) | Error::Numerical(_) => {
                ExitClass::Divergence
            }
            Error::Io { .. }
            | Error::BadMagic { .. }
            | Error::Header { .. }
            | Error::Truncated { .. }
            | Error::Checksum { .. }
            | Error::Parse { .. } => ExitClass::Io,
            _ => ExitClass::Validation,
        }
    }
}

/// Exit-code classes of the command-line interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Validation,
    Divergence,
    Io,
}

pub type Result<T> = std::result::Result<T, Error>;
