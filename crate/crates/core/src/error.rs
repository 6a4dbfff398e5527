use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments or data that violate an operation's precondition.
    #[error("input error: {0}")]
    Input(String),

    /// A parse failure tied to a specific line of an input file (1-based).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Something does not fit: a machine's space budget, a job larger than
    /// `s/3`, or an oracle asked to go beyond its dense cap.
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("unsupported metric {metric} for {operation}")]
    UnsupportedMetric {
        metric: crate::Metric,
        operation: &'static str,
    },

    #[error("{module}: {source}")]
    Context {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    /// Wraps the error with the name of the module it surfaced from.
    pub fn context(self, module: &'static str) -> Self {
        Error::Context {
            module,
            source: Box::new(self),
        }
    }

    /// Process exit code used by the `slc` binary: 2 for input problems,
    /// 3 for capacity problems. Verification failures (exit 1) are not
    /// errors and are decided by the caller.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 3,
            Error::Context { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
