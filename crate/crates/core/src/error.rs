use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A rescaled abscissa or position fell outside `[-1, 1]`.
    #[error("value {value} outside the domain [-1, 1]")]
    Domain { value: f64 },

    #[error("position {theta} rad outside the fitted property range [{lo}, {hi}]")]
    Range { theta: f64, lo: f64, hi: f64 },

    #[error("invalid motion task: {0}")]
    InvalidTask(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("derivative order {0} unsupported (maximum is 3)")]
    UnsupportedOrder(usize),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("friction coefficient is unidentifiable: {0}")]
    Unidentifiable(String),

    #[error("oracle refused the context: {0}")]
    Refused(String),

    #[error("internal numerical failure: {0}")]
    Internal(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable category, also used for CLI exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain { .. } | Error::Range { .. } => "domain",
            Error::InvalidTask(_) | Error::Dimension { .. } | Error::UnsupportedOrder(_) | Error::Invalid(_) => {
                "invalid"
            }
            Error::Fit(_) | Error::Unidentifiable(_) => "fit",
            Error::Refused(_) => "refused",
            Error::Internal(_) => "internal",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "parse" => 2,
            "config" => 3,
            "invalid" => 4,
            "domain" => 5,
            "fit" => 6,
            "refused" => 7,
            "io" => 8,
            _ => 10,
        }
    }
}
