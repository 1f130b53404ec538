use thiserror::Error;

/// Errors raised by the model, the numerical routines and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("species {species} is not viable (basic reproduction number {n} <= 1)")]
    NotViable { species: usize, n: f64 },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invasion criterion not satisfied: Gamma(F*) = {value}")]
    CriterionFailed { value: f64 },

    #[error(
        "monotone iteration did not converge after {sweeps} sweeps (last changes: {history:?})"
    )]
    NonConvergence { sweeps: usize, history: Vec<f64> },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("missing config key `{0}`")]
    MissingKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::MissingKey(_) | Error::Usage(_) | Error::Io(_) => 2,
            Error::InvalidParameter { .. } => 2,
            Error::CriterionFailed { .. } => 4,
            _ => 3,
        }
    }
}
