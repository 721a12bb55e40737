use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("operator family mismatch: {0}")]
    FamilyMismatch(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("degenerate levels {m} and {n} (gap {gap:.3e}) with coupling {coupling:.3e}")]
    Degeneracy {
        m: usize,
        n: usize,
        gap: f64,
        coupling: f64,
    },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Contract(_) => "contract",
            Error::FamilyMismatch(_) => "family_mismatch",
            Error::Resource(_) => "resource",
            Error::Singular(_) => "singular",
            Error::Degenerate(_) => "degenerate_input",
            Error::Degeneracy { .. } => "degeneracy",
            Error::Range(_) => "range",
            Error::Integrator(_) => "integrator",
            Error::Config(_) => "config",
            Error::Schema(_) => "schema",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
