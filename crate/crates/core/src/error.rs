use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid level scheme: {0}")]
    InvalidScheme(String),

    #[error("unknown label `{label}` for {context}")]
    UnknownLabel { label: String, context: String },

    #[error("span is not orthonormal (max Gram residual {residual:.3e})")]
    NonOrthonormalSpan { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time {t} outside schedule domain [0, {end}]")]
    OutsideDomain { t: f64, end: f64 },

    #[error("finite-difference stencil at t = {t} with step {h} leaves the domain [0, {end}]")]
    StencilOutOfDomain { t: f64, h: f64, end: f64 },

    #[error("Hamiltonian domain ends at {domain_end} but evolution requested to {requested}")]
    PulseDomainTooShort { domain_end: f64, requested: f64 },

    #[error("subspace not invariant: operator `{operator}` maps basis index {from} to {to} outside the span")]
    SpanNotInvariant { operator: String, from: usize, to: usize },

    #[error("non-finite value encountered at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidScheme(_) => "invalid_scheme",
            Error::UnknownLabel { .. } => "unknown_label",
            Error::NonOrthonormalSpan { .. } => "non_orthonormal_span",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::OutsideDomain { .. } => "outside_domain",
            Error::StencilOutOfDomain { .. } => "stencil_out_of_domain",
            Error::PulseDomainTooShort { .. } => "pulse_domain_too_short",
            Error::SpanNotInvariant { .. } => "span_not_invariant",
            Error::NonFinite { .. } => "non_finite",
            Error::Eigen(_) => "eigen",
            Error::Config { .. } => "config",
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
