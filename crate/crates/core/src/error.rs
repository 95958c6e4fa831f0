use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse network: {0}")]
    Parse(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("unknown activation tag {0:?}")]
    UnknownActivation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("neuron is not strictly active (M- = {m_minus}, M+ = {m_plus})")]
    NotStrictlyActive { m_minus: f64, m_plus: f64 },
    #[error("index set is not contained in the weight support: {0:?}")]
    SubsetNotInSupport(Vec<usize>),
    #[error("weight support too large for enumeration: {0} > {1}")]
    SupportTooLarge(usize, usize),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("LP solve failed: {0}")]
    Lp(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("certificate check failed: {0}")]
    Certificate(String),
    #[error("LP file: {0}")]
    LpFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
