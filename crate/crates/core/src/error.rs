use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("non-ordinary input: {0}")]
    NonOrdinary(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("truncation profiles do not match")]
    ProfileMismatch,
    #[error("division by an element that vanishes at effective precision")]
    ZeroDivisor,
    #[error("truncation degree too small: {0}")]
    TruncationTooSmall(String),
    #[error("unsupported character: {0}")]
    UnsupportedCharacter(String),
    #[error("module is not torsion")]
    NotTorsion,
    #[error("not computable: {0}")]
    NotComputable(String),
    #[error("module fails the M_H(G) test: {0}")]
    NotInMH(String),
    #[error("action matrices do not commute")]
    NonCommutingAction,
    #[error("infinite cohomology: {0}")]
    InfiniteCohomology(String),
    #[error("no characteristic element available")]
    MissingCh,
    #[error("no Frobenius value for place {0}")]
    MissingFrobenius(String),
    #[error("twist matrix is not invertible modulo p")]
    SingularTwist,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("malformed local datum: {0}")]
    MalformedLocal(String),
    #[error("incompatible configuration: {0}")]
    IncompatibleConfiguration(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
