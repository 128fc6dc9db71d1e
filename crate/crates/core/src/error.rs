use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("size limit exceeded: {what} exceeds cap {cap}")]
    SizeLimit { what: String, cap: usize },

    #[error("invalid multiplication table: {axiom} fails at {witness}")]
    InvalidTable { axiom: &'static str, witness: String },

    #[error("element {0} does not belong to the group")]
    NotAnElement(String),

    #[error("invalid character: {0}")]
    InvalidCharacter(String),

    #[error("not a semimetric norm: {0}")]
    NotASemimetric(String),

    #[error("margin undefined: the domain has no non-identity label")]
    UndefinedMargin,

    #[error("separation gap closed: margin {margin} <= 2r * defect = {bound}")]
    SeparationGap { margin: String, bound: String },

    #[error("separation precondition fails at word {word}: {detail}")]
    SeparationPrecondition { word: String, detail: String },

    #[error("wrong target: {0}")]
    WrongTarget(String),

    #[error("inapplicable: {0}")]
    Inapplicable(String),

    #[error("certificate refused: {0}")]
    CertificateRefused(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
