use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point is not in the requested regime: {0}")]
    NoRegime(String),
    #[error("paper-strict mode violations:\n{}", .0.join("\n"))]
    StrictMode(Vec<String>),
    #[error("grid under-resolution: {0}")]
    UnderResolved(String),
    #[error("non-integer period count: {0}")]
    Periodization(String),
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("matrix argument left the certified ball: {0}")]
    BallViolation(String),
    #[error("operation not defined in this regime: {0}")]
    Regime(String),
    #[error("degenerate span: {0}")]
    DegenerateSpan(String),
    #[error("no strictly positive kernel vector: {0}")]
    NoPositiveKernel(String),
    #[error("coverage gap in gluing: {0}")]
    CoverageGap(String),
    #[error("solver blow-up guard tripped: {0}")]
    BlowUp(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad field dump: {0}")]
    BadDump(String),
}

pub type Result<T> = std::result::Result<T, Error>;
