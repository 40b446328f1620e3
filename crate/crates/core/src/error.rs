use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("target {y} outside [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
    #[error("function is not monotone: {0}")]
    NotMonotone(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("singular interpolant between {x} and {y}")]
    SingularInterpolant { x: f64, y: f64 },
    #[error("degenerate node t = {0}")]
    DegenerateNode(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
