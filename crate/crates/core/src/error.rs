use crate::path_model::Violation;
use crate::rational::Q;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {}", join(.0))]
    InvalidInstance(Vec<Violation>),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("point {0} lies outside the path")]
    PointOutsidePath(Q),
    #[error("{0}")]
    Precondition(String),
    #[error("argument {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: String, lo: String, hi: String },
    #[error("function is not positive: {0}")]
    NotPositive(String),
    #[error("slopes are not strictly increasing: {0}")]
    NotConvex(String),
    #[error("domains do not overlap")]
    DisjointDomains,
    #[error("empty input: {0}")]
    Empty(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("simulation exceeded the time cap {0}")]
    TimeCap(Q),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
