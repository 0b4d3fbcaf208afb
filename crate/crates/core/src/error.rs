use alloc::string::String;
use core::fmt;

use crate::vertex::VertexId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A vertex that the graph oracle does not know.
    InvalidVertex(VertexId),
    /// Input that violates an operation's precondition.
    Domain(String),
    /// A word budget or exploration cap was exhausted before the answer stabilised.
    Budget(String),
    /// The exploration radius is too small for the question asked.
    Resolution(String),
    /// An amalgamation spec that violates its invariants.
    Spec(String),
    /// The requested operation is not available for this kind of input.
    Unsupported(String),
    /// Finiteness verdicts were unknown, so no definite answer exists.
    Indeterminate(String),
    /// An internal invariant failed; this is a bug.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidVertex(v) => write!(f, "invalid vertex {v}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Budget(m) => write!(f, "budget exhausted: {m}"),
            Error::Resolution(m) => write!(f, "resolution too small: {m}"),
            Error::Spec(m) => write!(f, "invalid amalgamation spec: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::Indeterminate(m) => write!(f, "indeterminate: {m}"),
            Error::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
