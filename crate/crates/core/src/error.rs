use alloc::string::String;
use core::fmt;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An index was outside `0..len`.
    IndexOutOfBounds { index: usize, len: usize },
    /// Two collections that must have equal length did not.
    LengthMismatch { expected: usize, found: usize },
    /// Value or array shapes are incompatible for the requested operation.
    Shape(String),
    /// A matrix with `|det| <= 1e-14 * max|a_ij|` was inverted.
    SingularMatrix { det: f64 },
    /// The change-of-basis matrix of a reference element is singular.
    IllPosedElement(String),
    /// Topology, order, degree or operation not supported.
    Unsupported(String),
    /// A tag was not found in the model labels.
    UnknownTag(String),
    /// Cell data defined on unrelated triangulations were combined.
    IncompatibleTriangulations,
    /// Malformed mesh data.
    InvalidMesh(String),
    /// Invalid block position in an [`ArrayBlock`](crate::blocks::ArrayBlock).
    BlockPosition(String),
    /// A matrix was reassembled with a plan it was not created from.
    ForeignMatrix,
    /// A Krylov solver broke down.
    Breakdown(String),
    /// Invalid argument.
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfBounds { index, len } => {
                write!(f, "index {index} out of bounds for length {len}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::SingularMatrix { det } => write!(f, "singular matrix (det = {det:e})"),
            Error::IllPosedElement(msg) => write!(f, "ill-posed reference element: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::UnknownTag(tag) => write!(f, "unknown tag \"{tag}\""),
            Error::IncompatibleTriangulations => write!(f, "incompatible triangulations"),
            Error::InvalidMesh(msg) => write!(f, "invalid mesh: {msg}"),
            Error::BlockPosition(msg) => write!(f, "invalid block position: {msg}"),
            Error::ForeignMatrix => write!(f, "matrix was not created by this assembly plan"),
            Error::Breakdown(msg) => write!(f, "solver breakdown: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
