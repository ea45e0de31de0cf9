use alloc::string::String;
use core::fmt;

/// Errors raised by the construction and checking routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: wrong shapes, non-finite entries, bad parameters.
    InvalidInput(String),
    /// A map was evaluated outside the region where it is defined.
    Domain(String),
    /// An operation was called on data that violates its precondition.
    Precondition(String),
    /// Two arrows were multiplied although the source of the first differs
    /// from the target of the second.
    Composability { residual: f64 },
    /// A name (family, mutation, suite) is not known to the registry.
    Unknown(String),
    /// A catalog example could not be built from the requested parameters.
    Construction(String),
    /// A bracket failed the Jacobi identity on a basis triple.
    Jacobi { triple: (usize, usize, usize), residual: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Composability { residual } => {
                write!(f, "arrows are not composable (source/target mismatch {residual:.3e})")
            }
            Error::Unknown(m) => write!(f, "unknown name: {m}"),
            Error::Construction(m) => write!(f, "construction failed: {m}"),
            Error::Jacobi { triple, residual } => write!(
                f,
                "Jacobi identity fails on basis triple ({}, {}, {}) with residual {residual:.3e}",
                triple.0, triple.1, triple.2
            ),
        }
    }
}

impl core::error::Error for Error {}
