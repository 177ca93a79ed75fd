use std::fmt;

/// Crate-wide error type.
///
/// Variants are grouped by the layer that raises them: data/shape errors,
/// numerical failures, and file I/O. The CLI maps these groups onto exit
/// codes (data = 3, numerical = 4, I/O = 5).
#[derive(Debug)]
pub enum Error {
    /// Matrix shapes are incompatible for the requested operation.
    ShapeMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },
    /// Requested rank exceeds what the input supports.
    RankTooLarge { k: usize, limit: usize },
    /// A Cholesky-style pivot was non-positive; the system is not positive
    /// definite (usually a sign of missing regularization).
    NotPositiveDefinite { pivot: f64, index: usize },
    /// An iterative kernel did not reach its tolerance within its sweep cap.
    ConvergenceFailure { what: &'static str, residual: f64 },
    /// A diagonalized Sylvester-type operator has a zero (or near-zero) divisor.
    SingularOperator { divisor: f64 },
    /// Input matrix is expected symmetric but is not (beyond tolerance).
    NotSymmetric { deviation: f64 },
    /// A factor column has vanishing norm, so gauge normalization is undefined.
    ZeroColumn { index: usize },
    /// The reference matrix of a relative metric has zero norm.
    ZeroMatrix,
    /// A mask argument selects no entries.
    EmptyMask,
    /// Unknown paper-example identifier.
    UnknownExample(String),
    /// A matrix or config file could not be parsed.
    ParseError { path: String, line: usize, msg: String },
    /// Parsed dimensions do not match the data.
    DimensionMismatch { path: String, msg: String },
    /// A non-finite value (NaN/Inf) was found where a real number is required.
    NonFiniteEntry { context: String },
    /// Underlying file I/O failure.
    Io { path: String, source: std::io::Error },
    /// A solver error, annotated with the outer iteration it occurred in.
    Solver { iteration: usize, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, expected, found } => {
                write!(f, "{op}: shape mismatch (expected {expected}, found {found})")
            }
            Error::RankTooLarge { k, limit } => {
                write!(f, "rank {k} too large (limit {limit})")
            }
            Error::NotPositiveDefinite { pivot, index } => {
                write!(f, "matrix not positive definite (pivot {pivot:.3e} at index {index})")
            }
            Error::ConvergenceFailure { what, residual } => {
                write!(f, "{what} failed to converge (residual {residual:.3e})")
            }
            Error::SingularOperator { divisor } => {
                write!(f, "singular operator in diagonalized solve (divisor {divisor:.3e})")
            }
            Error::NotSymmetric { deviation } => {
                write!(f, "matrix not symmetric (relative deviation {deviation:.3e})")
            }
            Error::ZeroColumn { index } => {
                write!(f, "factor column {index} has zero norm")
            }
            Error::ZeroMatrix => write!(f, "reference matrix has zero Frobenius norm"),
            Error::EmptyMask => write!(f, "mask selects no entries"),
            Error::UnknownExample(id) => write!(f, "unknown paper example id: {id}"),
            Error::ParseError { path, line, msg } => {
                write!(f, "{path}:{line}: parse error: {msg}")
            }
            Error::DimensionMismatch { path, msg } => {
                write!(f, "{path}: dimension mismatch: {msg}")
            }
            Error::NonFiniteEntry { context } => {
                write!(f, "non-finite entry: {context}")
            }
            Error::Io { path, source } => write!(f, "{path}: {source}"),
            Error::Solver { iteration, source } => {
                write!(f, "solver failed at iteration {iteration}: {source}")
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            Error::Solver { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Attach an outer-iteration index to a solver-internal error.
    pub fn at_iteration(self, iteration: usize) -> Error {
        Error::Solver { iteration, source: Box::new(self) }
    }
}
