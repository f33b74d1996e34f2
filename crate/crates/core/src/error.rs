use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An integrand or formula produced a non-finite value.
    #[error("non-finite value {value} at abscissa {abscissa}")]
    NumericDomain { abscissa: f64, value: f64 },

    /// A Gram entry could not be computed; carries the zero-based entry indices.
    #[error("gram entry ({row}, {col}): {source}")]
    GramEntry {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate problem: {0}")]
    DegenerateProblem(String),

    #[error("symmetric eigensolver did not converge for a {0}x{0} matrix")]
    EigenNonConvergence(usize),

    #[error("L-curve has {usable} usable points, at least 3 are required")]
    InsufficientCurve { usable: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by numerics rather than by bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::InvalidArgument(_) => false,
            Error::GramEntry { source, .. } => source.is_numeric(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
