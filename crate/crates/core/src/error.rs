use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An index or coordinate outside its valid range.
    #[error("{what} = {value} out of range (must be < {bound})")]
    Range {
        what: &'static str,
        value: u64,
        bound: u64,
    },

    /// A numeric parameter violates its precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested dimension exceeds what an exact routine can handle.
    #[error("{routine} requires d <= {cap}, got d = {dim}")]
    Capability {
        routine: &'static str,
        dim: usize,
        cap: usize,
    },

    /// Caller-side misuse, e.g. mixing objects of different dimensions.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative routine failed to reach its target accuracy.
    #[error("numerical failure in {routine}: {detail} (residual {residual:e})")]
    Numerical {
        routine: &'static str,
        detail: String,
        residual: f64,
    },
}

impl Error {
    pub(crate) fn capability(routine: &'static str, dim: usize, cap: usize) -> Self {
        Error::Capability { routine, dim, cap }
    }

    pub(crate) fn check_cap(routine: &'static str, dim: usize, cap: usize) -> Result<()> {
        if dim > cap {
            Err(Self::capability(routine, dim, cap))
        } else {
            Ok(())
        }
    }
}
