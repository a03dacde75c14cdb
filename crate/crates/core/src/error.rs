use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input (dimension mismatch, bad config field, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numeric error: {what} (achieved {achieved:e})")]
    Numeric { what: String, achieved: f64 },

    #[error("kernel evaluation failed at ({i}, {j}): {reason}")]
    KernelEval { i: usize, j: usize, reason: String },

    /// The sample vector has a component outside the column space of the Gram matrix.
    #[error("not representable at this sample: residual norm {residual:e}")]
    NotRepresentable { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(what: impl Into<String>, achieved: f64) -> Self {
        Error::Numeric {
            what: what.into(),
            achieved,
        }
    }
}
