use alloc::boxed::Box;
use alloc::string::String;
use chrono::NaiveDate;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot align instrument `{instrument}`: no observation on or before {date}")]
    Alignment { instrument: String, date: NaiveDate },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("SMO did not converge after {iterations} iterations (max KKT violation {max_violation:.3e})")]
    NonConvergence {
        iterations: usize,
        max_violation: f64,
    },

    #[error("training diverged at epoch {epoch} (non-finite loss); try a smaller learning rate")]
    Divergence { epoch: usize },

    #[error("window assembly failed: {reason} (first usable date {first_usable:?})")]
    WindowAssembly {
        reason: String,
        first_usable: Option<NaiveDate>,
    },

    #[error("iteration {iteration}: {source}")]
    Window {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Wraps the error with the backtest iteration it came from.
    pub fn in_iteration(self, iteration: usize) -> Self {
        Error::Window {
            iteration,
            source: Box::new(self),
        }
    }
}
