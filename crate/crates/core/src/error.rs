use thiserror::Error;

/// Errors raised by the bound library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument outside the domain of {function}: {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error(
        "backed-off budget is not positive: budget {budget} <= delta_B {delta_b} \
         (need B >= {min_blocks} for alpha = {alpha})"
    )]
    BudgetBackoff {
        budget: f64,
        delta_b: f64,
        alpha: f64,
        min_blocks: u64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
