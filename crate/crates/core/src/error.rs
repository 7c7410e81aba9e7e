use thiserror::Error;

use crate::oracle::Discrepancy;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a model or grid constraint. `constraint` names it,
    /// e.g. `V_B > c`.
    #[error("violated constraint \"{constraint}\"")]
    Validation { constraint: String },

    /// The oracle enumeration would exceed the configured profile budget.
    #[error("profile enumeration of {profiles} profiles exceeds budget {budget}")]
    SizeGuard { profiles: u128, budget: u128 },

    /// The oracle disagreed with the closed-form verdict at one or more points.
    #[error("oracle disagrees with closed form at {} point(s)", .0.len())]
    Discrepancy(Vec<Discrepancy>),

    /// `boundary_trace` requires exactly two axes.
    #[error("boundary trace needs exactly 2 axes, got {0}")]
    AxisCount(usize),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(constraint: impl Into<String>) -> Self {
        Error::Validation {
            constraint: constraint.into(),
        }
    }
}
