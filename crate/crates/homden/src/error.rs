use thiserror::Error;

/// Unified error type for the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An evaluation would enumerate more terms than the configured cap allows.
    #[error("infeasible size: {terms} terms exceeds cap of {cap}")]
    InfeasibleSize { terms: u128, cap: u128 },

    /// Exact mode hit a fractional exponent and power-compatible roots were
    /// not enabled.
    #[error("fractional exponent {exponent} requires float mode or power-compatible exact mode")]
    FractionalExponent { exponent: String },

    /// Power-compatible exact mode needed an exact root that does not exist.
    #[error("{value} has no exact {degree}th root; input is not power-compatible")]
    NotAPower { value: String, degree: u64 },

    /// A weight vector failed the divisibility condition at degree `k`.
    #[error("weight at degree {k} must be divisible by {required}, got {value}")]
    Divisibility {
        k: usize,
        required: String,
        value: String,
    },

    /// The right vertex class is empty where a nonempty one is required.
    #[error("right vertex class is empty")]
    EmptyRightClass,

    /// A reflection group is larger than the enumeration cap permits.
    #[error("group order {order} exceeds cap of {cap}")]
    GroupTooLarge { order: u128, cap: u128 },

    /// Isomorphism search limits (class size or edge count) were exceeded.
    #[error("isomorphism search limit exceeded: {0}")]
    IsoLimit(String),

    /// A value failed structural validation.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            why: why.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
