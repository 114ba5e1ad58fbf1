use thiserror::Error;

/// Errors raised while loading and validating market data.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse instance: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unit `{unit}`: invalid `{field}`: {reason}")]
    InvalidUnit {
        unit: String,
        field: &'static str,
        reason: String,
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("schedule for unit `{unit}` is outside its feasible set: {reason}")]
    InfeasibleSchedule { unit: String, reason: String },
}

/// Errors raised by the centralized dispatch solver.
#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("no commitment profile covers the demand")]
    Infeasible,
    #[error("{profiles} commitment profiles exceed the enumeration limit of {limit}")]
    EnumerationLimit { profiles: u128, limit: u64 },
}

/// Errors raised by pricing, uplift, amendment and redundant-constraint operations.
#[derive(Debug, Error)]
pub enum AmendError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("status vector {0:?} is not feasible for the unit")]
    InfeasibleStatus(Vec<u8>),
    #[error("multiplier vector must be non-negative with one entry per constraint (got {0:?})")]
    BadMultipliers(Vec<f64>),
    #[error(
        "constraint {index} is positive ({value}) at a feasible point, so it is not redundant"
    )]
    NotRedundant { index: usize, value: f64 },
    #[error("constraint {index} vanishes on the whole feasible set")]
    EmptySupport { index: usize },
    #[error("gamma is negative ({value}) at a feasible point")]
    NegativeGamma { value: f64 },
    #[error("marginal-pricing precondition violated: dispatched profit {pi_star} differs from the best profit {pi_status_max} at the dispatched status")]
    MarginalPricingPrecondition { pi_star: f64, pi_status_max: f64 },
    #[error(
        "closed-form amendment requires a single-period market with an initially offline unit: {0}"
    )]
    SettingViolated(String),
    #[error("construction not supported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal consistency error: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),
}
