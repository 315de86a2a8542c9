use thiserror::Error;

/// Errors raised anywhere in the model stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    /// An argument lies outside the domain of the formula it feeds.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A parameter set violates an economic validity constraint.
    #[error("invalid parameter `{field}`: {detail}")]
    InvalidParameter { field: String, detail: String },

    /// Observed data that cannot be reconciled with the model (e.g. a negative inflow rate).
    #[error("data error in {op}: {detail}")]
    Data { op: &'static str, detail: String },

    /// The equilibrium solver exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations (best residual {best_residual:.3e})")]
    NoConvergence {
        iterations: usize,
        best_residual: f64,
        best_iterate: Option<Box<crate::equilibrium::UnknownVector>>,
    },

    /// Employment collapsed in one skill market so prices are undefined.
    #[error("degenerate economy: {0}")]
    DegenerateEconomy(String),

    /// The solution sits at the tightness clamp.
    #[error("tightness hit the solver bound in the {market} market (theta = {theta:e})")]
    BoundaryHit { market: &'static str, theta: f64 },

    /// Every multi-start of the estimator failed.
    #[error("all {starts} estimation starts failed")]
    AllStartsFailed { starts: usize },
}

impl ModelError {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            ModelError::Domain { .. } => "domain",
            ModelError::InvalidParameter { .. } => "invalid_parameter",
            ModelError::Data { .. } => "data",
            ModelError::NoConvergence { .. } => "no_convergence",
            ModelError::DegenerateEconomy(_) => "degenerate_economy",
            ModelError::BoundaryHit { .. } => "boundary_hit",
            ModelError::AllStartsFailed { .. } => "all_starts_failed",
        }
    }

    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        ModelError::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(field: impl Into<String>, detail: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            field: field.into(),
            detail: detail.into(),
        }
    }
}

/// Errors from file ingestion and report writing.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("row {row}: field `{field}` has a unit mismatch: {detail}")]
    UnitMismatch {
        row: usize,
        field: String,
        detail: String,
    },

    #[error("row {row}: field `{field}` out of range: {detail}")]
    RangeViolation {
        row: usize,
        field: String,
        detail: String,
    },

    #[error("row {row}: field `{field}` is not a number: `{value}`")]
    Parse {
        row: usize,
        field: String,
        value: String,
    },

    #[error("schema version `{found}` not supported (expected `{expected}`)")]
    SchemaVersion { found: String, expected: String },

    #[error("{} validation errors: {}", .0.len(), join_errors(.0))]
    Invalid(Vec<IoError>),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Model(#[from] ModelError),
}

fn join_errors(errs: &[IoError]) -> String {
    errs.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl IoError {
    pub fn kind(&self) -> &'static str {
        match self {
            IoError::MissingField(_) => "missing_field",
            IoError::UnitMismatch { .. } => "unit_mismatch",
            IoError::RangeViolation { .. } => "range_violation",
            IoError::Parse { .. } => "parse",
            IoError::SchemaVersion { .. } => "schema_version",
            IoError::Invalid(_) => "invalid",
            IoError::Csv(_) => "csv",
            IoError::Json(_) => "json",
            IoError::Io(_) => "io",
            IoError::Model(e) => e.kind(),
        }
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
