use std::path::PathBuf;

use crate::models::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column `{column}`: cannot parse {value:?} as a number")]
    UnparseableCell {
        line: u64,
        column: String,
        value: String,
    },

    #[error("line {line}, column `{column}`: missing value")]
    MissingValue { line: u64, column: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("arity mismatch: model expects {expected} features, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("feature index {index} out of range for {p} features")]
    FeatureOutOfRange { index: usize, p: usize },

    #[error(transparent)]
    Expression(#[from] ExprError),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature `{feature}` is categorical; {operation} supports numeric features only")]
    CategoricalUnsupported {
        feature: String,
        operation: &'static str,
    },

    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),

    #[error(
        "baseline loss is zero (perfect fit), so the importance ratio is undefined; \
         use the difference mode instead"
    )]
    PerfectFit,

    #[error(
        "exact Shapley values are limited to {cap} features (got {p}); \
         use the Monte-Carlo estimator instead"
    )]
    TooManyPlayers { p: usize, cap: usize },

    #[error("characteristic function must satisfy v(empty set) = 0, got {0}")]
    NonZeroEmptyCoalition(f64),

    #[error("all kernel weights are zero with sigma = {sigma}; increase the kernel width")]
    ZeroKernelWeight { sigma: f64 },

    #[error("singular linear system in ridge solve")]
    SingularSystem,

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
