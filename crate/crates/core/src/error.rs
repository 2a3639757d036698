//! Crate-wide error type.
//!
//! Variants are grouped by how a caller should react: validation problems
//! (bad input files, schema violations, malformed configs) versus runtime or
//! numeric failures (singular systems, corrupt artifacts). The CLI maps the
//! two groups to distinct exit codes via [`Error::exit_code`].

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {detail}")]
    Csv { path: PathBuf, detail: String },

    #[error("column {column:?} is required by the schema but absent from the input")]
    MissingColumn { column: String },

    #[error("column {column:?} is not declared in the schema")]
    UnknownColumn { column: String },

    #[error("cannot parse cell at row {row}, column {column:?}: {value:?}")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("value {value} in column {column:?}{} violates {expected}", row_suffix(.row))]
    RangeViolation {
        row: Option<usize>,
        column: String,
        value: f64,
        expected: String,
    },

    #[error("level {level:?} in column {column:?} has no recode mapping")]
    UnmappedLevel { column: String, level: String },

    #[error("degenerate bounds for column {column:?}: lo {lo} must be < hi {hi}")]
    DegenerateBounds { column: String, lo: f64, hi: f64 },

    #[error("column {column:?} conflicts between schemas: {detail}")]
    SchemaConflict { column: String, detail: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("column {column:?} has a missing value at row {row}; the operation requires complete data")]
    MissingValues { column: String, row: usize },

    #[error("insufficient data: {detail}")]
    InsufficientData { detail: String },

    #[error("design matrix is rank deficient; linearly dependent column(s): {}", columns.join(", "))]
    Singular { columns: Vec<String> },

    #[error("degenerate outcome: {detail}")]
    DegenerateOutcome { detail: String },

    #[error("invalid generative spec: {detail}")]
    InvalidSpec { detail: String },

    #[error("infeasible moments for column {column:?}: mean {mean}, std {std} cannot be realized on the declared support")]
    InfeasibleMoments { column: String, mean: f64, std: f64 },

    #[error("unsupported task: {detail}")]
    UnsupportedTask { detail: String },

    #[error("shape mismatch: {detail}")]
    ShapeMismatch { detail: String },

    #[error("no trainable parameters: every layer is frozen")]
    NoTrainableParameters,

    #[error("layer selector {selector:?} does not resolve to any layer")]
    UnknownSelector { selector: String },

    #[error("task outcome {outcome:?} is not present in the dataset")]
    TaskMissing { outcome: String },

    #[error("schema mismatch: {detail}")]
    SchemaMismatch { detail: String },

    #[error("unsupported artifact version {found}; this build reads version {supported}")]
    UnsupportedVersion { found: String, supported: u32 },

    #[error("artifact integrity check failed: {detail}")]
    Integrity { detail: String },

    #[error("invalid configuration: {detail}")]
    Config { detail: String },
}

fn row_suffix(row: &Option<usize>) -> String {
    match row {
        Some(r) => format!(" (row {r})"),
        None => String::new(),
    }
}

impl Error {
    /// Exit code convention: 2 for validation problems, 3 for runtime or
    /// numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Singular { .. }
            | Error::DegenerateOutcome { .. }
            | Error::Integrity { .. } => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
