//! Harmonized survey data: schemas, ingestion, recoding, normalization,
//! case-wise deletion, alignment, splitting, and descriptive statistics.

pub mod builtin;
pub mod dataset;
pub mod describe;
pub mod frame;
pub mod schema;

pub use dataset::{default_missing_tokens, split_indices, SurveyDataset};
pub use describe::{describe, ColumnStats, DescriptiveStats};
pub use frame::{recode, RawFrame, RecodeRule};
pub use schema::{
    align_schemas, FeatureSpec, Kind, Role, SchemaFile, SurveySchema, TaskKind, TaskSpec,
};
