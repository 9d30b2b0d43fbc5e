use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("group index {index} out of range for {num_groups} groups (row {row})")]
    GroupOutOfRange {
        row: usize,
        index: usize,
        num_groups: usize,
    },

    #[error("label must be 0 or 1 (row {row})")]
    InvalidLabel { row: usize },

    #[error("split fractions must be nonnegative and sum to 1, got ({0}, {1}, {2})")]
    InvalidFractions(f64, f64, f64),

    #[error("cell (group {group}, label {label}) is empty")]
    EmptyCell { group: String, label: u8 },

    #[error("no training rows with label {0}")]
    EmptyClass(u8),

    #[error("group {group} has no rows with label {label}")]
    GroupMissingLabel { group: String, label: u8 },

    #[error("feature column {0} is not binary")]
    NonBinaryFeature(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hessian is singular even after ridge fallback")]
    SingularHessian,

    #[error("csv: missing column {0:?}")]
    MissingColumn(String),

    #[error("csv row {row}: {message}")]
    CsvRow { row: usize, message: String },

    #[error("model text line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
