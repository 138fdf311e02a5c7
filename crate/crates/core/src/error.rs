use thiserror::Error;

pub type Result<T> = std::result::Result<T, GlcError>;

#[derive(Debug, Error)]
pub enum GlcError {
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("dataset has no data rows")]
    EmptyDataset,

    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),

    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("graph was encoded with `{found}`, expected `{expected}`")]
    WrongSystem {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid coordinate system: {0}")]
    InvalidSpec(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("vertical boundary: use the single-attribute rule x1 > {threshold}")]
    VerticalBoundary { threshold: f64 },

    #[error("cannot decode: {0}")]
    Undecodable(String),

    #[error("class problem: {0}")]
    Class(String),
}

impl From<csv::Error> for GlcError {
    fn from(e: csv::Error) -> Self {
        GlcError::Csv(e.to_string())
    }
}
