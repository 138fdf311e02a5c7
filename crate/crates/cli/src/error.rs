use glc_core::GlcError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] GlcError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Stable machine-readable name for a core error.
pub fn core_kind(e: &GlcError) -> &'static str {
    match e {
        GlcError::Parse { .. } | GlcError::Ragged { .. } | GlcError::Csv(_) => "parse",
        GlcError::EmptyDataset => "empty_dataset",
        GlcError::MissingLabelColumn(_) => "missing_label",
        GlcError::MissingValue { .. } => "missing_value",
        GlcError::Io(_) => "io",
        GlcError::DimensionMismatch { .. } => "dimension_mismatch",
        GlcError::InvalidPairing(_) => "invalid_pairing",
        GlcError::WrongSystem { .. } => "wrong_system",
        GlcError::InvalidSpec(_) => "invalid_spec",
        GlcError::InvalidGeometry(_) => "invalid_geometry",
        GlcError::InvalidInput(_) => "invalid_input",
        GlcError::Domain(_) => "domain",
        GlcError::VerticalBoundary { .. } => "vertical_boundary",
        GlcError::Undecodable(_) => "undecodable",
        GlcError::Class(_) => "class",
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => core_kind(e),
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": { "kind": self.kind(), "message": self.to_string() } });
        if let CliError::Core(GlcError::VerticalBoundary { threshold }) = self {
            v["error"]["threshold"] = json!(threshold);
        }
        v
    }
}
