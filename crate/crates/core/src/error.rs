use thiserror::Error;

/// Errors surfaced by configuration validation, file parsing, and rendering.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "{region} region has {available} cells but worst-case occupancy is {required} \
         (deficit {deficit})"
    )]
    GridCapacity {
        region: &'static str,
        available: usize,
        required: usize,
        deficit: usize,
    },

    #[error(
        "unknown factor `{name}`; valid factors: goal, academic_experience, social_skill, \
         social_integration"
    )]
    UnknownFactor { name: String },

    #[error("csv schema mismatch at column `{column}`: {detail}")]
    CsvSchema { column: String, detail: String },

    #[error("unknown series `{name}`; available: {available}")]
    UnknownSeries { name: String, available: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn schema(column: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::CsvSchema {
            column: column.into(),
            detail: detail.into(),
        }
    }
}
