use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config field `{field}`: {rule}")]
    Invalid { field: String, rule: String },

    #[error(transparent)]
    Core(#[from] boussinesq_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("no run records under {0}")]
    NoRecords(PathBuf),
}

impl CampaignError {
    /// Config errors exit with 2; everything else with 1.
    pub fn is_config_error(&self) -> bool {
        matches!(self, CampaignError::Parse(_) | CampaignError::Invalid { .. })
    }
}

pub type Result<T> = std::result::Result<T, CampaignError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CampaignError {
    let path = path.into();
    move |source| CampaignError::Io { path, source }
}
