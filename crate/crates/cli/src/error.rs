use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{message}")]
    Accuracy { message: String, report: PathBuf },

    #[error(transparent)]
    Core(#[from] wavecone_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Core(wavecone_core::Error::Configuration(_)) => "configuration",
            CliError::Core(wavecone_core::Error::InvalidDimension(_) | wavecone_core::Error::InvalidGrid(_)) => {
                "configuration"
            }
            CliError::Accuracy { .. } | CliError::Core(wavecone_core::Error::Accuracy(_)) => "accuracy",
            CliError::Core(_) => "numerical",
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "configuration" => 2,
            "accuracy" => 3,
            _ => 1,
        }
    }

    /// Single-line JSON object for stderr.
    pub fn to_json_line(&self) -> String {
        let message = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        let mut obj = json!({ "error": self.kind(), "message": message });
        if let CliError::Accuracy { report, .. } = self {
            obj["report"] = json!(report.display().to_string());
        }
        obj.to_string()
    }
}
