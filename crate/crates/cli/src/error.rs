use serde_json::json;
use thiserror::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ESTIMATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wtp_core::Error),

    /// Missing inputs, bad flags, unreadable config.
    #[error("{0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "INVALID_CONFIG",
            CliError::Output { .. } => "IO_ERROR",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => EXIT_ESTIMATION,
            _ => EXIT_VALIDATION,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({
            "code": self.code(),
            "message": self.to_string(),
        });
        if let CliError::Core(wtp_core::Error::InvalidRows(rows)) = self {
            body["rows"] = json!(rows);
        }
        json!({ "error": body })
    }
}
