use std::io;

use friabilis_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("sieve cache {path}: {reason}")]
    Cache { path: String, reason: String },
}

impl AppError {
    /// 2 for configuration problems, 3 for exceeded resource ceilings, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Core(e) if e.is_resource() => 3,
            AppError::Core(CoreError::Domain { .. } | CoreError::Invalid(_)) => 2,
            _ => 1,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
