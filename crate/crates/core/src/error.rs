use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("time {t} is not on the finest grid")]
    OffGrid { t: f64 },

    #[error("level {level} exceeds the noise-tree grid resolution ({grid_levels} levels)")]
    LevelOverflow { level: usize, grid_levels: usize },

    #[error("scan did not terminate within cap {cap}")]
    ScanCap { cap: u64 },

    #[error("retry budget exhausted after {attempts} attempts (best error {best_error})")]
    RetryBudgetExhausted { attempts: usize, best_error: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
