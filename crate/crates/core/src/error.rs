use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: left has {left_modes} modes on {left_size} points, right has {right_modes} modes on {right_size} points")]
    GridMismatch {
        left_modes: usize,
        left_size: usize,
        right_modes: usize,
        right_size: usize,
    },

    #[error("pad rule gives {pad} points but alias-free quintic products on {modes} modes need at least {required}")]
    InsufficientPadding {
        modes: usize,
        pad: usize,
        required: usize,
    },

    #[error("field has a non-finite coefficient at mode {0}")]
    NonFinite(i64),

    #[error("H^1 norm {norm:e} reached the blow-up guard {threshold:e}")]
    GuardTripped { norm: f64, threshold: f64 },

    #[error("blow-up guard tripped at t = {time}: H^1 norm {norm:e} >= {threshold:e}")]
    BlowUp {
        time: f64,
        norm: f64,
        threshold: f64,
    },

    #[error("split-step integration requires the full (untruncated) nonlinearity")]
    StrangNeedsFullCutoff,

    #[error("operation requires cutoff = FULL, got cutoff M = {0}")]
    FiniteCutoff(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample")]
    EmptySample,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("modified energies are only available for k = 1, got k = {0}")]
    UnsupportedOrder(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
