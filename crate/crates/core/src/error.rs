use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("steering vector vanishes at theta={theta}, phi={phi}")]
    DegenerateAngle { theta: f64, phi: f64 },

    #[error("column {0} has zero norm and cannot be normalized")]
    ZeroColumn(usize),

    #[error("observed pilot energy is zero; cannot calibrate noise")]
    DegenerateChannel,

    #[error("plan is not well-determined for LS: {0}")]
    NotWellDetermined(String),

    #[error("true channel has zero energy")]
    ZeroChannel,

    #[error("dense materialization of {elements} elements exceeds the limit of {limit}")]
    TooLarge { elements: usize, limit: usize },

    #[error("empty group: {0}")]
    Empty(String),

    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            actual,
        }
    }
}
