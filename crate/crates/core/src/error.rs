use thiserror::Error;

/// Errors raised by code construction, decoding setup and experiment configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial {poly:?} is not primitive over GF({p})")]
    NotPrimitive { p: u32, poly: Vec<u32> },
    #[error("coefficient {value} is not an element of GF({p})")]
    BadModulus { p: u32, value: u32 },
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid code dimensions: {0}")]
    Dimension(String),
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("weight {w} out of range for length {n}")]
    OutOfRange { w: usize, n: usize },
    #[error("trit pair ({0}, {1}) is not the image of any bit triple")]
    InvalidTritPair(u8, u8),
    #[error("invalid channel model: {0}")]
    InvalidModel(String),
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { path: path.into(), msg: msg.into() }
    }

    /// True for errors caused by user-supplied configuration.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
