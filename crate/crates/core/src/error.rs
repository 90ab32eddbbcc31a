use std::io;

use thiserror::Error;

/// Errors produced by the dodo library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} is not in the alphabet of size {q}")]
    InvalidSymbol { symbol: u8, q: u8 },
    #[error("unsupported alphabet size {0} (expected 2 or 4)")]
    UnsupportedAlphabet(u8),
    #[error("sequence length {len} exceeds the maximum of {max}")]
    LengthExceeded { len: usize, max: usize },
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(u8, u8),
    #[error("enumeration of {count} sequences exceeds the cap of {cap}")]
    BudgetExceeded { count: u128, cap: u64 },
    #[error("invalid edit: {0}")]
    InvalidEdit(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model parameters are not initialized")]
    Uninitialized,
    #[error("training diverged at step {step}: loss = {loss}")]
    Divergence { step: u64, loss: f64 },
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("model configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("need at least {needed} vectors, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("covariance matrix is singular")]
    SingularCovariance,
    #[error("empty input")]
    EmptyInput,
    #[error("k = {k} out of range for an index of {size} points")]
    KOutOfRange { k: usize, size: usize },
    #[error("index {index} out of range for a codebook of {size} codewords")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("sequence {0} is not a codeword")]
    UnknownCodeword(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
