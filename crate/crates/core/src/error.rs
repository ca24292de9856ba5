use thiserror::Error;

/// Errors produced by parsing, structure handling, semantics and transforms.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("arity clash for symbol `{symbol}`: first seen with arity {expected}, used with arity {found}")]
    ArityClash {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("symbol `{symbol}` used both as predicate and function")]
    KindClash { symbol: String },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("enumeration of {count} expansions exceeds cap {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("size guard tripped: {0}")]
    SizeGuard(String),

    #[error("transform error: {0}")]
    Transform(String),

    #[error("encoding error: {0}")]
    Encode(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
