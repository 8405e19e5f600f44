use thiserror::Error;

/// Errors produced by the codecs, analyzers and the container format.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: u32 },

    #[error("universal codes are defined only for integers >= 1")]
    ZeroNotCodable,

    #[error("truncated stream")]
    Truncated,

    #[error("corrupt stream: {0}")]
    Corrupt(String),

    #[error("symbol {symbol} out of range for alphabet of size {n}")]
    SymbolOutOfRange { symbol: u32, n: u32 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("bad magic")]
    BadMagic,

    #[error("unknown codec id {0}")]
    UnknownCodec(u8),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
