//! One-pass, memory-bounded compression with context move-to-front lists.
//!
//! The crate provides:
//!
//! * [`footprint`]: a compressor that keeps one bounded recency list per
//!   length-ℓ context and codes each symbol as a list hit (flag plus delta
//!   coded position) or a miss (flag plus raw symbol);
//! * [`mtf`]: classical full-list move-to-front coding, used as a baseline;
//! * [`entropy`]: ℓ-th order empirical entropy and context decomposition;
//! * [`debruijn`]: linear de Bruijn sequences, used as worst-case inputs;
//! * [`bitcodec`]: MSB-first bit streams and Elias gamma/delta codes;
//! * [`container`] and [`report`]: the on-disk format and size reports.

pub mod bitcodec;
pub mod container;
pub mod debruijn;
pub mod entropy;
pub mod error;
pub mod footprint;
pub mod mtf;
pub mod report;
pub mod symbol;

pub use bitcodec::{BitCursor, BitReader, BitSink, BitSource, BitString, BitWriter};
pub use container::{
    AlphabetMap, AlphabetMode, Capacity, CodecChoice, CodecId, CompressOptions, ContainerHeader,
};
pub use entropy::{EntropyReport, OrderEntropy};
pub use error::{Error, Result};
pub use footprint::{
    BoundedMtfList, CodecParams, CodewordKind, Compressor, Decompressor, FootprintReport,
};
pub use report::{BoundReport, CodecName};
pub use symbol::{raw_width, Symbol, SymbolString};
