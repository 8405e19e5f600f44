//! Self-describing container for compressed byte streams.
//!
//! Layout:
//!
//! ```text
//! "FPC1"                      4 bytes
//! codec id                    1 byte   (1 = footprint, 2 = mtf)
//! n, ℓ, k, m                  unsigned LEB128 varints (ℓ = k = 0 for mtf)
//! alphabet mode               1 byte   (0 = raw bytes, n = 256; 1 = dense)
//! [dense] d, then d bytes     symbol i decodes to byte i of the map
//! payload                     MSB-first bits, zero-padded to a byte
//! ```

use std::io::{self, Read, Write};

use crate::bitcodec::{BitReader, BitSink, BitWriter};
use crate::entropy::EntropyAccumulator;
use crate::error::{Error, Result};
use crate::footprint::{CodecParams, Compressor, Decompressor, FootprintReport};
use crate::mtf::{MtfDecoder, MtfEncoder};
use crate::report::{BoundReport, CodecName};
use crate::symbol::{raw_width, Symbol};

pub const MAGIC: [u8; 4] = *b"FPC1";

/// Default ceiling on `n^ℓ · k · ⌈log2 n⌉`.
pub const DEFAULT_MODEL_CAP_BITS: u64 = 1 << 36;

pub fn write_varint<W: Write + ?Sized>(w: &mut W, mut value: u64) -> io::Result<usize> {
    let mut written = 0;
    loop {
        let byte = (value & 0x7F) as u8;
        value >>= 7;
        if value == 0 {
            w.write_all(&[byte])?;
            return Ok(written + 1);
        }
        w.write_all(&[byte | 0x80])?;
        written += 1;
    }
}

fn read_byte<R: Read + ?Sized>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    match r.read_exact(&mut b) {
        Ok(()) => Ok(b[0]),
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Err(Error::Truncated),
        Err(e) => Err(e.into()),
    }
}

pub fn read_varint<R: Read + ?Sized>(r: &mut R) -> Result<u64> {
    let mut value = 0u64;
    for shift in (0..64).step_by(7) {
        let byte = read_byte(r)?;
        let bits = u64::from(byte & 0x7F);
        if shift == 63 && bits > 1 {
            return Err(Error::Corrupt("varint overflows 64 bits".into()));
        }
        value |= bits << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
    }
    Err(Error::Corrupt("varint longer than 10 bytes".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum CodecId {
    Footprint = 1,
    Mtf = 2,
}

impl CodecId {
    fn name(self) -> CodecName {
        match self {
            CodecId::Footprint => CodecName::Footprint,
            CodecId::Mtf => CodecName::Mtf,
        }
    }
}

impl TryFrom<u8> for CodecId {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            1 => Ok(CodecId::Footprint),
            2 => Ok(CodecId::Mtf),
            other => Err(Error::UnknownCodec(other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphabetMode {
    Raw,
    Dense,
}

/// How input bytes map to symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlphabetMap {
    /// Byte value is the symbol; `n = 256`.
    Raw,
    /// Symbol `i` is the `i`-th byte of the list; `n = max(d, 2)`.
    Dense(Vec<u8>),
}

impl AlphabetMap {
    /// Dense map over the bytes present, in ascending order.
    pub fn dense_from_presence(present: &[bool; 256]) -> Self {
        AlphabetMap::Dense((0..=255u8).filter(|&b| present[usize::from(b)]).collect())
    }

    pub fn dense_from_bytes(data: &[u8]) -> Self {
        let mut present = [false; 256];
        for &b in data {
            present[usize::from(b)] = true;
        }
        Self::dense_from_presence(&present)
    }

    pub fn for_mode(mode: AlphabetMode, data: &[u8]) -> Self {
        match mode {
            AlphabetMode::Raw => AlphabetMap::Raw,
            AlphabetMode::Dense => Self::dense_from_bytes(data),
        }
    }

    pub fn alphabet_size(&self) -> u32 {
        match self {
            AlphabetMap::Raw => 256,
            AlphabetMap::Dense(bytes) => (bytes.len() as u32).max(2),
        }
    }

    /// Byte-to-symbol lookup; `None` for bytes outside a dense map.
    pub fn encode_table(&self) -> [Option<Symbol>; 256] {
        let mut table = [None; 256];
        match self {
            AlphabetMap::Raw => {
                for (b, slot) in table.iter_mut().enumerate() {
                    *slot = Some(b as Symbol);
                }
            }
            AlphabetMap::Dense(bytes) => {
                for (i, &b) in bytes.iter().enumerate() {
                    table[usize::from(b)] = Some(i as Symbol);
                }
            }
        }
        table
    }

    fn decode_symbol(&self, symbol: Symbol) -> Result<u8> {
        match self {
            AlphabetMap::Raw => u8::try_from(symbol)
                .map_err(|_| Error::Corrupt(format!("symbol {symbol} is not a byte"))),
            AlphabetMap::Dense(bytes) => bytes
                .get(symbol as usize)
                .copied()
                .ok_or_else(|| Error::Corrupt(format!("symbol {symbol} outside the dense map"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainerHeader {
    pub codec: CodecId,
    pub n: u32,
    pub order: u64,
    pub capacity: u32,
    pub length: u64,
    pub alphabet: AlphabetMap,
}

impl ContainerHeader {
    /// Writes the header; returns its size in bytes.
    pub fn write_to<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<usize> {
        w.write_all(&MAGIC)?;
        w.write_all(&[self.codec as u8])?;
        let mut size = 5;
        let (order, capacity) = match self.codec {
            CodecId::Footprint => (self.order, u64::from(self.capacity)),
            CodecId::Mtf => (0, 0),
        };
        for value in [u64::from(self.n), order, capacity, self.length] {
            size += write_varint(w, value)?;
        }
        match &self.alphabet {
            AlphabetMap::Raw => {
                w.write_all(&[0])?;
                size += 1;
            }
            AlphabetMap::Dense(bytes) => {
                w.write_all(&[1])?;
                size += 1 + write_varint(w, bytes.len() as u64)?;
                w.write_all(bytes)?;
                size += bytes.len();
            }
        }
        Ok(size)
    }

    pub fn read_from<R: Read + ?Sized>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        for slot in &mut magic {
            *slot = read_byte(r).map_err(|e| match e {
                Error::Truncated => Error::BadMagic,
                other => other,
            })?;
        }
        if magic != MAGIC {
            return Err(Error::BadMagic);
        }
        let codec = CodecId::try_from(read_byte(r)?)?;
        let n = read_varint(r)?;
        let order = read_varint(r)?;
        let capacity = read_varint(r)?;
        let length = read_varint(r)?;
        let alphabet = match read_byte(r)? {
            0 => AlphabetMap::Raw,
            1 => {
                let d = read_varint(r)?;
                if d > 256 {
                    return Err(Error::Corrupt(format!("dense map of {d} bytes")));
                }
                let mut bytes = vec![0u8; d as usize];
                r.read_exact(&mut bytes).map_err(|e| match e.kind() {
                    io::ErrorKind::UnexpectedEof => Error::Truncated,
                    _ => e.into(),
                })?;
                let mut sorted = bytes.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != bytes.len() {
                    return Err(Error::Corrupt("dense map repeats a byte".into()));
                }
                AlphabetMap::Dense(bytes)
            }
            other => return Err(Error::Corrupt(format!("unknown alphabet mode {other}"))),
        };
        if n != u64::from(alphabet.alphabet_size()) {
            return Err(Error::Corrupt(format!(
                "alphabet size {n} does not match the alphabet map ({})",
                alphabet.alphabet_size()
            )));
        }
        let n = n as u32;
        let (order, capacity) = match codec {
            CodecId::Footprint => {
                if capacity == 0 || capacity > u64::from(n) {
                    return Err(Error::Corrupt(format!("capacity {capacity} outside 1..={n}")));
                }
                (order, capacity as u32)
            }
            CodecId::Mtf => (0, 0),
        };
        Ok(Self { codec, n, order, capacity, length, alphabet })
    }

    pub fn codec_params(&self) -> Result<CodecParams> {
        let order = usize::try_from(self.order)
            .map_err(|_| Error::TooLarge(format!("context order {}", self.order)))?;
        CodecParams::new(self.n, order, self.capacity)
    }
}

/// List capacity, given directly or as an exponent of the alphabet size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Capacity {
    Fixed(u32),
    Epsilon(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CodecChoice {
    Footprint { order: usize, capacity: Capacity },
    Mtf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompressOptions {
    pub codec: CodecChoice,
    pub alphabet: AlphabetMode,
    pub model_cap_bits: u64,
}

impl CompressOptions {
    pub fn footprint(order: usize, capacity: Capacity) -> Self {
        Self {
            codec: CodecChoice::Footprint { order, capacity },
            alphabet: AlphabetMode::Raw,
            model_cap_bits: DEFAULT_MODEL_CAP_BITS,
        }
    }

    pub fn mtf() -> Self {
        Self { codec: CodecChoice::Mtf, alphabet: AlphabetMode::Raw, model_cap_bits: DEFAULT_MODEL_CAP_BITS }
    }

    pub fn with_alphabet(mut self, alphabet: AlphabetMode) -> Self {
        self.alphabet = alphabet;
        self
    }

    /// Resolves the header for an input of `length` bytes over `alphabet`.
    pub fn header(&self, alphabet: AlphabetMap, length: u64) -> Result<ContainerHeader> {
        let n = alphabet.alphabet_size();
        let (codec, order, capacity) = match self.codec {
            CodecChoice::Footprint { order, capacity } => {
                let params = match capacity {
                    Capacity::Fixed(k) => CodecParams::new(n, order, k)?,
                    Capacity::Epsilon(eps) => CodecParams::with_epsilon(n, order, eps)?,
                };
                let budget = params.model_budget_bits()?;
                if budget > self.model_cap_bits {
                    return Err(Error::TooLarge(format!(
                        "model budget of {budget} bits exceeds the cap of {} bits",
                        self.model_cap_bits
                    )));
                }
                (CodecId::Footprint, order as u64, params.capacity())
            }
            CodecChoice::Mtf => (CodecId::Mtf, 0, 0),
        };
        Ok(ContainerHeader { codec, n, order, capacity, length, alphabet })
    }
}

enum Encoder {
    Footprint(Compressor),
    Mtf { encoder: MtfEncoder, report: FootprintReport },
}

impl Encoder {
    fn new(header: &ContainerHeader) -> Result<Self> {
        Ok(match header.codec {
            CodecId::Footprint => Encoder::Footprint(Compressor::new(header.codec_params()?)?),
            CodecId::Mtf => {
                let encoder = MtfEncoder::new(header.n)?;
                let model_bits = encoder.model_bits();
                let report = FootprintReport {
                    alphabet_size: header.n,
                    capacity: header.n,
                    raw_width: raw_width(header.n),
                    allocated_lists: 1,
                    model_bits_actual: model_bits,
                    model_bits_budget: model_bits,
                    ..FootprintReport::default()
                };
                Encoder::Mtf { encoder, report }
            }
        })
    }

    fn encode<S: BitSink>(&mut self, symbol: Symbol, sink: &mut S) -> Result<()> {
        match self {
            Encoder::Footprint(c) => {
                c.encode(symbol, sink)?;
            }
            Encoder::Mtf { encoder, report } => {
                let before = sink.bits_written();
                encoder.encode(symbol, sink)?;
                let bits = sink.bits_written() - before;
                report.symbols += 1;
                report.hits += 1;
                report.hit_bits += bits;
                report.payload_bits += bits;
            }
        }
        Ok(())
    }

    fn report(&self) -> FootprintReport {
        match self {
            Encoder::Footprint(c) => c.report(),
            Encoder::Mtf { report, .. } => report.clone(),
        }
    }
}

/// Compresses exactly `header.length` bytes from `input` in one pass.
///
/// The header must already describe the input (alphabet map and length);
/// entropy statistics for the report are gathered during the same pass.
pub fn compress_stream<R: Read, W: Write>(
    input: R,
    output: W,
    header: &ContainerHeader,
) -> Result<(W, BoundReport)> {
    let mut output = output;
    let header_bytes = header.write_to(&mut output)? as u64;
    let table = header.alphabet.encode_table();
    let report_order = match header.codec {
        CodecId::Footprint => header.codec_params()?.order(),
        CodecId::Mtf => 0,
    };
    let mut entropy = EntropyAccumulator::new(header.n, report_order)?;
    let mut encoder = Encoder::new(header)?;
    let mut sink = BitWriter::new(output);
    let mut buf = vec![0u8; 1 << 16];
    let mut input = input;
    let mut seen = 0u64;
    loop {
        let read = match input.read(&mut buf) {
            Ok(0) => break,
            Ok(read) => read,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e.into()),
        };
        seen += read as u64;
        if seen > header.length {
            return Err(Error::InvalidParams("input is longer than declared".into()));
        }
        for &byte in &buf[..read] {
            let symbol = table[usize::from(byte)].ok_or_else(|| {
                Error::InvalidParams(format!("byte {byte:#04x} is not in the alphabet map"))
            })?;
            encoder.encode(symbol, &mut sink)?;
            entropy.push(symbol);
        }
    }
    if seen != header.length {
        return Err(Error::InvalidParams(format!(
            "input has {seen} bytes but {} were declared",
            header.length
        )));
    }
    let (output, padding) = sink.finish()?;
    let entropies = entropy.report().values;
    let report = BoundReport::new(header.codec.name(), entropies, encoder.report(), header_bytes, padding);
    Ok((output, report))
}

/// Compresses an in-memory buffer into a complete container.
pub fn compress_bytes(data: &[u8], options: &CompressOptions) -> Result<(Vec<u8>, BoundReport)> {
    let header = options.header(AlphabetMap::for_mode(options.alphabet, data), data.len() as u64)?;
    compress_stream(data, Vec::new(), &header)
}

/// Decodes a container, writing the original bytes to `output`.
pub fn decompress_stream<R: Read, W: Write>(input: R, output: W) -> Result<(W, ContainerHeader)> {
    let mut input = input;
    let header = ContainerHeader::read_from(&mut input)?;
    let mut source = BitReader::new(input);
    let mut out = io::BufWriter::new(output);
    let emit = |symbol: Symbol, out: &mut io::BufWriter<W>| -> Result<()> {
        out.write_all(&[header.alphabet.decode_symbol(symbol)?])?;
        Ok(())
    };
    match header.codec {
        CodecId::Footprint => {
            let mut decoder = Decompressor::new(header.codec_params()?)?;
            for _ in 0..header.length {
                emit(decoder.decode(&mut source)?, &mut out)?;
            }
        }
        CodecId::Mtf => {
            let mut decoder = MtfDecoder::new(header.n)?;
            for _ in 0..header.length {
                emit(decoder.decode(&mut source)?, &mut out)?;
            }
        }
    }
    source.finish()?;
    let output = out.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok((output, header))
}

pub fn decompress_bytes(data: &[u8]) -> Result<Vec<u8>> {
    Ok(decompress_stream(data, Vec::new())?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varint_encoding() {
        let mut buf = Vec::new();
        write_varint(&mut buf, 0).unwrap();
        write_varint(&mut buf, 127).unwrap();
        write_varint(&mut buf, 128).unwrap();
        write_varint(&mut buf, 300).unwrap();
        write_varint(&mut buf, u64::MAX).unwrap();
        assert_eq!(&buf[..6], &[0x00, 0x7F, 0x80, 0x01, 0xAC, 0x02]);
        let mut r = &buf[..];
        for v in [0, 127, 128, 300, u64::MAX] {
            assert_eq!(read_varint(&mut r).unwrap(), v);
        }
        assert!(matches!(read_varint(&mut &[0x80u8][..]), Err(Error::Truncated)));
        assert!(matches!(read_varint(&mut &[0xFFu8; 11][..]), Err(Error::Corrupt(_))));
    }

    #[test]
    fn header_layout_is_bit_exact() {
        let header = CompressOptions::footprint(1, Capacity::Fixed(2))
            .header(AlphabetMap::dense_from_bytes(b"TORONTO"), 7)
            .unwrap();
        let mut buf = Vec::new();
        let size = header.write_to(&mut buf).unwrap();
        assert_eq!(size, buf.len());
        assert_eq!(buf, [b'F', b'P', b'C', b'1', 1, 4, 1, 2, 7, 1, 4, b'N', b'O', b'R', b'T']);
        assert_eq!(ContainerHeader::read_from(&mut &buf[..]).unwrap(), header);

        let header = CompressOptions::mtf().header(AlphabetMap::Raw, 300).unwrap();
        let mut buf = Vec::new();
        header.write_to(&mut buf).unwrap();
        assert_eq!(buf, [b'F', b'P', b'C', b'1', 2, 0x80, 0x02, 0, 0, 0xAC, 0x02, 0]);
    }

    #[test]
    fn toronto_round_trip() {
        let opts = CompressOptions::footprint(1, Capacity::Fixed(2)).with_alphabet(AlphabetMode::Dense);
        let (packed, report) = compress_bytes(b"TORONTO", &opts).unwrap();
        assert_eq!(decompress_bytes(&packed).unwrap(), b"TORONTO");
        assert_eq!(report.footprint.symbols, 7);
        assert!((report.entropies[1].bits - 2.0 / 7.0).abs() < 1e-12);
        assert_eq!(packed.len() as u64, report.header_bytes + report.payload_bytes);
    }

    #[test]
    fn empty_input() {
        for opts in [CompressOptions::footprint(2, Capacity::Epsilon(0.5)), CompressOptions::mtf()] {
            for mode in [AlphabetMode::Raw, AlphabetMode::Dense] {
                let (packed, report) = compress_bytes(b"", &opts.with_alphabet(mode)).unwrap();
                assert_eq!(report.payload_bits, 0);
                assert_eq!(packed.len() as u64, report.header_bytes);
                assert!(decompress_bytes(&packed).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn failure_classes() {
        let (packed, _) = compress_bytes(b"abracadabra", &CompressOptions::footprint(1, Capacity::Fixed(4))).unwrap();

        let mut bad = packed.clone();
        bad[0] ^= 0xFF;
        assert!(matches!(decompress_bytes(&bad), Err(Error::BadMagic)));
        assert!(matches!(decompress_bytes(&packed[..2]), Err(Error::BadMagic)));

        assert!(matches!(decompress_bytes(&packed[..packed.len() - 1]), Err(Error::Truncated)));
        assert!(matches!(decompress_bytes(&packed[..7]), Err(Error::Truncated)));

        let mut bad = packed.clone();
        bad[4] = 9;
        assert!(matches!(decompress_bytes(&bad), Err(Error::UnknownCodec(9))));

        let mut longer = packed.clone();
        longer.push(0);
        assert!(matches!(decompress_bytes(&longer), Err(Error::Corrupt(_))));
    }

    #[test]
    fn model_cap_is_enforced() {
        let mut opts = CompressOptions::footprint(4, Capacity::Fixed(256));
        assert!(matches!(compress_bytes(b"x", &opts), Err(Error::TooLarge(_))));
        opts.model_cap_bits = u64::MAX;
        assert!(compress_bytes(b"xy", &opts).is_ok());
    }

    #[test]
    fn declared_length_must_match() {
        let header = CompressOptions::mtf().header(AlphabetMap::Raw, 3).unwrap();
        assert!(compress_stream(&b"ab"[..], Vec::new(), &header).is_err());
        assert!(compress_stream(&b"abcd"[..], Vec::new(), &header).is_err());
        let header = CompressOptions::mtf().header(AlphabetMap::dense_from_bytes(b"ab"), 3).unwrap();
        assert!(compress_stream(&b"abc"[..], Vec::new(), &header).is_err());
    }
}
