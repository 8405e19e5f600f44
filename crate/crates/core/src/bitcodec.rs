//! Bit-granular streams and the Elias gamma/delta universal integer codes.
//!
//! Every field is written MSB-first. A stream carries its exact bit length;
//! padding to a byte boundary only happens when a stream is flushed to an
//! [`std::io::Write`] through [`BitWriter`].

use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of significant bits in `x` (0 for 0).
#[inline]
pub fn bit_len(x: u64) -> u32 {
    u64::BITS - x.leading_zeros()
}

/// Length in bits of the gamma codeword of `x` (`x >= 1`).
#[inline]
pub fn gamma_len(x: u64) -> u32 {
    2 * bit_len(x) - 1
}

/// Length in bits of the delta codeword of `x` (`x >= 1`).
#[inline]
pub fn delta_len(x: u64) -> u32 {
    let b = bit_len(x);
    gamma_len(u64::from(b)) + b - 1
}

#[inline]
fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn check_field(value: u64, width: u32) -> Result<()> {
    if width > 64 {
        return Err(Error::InvalidParams(format!("field width {width} exceeds 64 bits")));
    }
    if width < 64 && value >> width != 0 {
        return Err(Error::ValueTooWide { value, width });
    }
    Ok(())
}

/// Anything that accepts MSB-first bit fields.
pub trait BitSink {
    /// Appends the low `width` bits of `value`, most significant first.
    /// Rejects values that do not fit; a zero width appends nothing.
    fn write_bits(&mut self, value: u64, width: u32) -> Result<()>;

    fn bits_written(&self) -> u64;

    #[inline]
    fn write_bit(&mut self, bit: bool) -> Result<()> {
        self.write_bits(u64::from(bit), 1)
    }
}

/// Anything that yields MSB-first bit fields.
pub trait BitSource {
    /// Reads `width` bits as an unsigned integer. Fails with
    /// [`Error::Truncated`] if the stream ends first.
    fn read_bits(&mut self, width: u32) -> Result<u64>;

    #[inline]
    fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read_bits(1)? == 1)
    }
}

/// An owned, exactly-sized sequence of bits.
///
/// Bits past `len` in the final byte are always zero, so derived equality
/// compares bit content.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: u64,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps packed bytes holding `len` bits. Bits beyond `len` are cleared.
    pub fn from_bytes(mut bytes: Vec<u8>, len: u64) -> Result<Self> {
        let needed = len.div_ceil(8);
        if (bytes.len() as u64) < needed {
            return Err(Error::Truncated);
        }
        bytes.truncate(needed as usize);
        let tail = (len % 8) as u32;
        if tail != 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= !(0xFFu8 >> tail);
            }
        }
        Ok(Self { bytes, len })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed bytes, MSB-first, zero padded.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn get(&self, index: u64) -> Option<bool> {
        (index < self.len).then(|| self.bytes[(index / 8) as usize] >> (7 - index % 8) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bytes[(i / 8) as usize] >> (7 - i % 8) & 1 == 1)
    }

    pub fn append(&mut self, other: &BitString) {
        let mut cursor = other.cursor();
        let mut left = other.len;
        while left > 0 {
            let width = left.min(56) as u32;
            let chunk = cursor.read_bits(width).expect("length checked");
            self.push_unchecked(chunk, width);
            left -= u64::from(width);
        }
    }

    /// Copies bits `[start, end)` into a new string.
    pub fn slice(&self, start: u64, end: u64) -> BitString {
        assert!(start <= end && end <= self.len, "slice {start}..{end} out of bounds");
        let mut out = BitString::new();
        let mut cursor = self.cursor();
        cursor.pos = start;
        let mut left = end - start;
        while left > 0 {
            let width = left.min(56) as u32;
            let chunk = cursor.read_bits(width).expect("bounds checked");
            out.push_unchecked(chunk, width);
            left -= u64::from(width);
        }
        out
    }

    pub fn cursor(&self) -> BitCursor<'_> {
        BitCursor::new(&self.bytes, self.len)
    }

    fn push_unchecked(&mut self, value: u64, mut width: u32) {
        while width > 0 {
            let used = (self.len % 8) as u32;
            if used == 0 {
                self.bytes.push(0);
            }
            let free = 8 - used;
            let take = free.min(width);
            let chunk = (value >> (width - take)) & low_mask(take);
            *self.bytes.last_mut().unwrap() |= (chunk as u8) << (free - take);
            self.len += u64::from(take);
            width -= take;
        }
    }
}

impl BitSink for BitString {
    fn write_bits(&mut self, value: u64, width: u32) -> Result<()> {
        check_field(value, width)?;
        self.push_unchecked(value, width);
        Ok(())
    }

    fn bits_written(&self) -> u64 {
        self.len
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses `0`/`1` characters; spaces, `_` and `+` are ignored so test
    /// vectors can be grouped by codeword.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitString::new();
        for c in s.chars() {
            match c {
                '0' => out.push_unchecked(0, 1),
                '1' => out.push_unchecked(1, 1),
                ' ' | '_' | '+' => {}
                other => return Err(Error::InvalidParams(format!("not a bit: {other:?}"))),
            }
        }
        Ok(out)
    }
}

/// Read cursor over packed bits with a known bit length.
#[derive(Clone, Debug)]
pub struct BitCursor<'a> {
    bytes: &'a [u8],
    len: u64,
    pos: u64,
}

impl<'a> BitCursor<'a> {
    pub fn new(bytes: &'a [u8], len: u64) -> Self {
        debug_assert!(len <= bytes.len() as u64 * 8);
        Self { bytes, len, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.len - self.pos
    }
}

impl BitSource for BitCursor<'_> {
    fn read_bits(&mut self, width: u32) -> Result<u64> {
        if width > 64 {
            return Err(Error::InvalidParams(format!("field width {width} exceeds 64 bits")));
        }
        if u64::from(width) > self.remaining() {
            return Err(Error::Truncated);
        }
        let mut value = 0u64;
        let mut left = width;
        while left > 0 {
            let byte = self.bytes[(self.pos / 8) as usize];
            let offset = (self.pos % 8) as u32;
            let avail = 8 - offset;
            let take = avail.min(left);
            let chunk = (u64::from(byte) >> (avail - take)) & low_mask(take);
            value = (value << take) | chunk;
            self.pos += u64::from(take);
            left -= take;
        }
        Ok(value)
    }
}

/// Packs bits MSB-first into bytes and streams them to a writer.
pub struct BitWriter<W: Write> {
    inner: W,
    buf: Vec<u8>,
    acc: u64,
    acc_bits: u32,
    written: u64,
}

const IO_CHUNK: usize = 1 << 16;

impl<W: Write> BitWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner, buf: Vec::with_capacity(IO_CHUNK), acc: 0, acc_bits: 0, written: 0 }
    }

    /// Zero-pads the final partial byte, flushes, and returns the writer
    /// together with the number of padding bits added.
    pub fn finish(mut self) -> Result<(W, u32)> {
        let padding = (8 - self.acc_bits % 8) % 8;
        if padding > 0 {
            self.acc <<= padding;
            self.acc_bits += padding;
        }
        self.drain_acc();
        self.inner.write_all(&self.buf)?;
        self.inner.flush()?;
        Ok((self.inner, padding))
    }

    fn drain_acc(&mut self) {
        while self.acc_bits >= 8 {
            self.acc_bits -= 8;
            self.buf.push((self.acc >> self.acc_bits) as u8);
        }
        self.acc &= low_mask(self.acc_bits);
    }
}

impl<W: Write> BitSink for BitWriter<W> {
    fn write_bits(&mut self, value: u64, width: u32) -> Result<()> {
        check_field(value, width)?;
        // Keep at most 7 pending bits so a 56-bit chunk always fits.
        let mut left = width;
        while left > 0 {
            let take = left.min(56);
            let chunk = (value >> (left - take)) & low_mask(take);
            self.acc = (self.acc << take) | chunk;
            self.acc_bits += take;
            self.drain_acc();
            left -= take;
        }
        self.written += u64::from(width);
        if self.buf.len() >= IO_CHUNK {
            self.inner.write_all(&self.buf)?;
            self.buf.clear();
        }
        Ok(())
    }

    fn bits_written(&self) -> u64 {
        self.written
    }
}

/// Reads MSB-first bits from a byte reader. Running out of bytes is a
/// [`Error::Truncated`] error.
pub struct BitReader<R: Read> {
    inner: R,
    buf: Box<[u8]>,
    filled: usize,
    next: usize,
    current: u8,
    current_bits: u32,
    consumed: u64,
}

impl<R: Read> BitReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            buf: vec![0; IO_CHUNK].into_boxed_slice(),
            filled: 0,
            next: 0,
            current: 0,
            current_bits: 0,
            consumed: 0,
        }
    }

    pub fn bits_consumed(&self) -> u64 {
        self.consumed
    }

    fn next_byte(&mut self) -> Result<Option<u8>> {
        if self.next == self.filled {
            self.filled = loop {
                match self.inner.read(&mut self.buf) {
                    Ok(n) => break n,
                    Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                    Err(e) => return Err(e.into()),
                }
            };
            self.next = 0;
            if self.filled == 0 {
                return Ok(None);
            }
        }
        let byte = self.buf[self.next];
        self.next += 1;
        Ok(Some(byte))
    }

    /// Checks that only zero padding remains in the current byte and that
    /// the underlying reader is exhausted.
    pub fn finish(mut self) -> Result<()> {
        let pending = u32::from(self.current) & ((1u32 << self.current_bits) - 1);
        if pending != 0 {
            return Err(Error::Corrupt("nonzero padding bits".into()));
        }
        if self.next_byte()?.is_some() {
            return Err(Error::Corrupt("trailing data after payload".into()));
        }
        Ok(())
    }
}

impl<R: Read> BitSource for BitReader<R> {
    fn read_bits(&mut self, width: u32) -> Result<u64> {
        if width > 64 {
            return Err(Error::InvalidParams(format!("field width {width} exceeds 64 bits")));
        }
        let mut value = 0u64;
        let mut left = width;
        while left > 0 {
            if self.current_bits == 0 {
                self.current = self.next_byte()?.ok_or(Error::Truncated)?;
                self.current_bits = 8;
            }
            let take = self.current_bits.min(left);
            let chunk = (u64::from(self.current) >> (self.current_bits - take)) & low_mask(take);
            value = (value << take) | chunk;
            self.current_bits -= take;
            left -= take;
        }
        self.consumed += u64::from(width);
        Ok(value)
    }
}

/// Writes the gamma codeword of `x`: `bit_len(x) - 1` zeros, then `x` in binary.
pub fn write_gamma<S: BitSink + ?Sized>(sink: &mut S, x: u64) -> Result<()> {
    if x == 0 {
        return Err(Error::ZeroNotCodable);
    }
    let b = bit_len(x);
    sink.write_bits(0, b - 1)?;
    sink.write_bits(x, b)
}

/// Writes the delta codeword of `x`: gamma of `bit_len(x)`, then the
/// `bit_len(x) - 1` low-order bits of `x`.
pub fn write_delta<S: BitSink + ?Sized>(sink: &mut S, x: u64) -> Result<()> {
    if x == 0 {
        return Err(Error::ZeroNotCodable);
    }
    let b = bit_len(x);
    write_gamma(sink, u64::from(b))?;
    sink.write_bits(x & low_mask(b - 1), b - 1)
}

pub fn gamma_decode<S: BitSource + ?Sized>(source: &mut S) -> Result<u64> {
    let mut zeros = 0u32;
    while !source.read_bit()? {
        zeros += 1;
        if zeros > 63 {
            return Err(Error::Corrupt("gamma prefix longer than 63 bits".into()));
        }
    }
    let rest = source.read_bits(zeros)?;
    Ok((1u64 << zeros) | rest)
}

pub fn delta_decode<S: BitSource + ?Sized>(source: &mut S) -> Result<u64> {
    let b = gamma_decode(source)?;
    if b > 64 {
        return Err(Error::Corrupt(format!("delta length field {b} exceeds 64")));
    }
    let b = b as u32;
    let rest = source.read_bits(b - 1)?;
    Ok((1u64 << (b - 1)) | rest)
}

pub fn gamma_encode(x: u64) -> Result<BitString> {
    let mut out = BitString::new();
    write_gamma(&mut out, x)?;
    Ok(out)
}

pub fn delta_encode(x: u64) -> Result<BitString> {
    let mut out = BitString::new();
    write_delta(&mut out, x)?;
    Ok(out)
}

/// Counts bits without storing them.
#[derive(Debug, Default, Clone, Copy)]
pub struct BitCounter {
    bits: u64,
}

impl BitSink for BitCounter {
    fn write_bits(&mut self, value: u64, width: u32) -> Result<()> {
        check_field(value, width)?;
        self.bits += u64::from(width);
        Ok(())
    }

    fn bits_written(&self) -> u64 {
        self.bits
    }
}
