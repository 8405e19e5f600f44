//! One-pass context compressor with bounded move-to-front lists.
//!
//! Every length-ℓ context owns a recency list of at most `k` distinct
//! symbols. The first ℓ symbols are written raw in `⌈log2 n⌉` bits. After
//! that, a symbol found in its context's list at 1-based position `p` is
//! written as `1` followed by the delta code of `p` and moved to the front;
//! any other symbol is written as `0` followed by its raw value, inserted at
//! the front, and the list's last entry is dropped if it grew past `k`.
//!
//! Lists start empty and are allocated the first time their context occurs,
//! so model memory is at most `n^ℓ · k · ⌈log2 n⌉` bits and usually far less.

use rustc_hash::FxHashMap;

use serde::Serialize;

use crate::bitcodec::{bit_len, delta_decode, delta_len, write_delta, BitSink, BitSource, BitString};
use crate::error::{Error, Result};
use crate::symbol::{check_alphabet, check_symbol, raw_width, Symbol};

/// Alphabet size `n`, context order `ℓ` and list capacity `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CodecParams {
    n: u32,
    order: usize,
    capacity: u32,
}

impl CodecParams {
    /// Capacities above `n` are clamped to `n`: a list of distinct symbols
    /// never holds more. Requires `n >= 2`, `k >= 1`, and `n^ℓ < 2^64`.
    pub fn new(n: u32, order: usize, capacity: u32) -> Result<Self> {
        check_alphabet(n)?;
        if capacity == 0 {
            return Err(Error::InvalidParams("list capacity must be at least 1".into()));
        }
        let params = Self { n, order, capacity: capacity.min(n) };
        params.context_count()?;
        Ok(params)
    }

    /// Capacity `min(⌊n^ε⌋, n)`.
    pub fn with_epsilon(n: u32, order: usize, epsilon: f64) -> Result<Self> {
        check_alphabet(n)?;
        Self::new(n, order, derive_capacity(n, epsilon)?)
    }

    pub fn alphabet_size(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn raw_width(&self) -> u32 {
        raw_width(self.n)
    }

    /// `n^ℓ`, the number of possible contexts.
    pub fn context_count(&self) -> Result<u64> {
        u32::try_from(self.order)
            .ok()
            .and_then(|o| u64::from(self.n).checked_pow(o))
            .ok_or_else(|| Error::TooLarge(format!("{}^{} contexts overflow 64 bits", self.n, self.order)))
    }

    /// `n^ℓ · k · ⌈log2 n⌉`.
    pub fn model_budget_bits(&self) -> Result<u64> {
        self.context_count()?
            .checked_mul(u64::from(self.capacity) * u64::from(self.raw_width()))
            .ok_or_else(|| Error::TooLarge("model budget overflows 64 bits".into()))
    }

    /// `log2(k + 1) / log2 n`: the exponent a capacity of `k` corresponds to.
    pub fn effective_epsilon(&self) -> f64 {
        (f64::from(self.capacity) + 1.0).log2() / f64::from(self.n).log2()
    }

    /// Unpacks a context key into its ℓ symbols, oldest first.
    pub fn context_symbols(&self, mut key: u64) -> Vec<Symbol> {
        let mut out = vec![0; self.order];
        for slot in out.iter_mut().rev() {
            *slot = (key % u64::from(self.n)) as Symbol;
            key /= u64::from(self.n);
        }
        out
    }

    /// Packs ℓ symbols, oldest first, into a context key.
    pub fn context_key(&self, context: &[Symbol]) -> u64 {
        context.iter().fold(0, |key, &s| key * u64::from(self.n) + u64::from(s))
    }
}

/// Does `k <= n^ε` hold? Exact for integer `ε` and integer `1/ε`.
fn at_most_power(k: u64, n: u64, epsilon: f64) -> bool {
    let near_int = |x: f64| (x - x.round()).abs() < 1e-9 && x.round() >= 1.0;
    if near_int(epsilon) && epsilon.round() <= f64::from(u32::MAX) {
        return match u128::from(n).checked_pow(epsilon.round() as u32) {
            Some(p) => u128::from(k) <= p,
            None => true,
        };
    }
    let inverse = 1.0 / epsilon;
    if near_int(inverse) && inverse.round() <= f64::from(u32::MAX) {
        return match u128::from(k).checked_pow(inverse.round() as u32) {
            Some(p) => p <= u128::from(n),
            None => false,
        };
    }
    (k as f64).ln() <= epsilon * (n as f64).ln()
}

/// `min(⌊n^ε⌋, n)` with the floor checked by integer powering where possible.
pub fn derive_capacity(n: u32, epsilon: f64) -> Result<u32> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidParams(format!("epsilon must be a positive real, got {epsilon}")));
    }
    check_alphabet(n)?;
    let n64 = u64::from(n);
    let estimate = f64::from(n).powf(epsilon).floor().clamp(1.0, f64::from(n));
    let mut k = estimate as u64;
    while k > 1 && !at_most_power(k, n64, epsilon) {
        k -= 1;
    }
    while k < n64 && at_most_power(k + 1, n64, epsilon) {
        k += 1;
    }
    Ok(k as u32)
}

/// A recency list holding at most `capacity` distinct symbols, most recent
/// first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedMtfList {
    entries: Vec<Symbol>,
    capacity: usize,
}

impl BoundedMtfList {
    pub fn new(capacity: usize) -> Self {
        Self { entries: Vec::new(), capacity }
    }

    pub fn entries(&self) -> &[Symbol] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 1-based position of `symbol`, if present.
    pub fn position(&self, symbol: Symbol) -> Option<u64> {
        self.entries.iter().position(|&s| s == symbol).map(|i| i as u64 + 1)
    }

    /// Moves the entry at 1-based `position` to the front and returns it.
    pub fn promote(&mut self, position: u64) -> Option<Symbol> {
        let idx = usize::try_from(position).ok()?.checked_sub(1)?;
        let symbol = *self.entries.get(idx)?;
        self.entries[..=idx].rotate_right(1);
        Some(symbol)
    }

    /// Inserts `symbol` at the front; returns the evicted last entry if the
    /// list grew past capacity.
    pub fn insert_front(&mut self, symbol: Symbol) -> Option<Symbol> {
        self.entries.insert(0, symbol);
        if self.entries.len() > self.capacity {
            self.entries.pop()
        } else {
            None
        }
    }
}

/// Lazily allocated lists, one per context seen so far.
#[derive(Clone, Debug)]
pub struct ContextModel {
    capacity: usize,
    lists: FxHashMap<u64, BoundedMtfList>,
}

impl ContextModel {
    pub fn new(capacity: u32) -> Self {
        Self { capacity: capacity as usize, lists: FxHashMap::default() }
    }

    pub fn allocated_count(&self) -> u64 {
        self.lists.len() as u64
    }

    pub fn get(&self, context: u64) -> Option<&BoundedMtfList> {
        self.lists.get(&context)
    }

    fn list_mut(&mut self, context: u64) -> &mut BoundedMtfList {
        let capacity = self.capacity;
        self.lists.entry(context).or_insert_with(|| BoundedMtfList::new(capacity))
    }
}

/// How one symbol was coded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CodewordKind {
    /// One of the first ℓ symbols, written raw.
    Raw,
    /// Found at this 1-based position of its context's list.
    Hit(u64),
    Miss,
}

/// The coding decision for one symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Codeword {
    /// Context key, `None` for raw prefix symbols.
    pub context: Option<u64>,
    pub kind: CodewordKind,
    pub len: u32,
}

/// Output and model-memory accounting for one compression run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FootprintReport {
    pub alphabet_size: u32,
    pub order: usize,
    pub capacity: u32,
    pub raw_width: u32,
    pub symbols: u64,
    pub allocated_lists: u64,
    /// `allocated_lists · k · ⌈log2 n⌉`.
    pub model_bits_actual: u64,
    /// `n^ℓ · k · ⌈log2 n⌉`.
    pub model_bits_budget: u64,
    /// Per allocated list: its context (`ℓ · ⌈log2 n⌉` bits) and a length
    /// field (`bit_len(k)` bits). Not included in `model_bits_actual`.
    pub index_overhead_bits: u64,
    pub payload_bits: u64,
    pub raw_prefix_bits: u64,
    pub hit_bits: u64,
    pub miss_bits: u64,
    pub hits: u64,
    pub misses: u64,
}

/// Rolling context key over the last ℓ symbols.
#[derive(Clone, Debug)]
struct ContextWindow {
    n: u64,
    /// `n^(ℓ-1)`, or 0 when ℓ = 0.
    shift_out: u64,
    key: u64,
}

impl ContextWindow {
    fn new(params: &CodecParams) -> Result<Self> {
        let n = u64::from(params.n);
        Ok(Self { n, shift_out: params.context_count()? / n, key: 0 })
    }

    #[inline]
    fn advance(&mut self, symbol: Symbol) {
        if self.shift_out != 0 {
            self.key = (self.key % self.shift_out) * self.n + u64::from(symbol);
        }
    }
}

/// Streaming compressor. Feed symbols one at a time with [`Compressor::encode`].
#[derive(Clone, Debug)]
pub struct Compressor {
    params: CodecParams,
    model: ContextModel,
    window: ContextWindow,
    report: FootprintReport,
}

impl Compressor {
    pub fn new(params: CodecParams) -> Result<Self> {
        let report = FootprintReport {
            alphabet_size: params.n,
            order: params.order,
            capacity: params.capacity,
            raw_width: params.raw_width(),
            model_bits_budget: params.model_budget_bits()?,
            ..FootprintReport::default()
        };
        Ok(Self {
            params,
            model: ContextModel::new(params.capacity),
            window: ContextWindow::new(&params)?,
            report,
        })
    }

    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    pub fn model(&self) -> &ContextModel {
        &self.model
    }

    /// Codes one symbol. An out-of-range symbol is rejected before anything
    /// is written.
    pub fn encode<S: BitSink + ?Sized>(&mut self, symbol: Symbol, sink: &mut S) -> Result<Codeword> {
        check_symbol(symbol, self.params.n)?;
        let width = self.params.raw_width();
        let codeword = if self.report.symbols < self.params.order as u64 {
            sink.write_bits(u64::from(symbol), width)?;
            self.report.raw_prefix_bits += u64::from(width);
            Codeword { context: None, kind: CodewordKind::Raw, len: width }
        } else {
            let context = self.window.key;
            let list = self.model.list_mut(context);
            match list.position(symbol) {
                Some(p) => {
                    sink.write_bit(true)?;
                    write_delta(sink, p)?;
                    list.promote(p);
                    let len = 1 + delta_len(p);
                    self.report.hits += 1;
                    self.report.hit_bits += u64::from(len);
                    Codeword { context: Some(context), kind: CodewordKind::Hit(p), len }
                }
                None => {
                    sink.write_bit(false)?;
                    sink.write_bits(u64::from(symbol), width)?;
                    list.insert_front(symbol);
                    self.report.misses += 1;
                    self.report.miss_bits += 1 + u64::from(width);
                    Codeword { context: Some(context), kind: CodewordKind::Miss, len: 1 + width }
                }
            }
        };
        self.window.advance(symbol);
        self.report.symbols += 1;
        self.report.payload_bits += u64::from(codeword.len);
        Ok(codeword)
    }

    pub fn report(&self) -> FootprintReport {
        let allocated = self.model.allocated_count();
        let k = u64::from(self.params.capacity);
        let width = u64::from(self.params.raw_width());
        FootprintReport {
            allocated_lists: allocated,
            model_bits_actual: allocated * k * width,
            index_overhead_bits: allocated
                * (self.params.order as u64 * width + u64::from(bit_len(k))),
            ..self.report.clone()
        }
    }
}

/// Streaming decompressor mirroring [`Compressor`].
#[derive(Clone, Debug)]
pub struct Decompressor {
    params: CodecParams,
    model: ContextModel,
    window: ContextWindow,
    decoded: u64,
}

impl Decompressor {
    pub fn new(params: CodecParams) -> Result<Self> {
        Ok(Self {
            params,
            model: ContextModel::new(params.capacity),
            window: ContextWindow::new(&params)?,
            decoded: 0,
        })
    }

    fn read_raw<S: BitSource + ?Sized>(&self, source: &mut S) -> Result<Symbol> {
        let value = source.read_bits(self.params.raw_width())?;
        if value >= u64::from(self.params.n) {
            return Err(Error::Corrupt(format!(
                "raw symbol {value} outside alphabet of size {}",
                self.params.n
            )));
        }
        Ok(value as Symbol)
    }

    pub fn decode<S: BitSource + ?Sized>(&mut self, source: &mut S) -> Result<Symbol> {
        let symbol = if self.decoded < self.params.order as u64 {
            self.read_raw(source)?
        } else if source.read_bit()? {
            let p = delta_decode(source)?;
            let list = self.model.list_mut(self.window.key);
            let len = list.len();
            list.promote(p).ok_or_else(|| {
                Error::Corrupt(format!("list position {p} exceeds list length {len}"))
            })?
        } else {
            let symbol = self.read_raw(source)?;
            let list = self.model.list_mut(self.window.key);
            if list.position(symbol).is_some() {
                return Err(Error::Corrupt(format!("escaped symbol {symbol} is already listed")));
            }
            list.insert_front(symbol);
            symbol
        };
        self.window.advance(symbol);
        self.decoded += 1;
        Ok(symbol)
    }
}

pub fn compress<S: BitSink + ?Sized>(
    params: CodecParams,
    s: &[Symbol],
    sink: &mut S,
) -> Result<FootprintReport> {
    let mut compressor = Compressor::new(params)?;
    for &symbol in s {
        compressor.encode(symbol, sink)?;
    }
    Ok(compressor.report())
}

pub fn compress_to_bits(params: CodecParams, s: &[Symbol]) -> Result<(BitString, FootprintReport)> {
    let mut out = BitString::new();
    let report = compress(params, s, &mut out)?;
    Ok((out, report))
}

pub fn decompress_from<S: BitSource + ?Sized>(
    params: CodecParams,
    source: &mut S,
    m: usize,
) -> Result<Vec<Symbol>> {
    let mut decompressor = Decompressor::new(params)?;
    (0..m).map(|_| decompressor.decode(source)).collect()
}

pub fn decompress(params: CodecParams, bits: &BitString, m: usize) -> Result<Vec<Symbol>> {
    decompress_from(params, &mut bits.cursor(), m)
}

/// One traced codeword together with its bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub context: Option<u64>,
    pub kind: CodewordKind,
    pub bits: BitString,
}

impl TraceEntry {
    pub fn len(&self) -> u32 {
        self.bits.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Per-symbol coding decisions; concatenating the entries' bits gives the
/// payload of [`compress`].
pub fn codeword_trace(params: CodecParams, s: &[Symbol]) -> Result<Vec<TraceEntry>> {
    let mut compressor = Compressor::new(params)?;
    s.iter()
        .map(|&symbol| {
            let mut bits = BitString::new();
            let codeword = compressor.encode(symbol, &mut bits)?;
            debug_assert_eq!(u64::from(codeword.len), bits.len());
            Ok(TraceEntry { context: codeword.context, kind: codeword.kind, bits })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcodec::delta_encode;
    use proptest::prelude::*;

    fn params(n: u32, order: usize, k: u32) -> CodecParams {
        CodecParams::new(n, order, k).unwrap()
    }

    #[test]
    fn alternating_binary_trace() {
        let p = params(2, 1, 1);
        let s = [0, 1, 0, 1, 0];
        let (bits, report) = compress_to_bits(p, &s).unwrap();
        assert_eq!(bits, "0 01 00 11 11".parse().unwrap());
        let trace = codeword_trace(p, &s).unwrap();
        let kinds: Vec<_> = trace.iter().map(|t| t.kind).collect();
        use CodewordKind::*;
        assert_eq!(kinds, [Raw, Miss, Miss, Hit(1), Hit(1)]);
        let lens: Vec<_> = trace.iter().map(TraceEntry::len).collect();
        assert_eq!(lens, [1, 2, 2, 2, 2]);
        assert_eq!((report.hits, report.misses, report.raw_prefix_bits), (2, 2, 1));
        assert_eq!(report.payload_bits, 9);
        assert_eq!(decompress(p, &bits, 5).unwrap(), s);
    }

    #[test]
    fn empty_input() {
        let (bits, report) = compress_to_bits(params(2, 0, 2), &[]).unwrap();
        assert!(bits.is_empty());
        assert_eq!((report.payload_bits, report.hits, report.misses, report.allocated_lists), (0, 0, 0, 0));
        assert_eq!(decompress(params(2, 0, 2), &bits, 0).unwrap(), Vec::<Symbol>::new());
    }

    #[test]
    fn de_bruijn_power_settles_to_two_bit_codewords() {
        let s = [0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1];
        let p = params(2, 2, 2);
        let trace = codeword_trace(p, &s).unwrap();
        for entry in &trace[6..] {
            assert_eq!(entry.bits.to_string(), "11");
        }
        let (bits, _) = compress_to_bits(p, &s).unwrap();
        assert_eq!(decompress(p, &bits, s.len()).unwrap(), s);
    }

    #[test]
    fn short_input_is_all_raw() {
        let p = params(5, 4, 2);
        let trace = codeword_trace(p, &[4, 0, 3]).unwrap();
        assert!(trace.iter().all(|t| t.kind == CodewordKind::Raw && t.len() == 3));
    }

    #[test]
    fn rejects_out_of_range_before_writing() {
        let mut c = Compressor::new(params(3, 1, 2)).unwrap();
        let mut out = BitString::new();
        c.encode(2, &mut out).unwrap();
        let before = out.len();
        assert!(matches!(c.encode(3, &mut out), Err(Error::SymbolOutOfRange { symbol: 3, n: 3 })));
        assert_eq!(out.len(), before);
    }

    #[test]
    fn corrupt_streams() {
        let p = params(2, 0, 1);
        // hit at position 2 in a list of capacity 1
        assert!(matches!(decompress(p, &"1 0100".parse().unwrap(), 1), Err(Error::Corrupt(_))));
        // hit in an empty list
        assert!(matches!(decompress(p, &"11".parse().unwrap(), 1), Err(Error::Corrupt(_))));
        // escape of a listed symbol
        assert!(matches!(decompress(p, &"00 00".parse().unwrap(), 2), Err(Error::Corrupt(_))));
        assert!(matches!(decompress(p, &"0".parse().unwrap(), 1), Err(Error::Truncated)));
        // raw value outside a non-power-of-two alphabet
        let p = params(3, 1, 1);
        assert!(matches!(decompress(p, &"11".parse().unwrap(), 1), Err(Error::Corrupt(_))));
    }

    #[test]
    fn derive_capacity_examples() {
        assert_eq!(derive_capacity(256, 0.5).unwrap(), 16);
        assert_eq!(derive_capacity(2, 1.0).unwrap(), 2);
        assert_eq!(derive_capacity(256, 2.0).unwrap(), 256);
        assert_eq!(derive_capacity(255, 0.5).unwrap(), 15);
        assert_eq!(derive_capacity(64, 1.0 / 3.0).unwrap(), 4);
        assert_eq!(derive_capacity(63, 1.0 / 3.0).unwrap(), 3);
        assert_eq!(derive_capacity(1000, 0.1).unwrap(), 1);
        assert!(derive_capacity(16, 0.0).is_err());
        assert!(derive_capacity(16, -1.0).is_err());
        assert!(derive_capacity(16, f64::NAN).is_err());
    }

    #[test]
    fn derive_capacity_matches_integer_floor() {
        for n in 2u32..=5000 {
            let k = derive_capacity(n, 0.5).unwrap();
            assert!(k * k <= n && (k + 1) * (k + 1) > n, "n={n} k={k}");
            let k = derive_capacity(n, 0.25).unwrap() as u64;
            assert!(k.pow(4) <= u64::from(n) && (k + 1).pow(4) > u64::from(n), "n={n} k={k}");
        }
    }

    #[test]
    fn params_validation() {
        assert!(CodecParams::new(1, 0, 1).is_err());
        assert!(CodecParams::new(4, 0, 0).is_err());
        assert_eq!(CodecParams::new(4, 1, 9).unwrap().capacity(), 4);
        assert!(matches!(CodecParams::new(256, 9, 4), Err(Error::TooLarge(_))));
        let p = params(256, 3, 16);
        assert_eq!(p.model_budget_bits().unwrap(), (1 << 24) * 16 * 8);
        assert_eq!(p.context_symbols(p.context_key(&[7, 255, 1])), vec![7, 255, 1]);
    }

    #[test]
    fn bounded_list_eviction() {
        let mut list = BoundedMtfList::new(2);
        assert_eq!(list.insert_front(5), None);
        assert_eq!(list.insert_front(6), None);
        assert_eq!(list.insert_front(7), Some(5));
        assert_eq!(list.entries(), &[7, 6]);
        assert_eq!(list.promote(2), Some(6));
        assert_eq!(list.entries(), &[6, 7]);
        assert_eq!(list.promote(3), None);
        assert_eq!(list.promote(0), None);
    }

    #[test]
    fn report_accounting() {
        let p = params(16, 2, 3);
        let s: Vec<Symbol> = (0..500u32).map(|i| (i * i + i / 7) % 16).collect();
        let (bits, report) = compress_to_bits(p, &s).unwrap();
        assert_eq!(report.payload_bits, bits.len());
        assert_eq!(report.payload_bits, report.raw_prefix_bits + report.hit_bits + report.miss_bits);
        assert_eq!(report.hits + report.misses + 2, 500);
        assert!(report.model_bits_actual <= report.model_bits_budget);
        assert_eq!(report.model_bits_actual, report.allocated_lists * 3 * 4);
    }

    proptest! {
        #[test]
        fn round_trip(
            (n, order, k, s) in (2u32..24, 0usize..4)
                .prop_flat_map(|(n, order)| (Just(n), Just(order), 1..=n, prop::collection::vec(0..n, 0..500)))
        ) {
            let p = params(n, order, k);
            let (bits, report) = compress_to_bits(p, &s).unwrap();
            prop_assert_eq!(report.payload_bits, bits.len());
            prop_assert_eq!(decompress(p, &bits, s.len()).unwrap(), s.clone());

            let trace = codeword_trace(p, &s).unwrap();
            let mut joined = BitString::new();
            for entry in &trace {
                joined.append(&entry.bits);
                let expected = match entry.kind {
                    CodewordKind::Raw => p.raw_width(),
                    CodewordKind::Hit(pos) => 1 + delta_encode(pos).unwrap().len() as u32,
                    CodewordKind::Miss => 1 + p.raw_width(),
                };
                prop_assert_eq!(entry.len(), expected);
            }
            prop_assert_eq!(joined, bits);
        }
    }
}
