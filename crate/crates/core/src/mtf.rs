//! Full-list move-to-front coding with Elias delta positions.
//!
//! The list starts as `0, 1, …, n-1`. Each symbol is coded as its 1-based
//! list position and then moved to the front.

use crate::bitcodec::{bit_len, delta_decode, write_delta, BitSink, BitSource, BitString};
use crate::error::{Error, Result};
use crate::symbol::{check_alphabet, check_symbol, raw_width, Symbol};

/// A permutation of `[0, n)` in recency order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtfList {
    order: Vec<Symbol>,
}

impl MtfList {
    pub fn new(n: u32) -> Self {
        Self { order: (0..n).collect() }
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.order
    }

    /// 1-based position of `symbol`, moving it to the front.
    pub fn access(&mut self, symbol: Symbol) -> Option<u64> {
        let idx = self.order.iter().position(|&s| s == symbol)?;
        self.order[..=idx].rotate_right(1);
        Some(idx as u64 + 1)
    }

    /// Symbol at 1-based `position`, moving it to the front.
    pub fn take(&mut self, position: u64) -> Option<Symbol> {
        let idx = usize::try_from(position).ok()?.checked_sub(1)?;
        let symbol = *self.order.get(idx)?;
        self.order[..=idx].rotate_right(1);
        Some(symbol)
    }
}

#[derive(Clone, Debug)]
pub struct MtfEncoder {
    n: u32,
    list: MtfList,
}

impl MtfEncoder {
    pub fn new(n: u32) -> Result<Self> {
        check_alphabet(n)?;
        Ok(Self { n, list: MtfList::new(n) })
    }

    /// Codes one symbol and returns its 1-based position.
    pub fn encode<S: BitSink + ?Sized>(&mut self, symbol: Symbol, sink: &mut S) -> Result<u64> {
        check_symbol(symbol, self.n)?;
        let position = self.list.access(symbol).expect("list is a permutation");
        write_delta(sink, position)?;
        Ok(position)
    }

    /// Model memory: the list itself.
    pub fn model_bits(&self) -> u64 {
        u64::from(self.n) * u64::from(raw_width(self.n))
    }
}

#[derive(Clone, Debug)]
pub struct MtfDecoder {
    list: MtfList,
}

impl MtfDecoder {
    pub fn new(n: u32) -> Result<Self> {
        check_alphabet(n)?;
        Ok(Self { list: MtfList::new(n) })
    }

    pub fn decode<S: BitSource + ?Sized>(&mut self, source: &mut S) -> Result<Symbol> {
        let position = delta_decode(source)?;
        self.list.take(position).ok_or_else(|| {
            Error::Corrupt(format!(
                "position {position} exceeds list length {}",
                self.list.order.len()
            ))
        })
    }
}

pub fn mtf_encode(s: &[Symbol], n: u32) -> Result<BitString> {
    let mut encoder = MtfEncoder::new(n)?;
    let mut out = BitString::new();
    for &symbol in s {
        encoder.encode(symbol, &mut out)?;
    }
    Ok(out)
}

pub fn mtf_decode(bits: &BitString, n: u32, m: usize) -> Result<Vec<Symbol>> {
    let mut decoder = MtfDecoder::new(n)?;
    let mut cursor = bits.cursor();
    (0..m).map(|_| decoder.decode(&mut cursor)).collect()
}

/// The 1-based position coded for each symbol.
pub fn mtf_rank_trace(s: &[Symbol], n: u32) -> Result<Vec<u64>> {
    check_alphabet(n)?;
    let mut list = MtfList::new(n);
    s.iter()
        .map(|&symbol| {
            check_symbol(symbol, n)?;
            Ok(list.access(symbol).expect("list is a permutation"))
        })
        .collect()
}

/// Additive term of the output-size bound: one maximal codeword per symbol,
/// `n (⌈log2 n⌉ + 2⌈log2(⌈log2 n⌉ + 1)⌉ + 1)`.
pub fn mtf_additive_bits(n: u32) -> u64 {
    let w = u64::from(raw_width(n));
    let ww = u64::from(bit_len(w)); // ⌈log2(w + 1)⌉
    u64::from(n) * (w + 2 * ww + 1)
}

/// `(H_0 + 2 log2(H_0 + 1) + 1) m + A(n)`.
pub fn mtf_bound_bits(h0: f64, m: u64, n: u32) -> f64 {
    (h0 + 2.0 * (h0 + 1.0).log2() + 1.0) * m as f64 + mtf_additive_bits(n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::h0;
    use proptest::prelude::*;

    #[test]
    fn encode_examples() {
        assert_eq!(mtf_encode(&[2, 0, 2], 3).unwrap(), "0101 0100 0100".parse().unwrap());
        assert_eq!(mtf_encode(&[0], 2).unwrap().to_string(), "1");
        assert!(mtf_encode(&[], 4).unwrap().is_empty());
    }

    #[test]
    fn decode_examples() {
        assert_eq!(mtf_decode(&"0101 0100 0100".parse().unwrap(), 3, 3).unwrap(), vec![2, 0, 2]);
        assert_eq!(mtf_decode(&BitString::new(), 4, 0).unwrap(), Vec::<Symbol>::new());
        assert_eq!(mtf_decode(&"1".parse().unwrap(), 2, 1).unwrap(), vec![0]);
    }

    #[test]
    fn rank_trace_examples() {
        assert_eq!(mtf_rank_trace(&[2, 0, 2], 3).unwrap(), vec![3, 2, 2]);
        assert_eq!(mtf_rank_trace(&[0, 0, 0], 2).unwrap(), vec![1, 1, 1]);
        assert_eq!(mtf_rank_trace(&[1, 0, 1, 0], 2).unwrap(), vec![2, 2, 2, 2]);
    }

    #[test]
    fn errors() {
        assert!(matches!(mtf_encode(&[0, 3], 3), Err(Error::SymbolOutOfRange { symbol: 3, n: 3 })));
        assert!(mtf_encode(&[0], 1).is_err());
        // delta(3) with only two list entries
        assert!(matches!(mtf_decode(&"0101".parse().unwrap(), 2, 1), Err(Error::Corrupt(_))));
        assert!(matches!(mtf_decode(&"01".parse().unwrap(), 2, 1), Err(Error::Truncated)));
    }

    #[test]
    fn additive_term() {
        // n=256: 256 * (8 + 2*4 + 1)
        assert_eq!(mtf_additive_bits(256), 256 * 17);
        // n=2: 2 * (1 + 2*1 + 1)
        assert_eq!(mtf_additive_bits(2), 8);
    }

    /// Recency oracle: previous occurrence → 1 + distinct symbols since;
    /// first occurrence → rank in the identity list after removing symbols
    /// already moved to the front.
    fn recency_oracle(s: &[Symbol]) -> Vec<u64> {
        (0..s.len())
            .map(|i| {
                let sym = s[i];
                match s[..i].iter().rposition(|&t| t == sym) {
                    Some(prev) => {
                        let mut between: Vec<Symbol> = s[prev + 1..i].to_vec();
                        between.sort_unstable();
                        between.dedup();
                        between.len() as u64 + 1
                    }
                    None => {
                        let mut seen: Vec<Symbol> = s[..i].to_vec();
                        seen.sort_unstable();
                        seen.dedup();
                        // seen symbols sit in front; unseen keep identity order
                        let smaller_unseen = (0..sym).filter(|t| !seen.contains(t)).count();
                        (seen.len() + smaller_unseen) as u64 + 1
                    }
                }
            })
            .collect()
    }

    fn arb_input() -> impl Strategy<Value = (u32, Vec<Symbol>)> {
        (2u32..20).prop_flat_map(|n| (Just(n), prop::collection::vec(0..n, 0..300)))
    }

    proptest! {
        #[test]
        fn round_trip((n, s) in arb_input()) {
            let bits = mtf_encode(&s, n).unwrap();
            prop_assert_eq!(mtf_decode(&bits, n, s.len()).unwrap(), s);
        }

        #[test]
        fn recency_law((n, s) in arb_input()) {
            prop_assert_eq!(mtf_rank_trace(&s, n).unwrap(), recency_oracle(&s));
        }

        #[test]
        fn output_bound((n, s) in arb_input()) {
            let bits = mtf_encode(&s, n).unwrap();
            let bound = mtf_bound_bits(h0(&s), s.len() as u64, n);
            prop_assert!((bits.len() as f64) <= bound, "{} > {}", bits.len(), bound);
        }
    }
}
