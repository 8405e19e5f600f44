use crate::bitcodec::bit_len;
use crate::error::{Error, Result};

pub type Symbol = u32;

/// `⌈log2 n⌉`, the width of a raw symbol field.
pub fn raw_width(n: u32) -> u32 {
    bit_len(u64::from(n.saturating_sub(1)))
}

pub(crate) fn check_alphabet(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("alphabet size must be at least 2, got {n}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn check_symbol(symbol: Symbol, n: u32) -> Result<()> {
    if symbol >= n {
        return Err(Error::SymbolOutOfRange { symbol, n });
    }
    Ok(())
}

/// A string over the alphabet `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolString {
    symbols: Vec<Symbol>,
    n: u32,
}

impl SymbolString {
    pub fn new(symbols: Vec<Symbol>, n: u32) -> Result<Self> {
        check_alphabet(n)?;
        if let Some(&bad) = symbols.iter().find(|&&s| s >= n) {
            return Err(Error::SymbolOutOfRange { symbol: bad, n });
        }
        Ok(Self { symbols, n })
    }

    /// Maps each character to its rank among the distinct characters of
    /// `text`, in sorted order; the alphabet is the set of distinct characters
    /// (at least 2).
    pub fn from_text(text: &str) -> Self {
        let mut alphabet: Vec<char> = text.chars().collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        let symbols = text
            .chars()
            .map(|c| alphabet.binary_search(&c).unwrap() as Symbol)
            .collect();
        Self { symbols, n: (alphabet.len() as u32).max(2) }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }
}

impl AsRef<[Symbol]> for SymbolString {
    fn as_ref(&self) -> &[Symbol] {
        &self.symbols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_width_is_ceil_log2() {
        assert_eq!(raw_width(2), 1);
        assert_eq!(raw_width(3), 2);
        assert_eq!(raw_width(4), 2);
        assert_eq!(raw_width(5), 3);
        assert_eq!(raw_width(256), 8);
        assert_eq!(raw_width(257), 9);
    }

    #[test]
    fn validation() {
        assert!(SymbolString::new(vec![0, 1, 2], 3).is_ok());
        assert!(matches!(
            SymbolString::new(vec![0, 3], 3),
            Err(Error::SymbolOutOfRange { symbol: 3, n: 3 })
        ));
        assert!(SymbolString::new(vec![], 1).is_err());
    }

    #[test]
    fn toronto_mapping() {
        let s = SymbolString::from_text("TORONTO");
        // N=0, O=1, R=2, T=3
        assert_eq!(s.symbols(), &[3, 1, 2, 1, 0, 3, 1]);
        assert_eq!(s.alphabet_size(), 4);
    }
}
