//! Empirical entropy of a string.
//!
//! `H_0(S)` is the entropy of the symbol frequencies of `S`. For `ℓ >= 1`,
//! `H_ℓ(S)` is the average of `H_0(S_α)` over the length-ℓ contexts `α`,
//! weighted by `|S_α|`, where `S_α` concatenates the symbols that follow
//! each occurrence of `α`. Both routes below (context tables and streaming
//! counts) visit contexts in lexicographic order and symbols in ascending
//! order, so they produce bit-identical values.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbol::Symbol;

/// Zeroth-order entropy of a frequency vector, bits per symbol. Zero counts
/// are skipped; an all-zero (empty) vector has entropy 0.
pub fn h0_from_counts<I>(counts: I) -> f64
where
    I: IntoIterator<Item = u64>,
    I::IntoIter: Clone,
{
    let counts = counts.into_iter();
    let total: u64 = counts.clone().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let c = c as f64;
            c / t * (t / c).log2()
        })
        .fold(0.0, |acc, x| acc + x)
}

fn sorted_counts(s: &[Symbol]) -> Vec<u64> {
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    sorted.chunk_by(|a, b| a == b).map(|run| run.len() as u64).collect()
}

/// Zeroth-order empirical entropy in bits per symbol; 0 for the empty string.
pub fn h0(s: &[Symbol]) -> f64 {
    h0_from_counts(sorted_counts(s))
}

/// `ℓ`-th order empirical entropy in bits per symbol.
pub fn hl(s: &[Symbol], order: usize) -> f64 {
    if order == 0 {
        return h0(s);
    }
    if s.len() <= order {
        return 0.0;
    }
    let n = s.iter().copied().max().unwrap_or(0).saturating_add(1).max(2);
    match ContextCounts::new(n, order) {
        Ok(mut counts) => {
            counts.extend(s.iter().copied());
            counts.entropy()
        }
        // Context keys overflow 64 bits; fall back to explicit tables.
        Err(_) => extract_contexts(s, order).entropy(s.len()),
    }
}

/// The follower strings `S_α` of every length-ℓ context that has one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextTable {
    order: usize,
    entries: BTreeMap<Vec<Symbol>, Vec<Symbol>>,
}

impl ContextTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, context: &[Symbol]) -> Option<&[Symbol]> {
        self.entries.get(context).map(Vec::as_slice)
    }

    /// Entries in lexicographic context order.
    pub fn iter(&self) -> impl Iterator<Item = (&[Symbol], &[Symbol])> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ_α |S_α|`.
    pub fn total_followers(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    /// `(1/len) Σ_α |S_α| H_0(S_α)`.
    pub fn entropy(&self, len: usize) -> f64 {
        if len == 0 {
            return 0.0;
        }
        let weighted: f64 = self
            .entries
            .values()
            .map(|followers| followers.len() as f64 * h0(followers))
            .fold(0.0, |acc, x| acc + x);
        weighted / len as f64
    }
}

/// Splits `s` into the follower strings of its length-`order` contexts.
/// Position `i > order` appends `s_i` to the entry for `s_{i-order}..s_{i-1}`;
/// the first `order` positions have no context.
pub fn extract_contexts(s: &[Symbol], order: usize) -> ContextTable {
    let mut entries: BTreeMap<Vec<Symbol>, Vec<Symbol>> = BTreeMap::new();
    if order > 0 {
        for window in s.windows(order + 1) {
            let (context, next) = window.split_at(order);
            match entries.get_mut(context) {
                Some(followers) => followers.push(next[0]),
                None => {
                    entries.insert(context.to_vec(), vec![next[0]]);
                }
            }
        }
    }
    ContextTable { order, entries }
}

/// Streaming `(context, symbol)` counter for a single order.
///
/// Contexts are keyed by `Σ α_j · n^(ℓ-1-j)`, which sorts like the tuples
/// themselves.
#[derive(Clone, Debug)]
pub struct ContextCounts {
    n: u32,
    order: usize,
    /// `n^(ℓ-1)`; the key drops its leading symbol modulo this.
    shift_out: u64,
    key: u64,
    seen: u64,
    counts: Counts,
}

/// Largest `n^(ℓ+1)` counted in a flat array instead of a hash map.
const DENSE_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug)]
enum Counts {
    /// Indexed by `key · n + symbol`.
    Dense(Vec<u64>),
    Sparse(FxHashMap<(u64, Symbol), u64>),
}

/// One row of the per-context breakdown.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContextRow {
    pub context: Vec<Symbol>,
    pub followers: u64,
    pub h0: f64,
}

impl ContextCounts {
    pub fn new(n: u32, order: usize) -> Result<Self> {
        let modulus = u32::try_from(order)
            .ok()
            .and_then(|o| u64::from(n).checked_pow(o))
            .ok_or_else(|| Error::TooLarge(format!("{n}^{order} contexts do not fit in 64 bits")))?;
        let shift_out = modulus / u64::from(n.max(1));
        let counts = match modulus.checked_mul(u64::from(n)) {
            Some(cells) if cells <= DENSE_LIMIT => Counts::Dense(vec![0; cells as usize]),
            _ => Counts::Sparse(FxHashMap::default()),
        };
        Ok(Self { n, order, shift_out, key: 0, seen: 0, counts })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> u64 {
        self.seen
    }

    pub fn is_empty(&self) -> bool {
        self.seen == 0
    }

    pub fn push(&mut self, symbol: Symbol) {
        if self.seen >= self.order as u64 {
            match &mut self.counts {
                Counts::Dense(cells) => cells[(self.key * u64::from(self.n) + u64::from(symbol)) as usize] += 1,
                Counts::Sparse(map) => *map.entry((self.key, symbol)).or_insert(0) += 1,
            }
        }
        if self.order > 0 {
            self.key = (self.key % self.shift_out) * u64::from(self.n) + u64::from(symbol);
        }
        self.seen += 1;
    }

    /// Nonzero `((context, symbol), count)` cells in ascending order.
    fn entries(&self) -> Vec<((u64, Symbol), u64)> {
        match &self.counts {
            Counts::Dense(cells) => {
                let n = u64::from(self.n);
                cells
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| c > 0)
                    .map(|(i, &c)| ((i as u64 / n, (i as u64 % n) as Symbol), c))
                    .collect()
            }
            Counts::Sparse(map) => {
                let mut entries: Vec<_> = map.iter().map(|(&k, &c)| (k, c)).collect();
                entries.sort_unstable_by_key(|&(k, _)| k);
                entries
            }
        }
    }

    /// Number of distinct `(context, symbol)` pairs seen.
    fn distinct_pairs(&self) -> u64 {
        match &self.counts {
            Counts::Dense(cells) => cells.iter().filter(|&&c| c > 0).count() as u64,
            Counts::Sparse(map) => map.len() as u64,
        }
    }

    fn decode_context(&self, mut key: u64) -> Vec<Symbol> {
        let mut context = vec![0; self.order];
        for slot in context.iter_mut().rev() {
            *slot = (key % u64::from(self.n)) as Symbol;
            key /= u64::from(self.n);
        }
        context
    }

    /// Per-context rows in lexicographic order. For order 0 there is one row
    /// with the empty context.
    pub fn rows(&self) -> Vec<ContextRow> {
        self.entries()
            .chunk_by(|a, b| a.0 .0 == b.0 .0)
            .map(|group| {
                let counts = group.iter().map(|&(_, c)| c);
                ContextRow {
                    context: self.decode_context(group[0].0 .0),
                    followers: counts.clone().sum(),
                    h0: h0_from_counts(counts),
                }
            })
            .collect()
    }

    /// `H_order` of everything pushed so far.
    pub fn entropy(&self) -> f64 {
        if self.seen == 0 {
            return 0.0;
        }
        let rows = self.rows();
        if self.order == 0 {
            return rows.first().map_or(0.0, |r| r.h0);
        }
        let weighted: f64 = rows.iter().map(|r| r.followers as f64 * r.h0).fold(0.0, |acc, x| acc + x);
        weighted / self.seen as f64
    }
}

impl Extend<Symbol> for ContextCounts {
    fn extend<T: IntoIterator<Item = Symbol>>(&mut self, iter: T) {
        for s in iter {
            self.push(s);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderEntropy {
    pub order: usize,
    pub bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderBreakdown {
    pub order: usize,
    /// `Σ_α |S_α| H_0(S_α)`, in bits.
    pub weighted_sum: f64,
    pub rows: Vec<ContextRow>,
}

/// Entropies `H_0..H_L` and the per-context decomposition for each order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub alphabet_size: u32,
    pub length: u64,
    pub distinct: u64,
    pub values: Vec<OrderEntropy>,
    pub breakdown: Vec<OrderBreakdown>,
}

impl EntropyReport {
    pub fn get(&self, order: usize) -> Option<f64> {
        self.values.iter().find(|v| v.order == order).map(|v| v.bits)
    }
}

/// Accumulates counts for orders `0..=max_order` in one pass.
#[derive(Clone, Debug)]
pub struct EntropyAccumulator {
    n: u32,
    orders: Vec<ContextCounts>,
}

impl EntropyAccumulator {
    pub fn new(n: u32, max_order: usize) -> Result<Self> {
        let orders = (0..=max_order).map(|o| ContextCounts::new(n, o)).collect::<Result<_>>()?;
        Ok(Self { n, orders })
    }

    pub fn push(&mut self, symbol: Symbol) {
        for counts in &mut self.orders {
            counts.push(symbol);
        }
    }

    pub fn report(&self) -> EntropyReport {
        let length = self.orders[0].len();
        let mut values = Vec::with_capacity(self.orders.len());
        let mut breakdown = Vec::new();
        let mut distinct = 0;
        for counts in &self.orders {
            let rows = counts.rows();
            if counts.order() == 0 {
                distinct = counts.distinct_pairs();
                values.push(OrderEntropy { order: 0, bits: counts.entropy() });
                continue;
            }
            let weighted_sum: f64 = rows.iter().map(|r| r.followers as f64 * r.h0).fold(0.0, |acc, x| acc + x);
            let bits = if length == 0 { 0.0 } else { weighted_sum / length as f64 };
            values.push(OrderEntropy { order: counts.order(), bits });
            breakdown.push(OrderBreakdown { order: counts.order(), weighted_sum, rows });
        }
        EntropyReport { alphabet_size: self.n, length, distinct, values, breakdown }
    }
}

impl Extend<Symbol> for EntropyAccumulator {
    fn extend<T: IntoIterator<Item = Symbol>>(&mut self, iter: T) {
        for s in iter {
            self.push(s);
        }
    }
}

/// Full analysis of an in-memory string over alphabet size `n`.
pub fn analyze(s: &[Symbol], n: u32, max_order: usize) -> Result<EntropyReport> {
    let mut acc = EntropyAccumulator::new(n, max_order)?;
    acc.extend(s.iter().copied());
    Ok(acc.report())
}
