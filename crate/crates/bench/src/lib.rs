//! Synthetic corpora shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fpc_core::debruijn;
use fpc_core::Symbol;

/// Uniform symbols over `[0, n)`.
pub fn uniform(n: u32, len: usize, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(0..n)).collect()
}

/// First-order Markov text: each symbol repeats its predecessor's successor
/// with probability `stickiness`, otherwise jumps uniformly.
pub fn markov(n: u32, len: usize, stickiness: f64, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successor: Vec<Symbol> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut out = Vec::with_capacity(len);
    let mut prev = 0;
    for _ in 0..len {
        let next = if rng.gen_bool(stickiness) { successor[prev as usize] } else { rng.gen_range(0..n) };
        out.push(next);
        prev = next;
    }
    out
}

/// A de Bruijn prefix repeated until at least `len` symbols.
pub fn de_bruijn_power(n: u32, order: usize, len: usize) -> Vec<Symbol> {
    let period = n.pow(order as u32) as usize;
    debruijn::adversarial_power(n, order, len.div_ceil(period).max(1)).expect("small instance")
}
