//! Linear de Bruijn sequences: generation, validation and exact counting.
//!
//! A linear de Bruijn sequence of order ℓ over `[0, n)` has length
//! `n^ℓ + ℓ - 1` and contains every ℓ-tuple exactly once. Its first `n^ℓ`
//! symbols, repeated, give strings whose ℓ-th order empirical entropy is 0
//! while every context still needs its own model entry.

use crate::error::{Error, Result};
use crate::symbol::{check_alphabet, Symbol};

/// Default cap on `n^ℓ` for [`generate`].
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Largest `n^ℓ` accepted by [`enumerate_count`].
pub const ENUMERATION_LIMIT: u64 = 16;

fn tuple_count(n: u32, order: usize) -> Option<u64> {
    u32::try_from(order).ok().and_then(|o| u64::from(n).checked_pow(o))
}

fn check_instance(n: u32, order: usize, budget: u64) -> Result<u64> {
    check_alphabet(n)?;
    if order == 0 {
        return Err(Error::InvalidParams("de Bruijn order must be at least 1".into()));
    }
    match tuple_count(n, order) {
        Some(count) if count <= budget => Ok(count),
        _ => Err(Error::TooLarge(format!("{n}^{order} tuples exceed the budget of {budget}"))),
    }
}

/// [`generate_with_budget`] with [`DEFAULT_BUDGET`].
pub fn generate(n: u32, order: usize) -> Result<Vec<Symbol>> {
    generate_with_budget(n, order, DEFAULT_BUDGET)
}

/// Builds a linear de Bruijn sequence by walking an Eulerian circuit of the
/// order-(ℓ-1) de Bruijn graph (Hierholzer, lowest symbol first) from the
/// all-zero node. Output is deterministic.
pub fn generate_with_budget(n: u32, order: usize, budget: u64) -> Result<Vec<Symbol>> {
    let edges = check_instance(n, order, budget)?;
    let nodes = edges / u64::from(n);
    // next_edge[v] is the lowest unused outgoing label of node v.
    let mut next_edge = vec![0u32; nodes as usize];
    // (node, label of the edge that entered it)
    let mut stack: Vec<(u64, Symbol)> = vec![(0, 0)];
    let mut labels = Vec::with_capacity(edges as usize);
    while let Some(&(node, label)) = stack.last() {
        let slot = &mut next_edge[node as usize];
        if *slot < n {
            let c = *slot;
            *slot += 1;
            let next = (node * u64::from(n) + u64::from(c)) % nodes;
            stack.push((next, c));
        } else {
            stack.pop();
            if !stack.is_empty() {
                labels.push(label);
            }
        }
    }
    labels.reverse();
    let mut out = vec![0; order - 1];
    out.extend(labels);
    Ok(out)
}

/// Whether `s` is a linear de Bruijn sequence of order `order` over `[0, n)`.
pub fn validate(s: &[Symbol], n: u32, order: usize) -> bool {
    if n < 2 || order == 0 || s.iter().any(|&c| c >= n) {
        return false;
    }
    let Some(count) = tuple_count(n, order) else {
        return false;
    };
    if s.len() as u64 != count + order as u64 - 1 {
        return false;
    }
    let mut seen = vec![false; count as usize];
    for window in s.windows(order) {
        let key = window.iter().fold(0u64, |k, &c| k * u64::from(n) + u64::from(c)) as usize;
        if std::mem::replace(&mut seen[key], true) {
            return false;
        }
    }
    let edge = order - 1;
    s[..edge] == s[s.len() - edge..]
}

/// Counts the distinct linear de Bruijn sequences of order `order` over
/// `[0, n)` by enumerating every Eulerian trail of the order-(ℓ-1) graph
/// from every start node. Each such trail spells exactly one sequence.
pub fn enumerate_count(n: u32, order: usize) -> Result<u64> {
    let edges = check_instance(n, order, ENUMERATION_LIMIT)?;
    let nodes = edges / u64::from(n);
    let mut used = vec![false; edges as usize];

    fn walk(node: u64, remaining: u64, n: u64, nodes: u64, used: &mut [bool]) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let mut total = 0;
        for c in 0..n {
            let edge = (node * n + c) as usize;
            if !used[edge] {
                used[edge] = true;
                total += walk((node * n + c) % nodes, remaining - 1, n, nodes, used);
                used[edge] = false;
            }
        }
        total
    }

    Ok((0..nodes).map(|start| walk(start, edges, u64::from(n), nodes, &mut used)).sum())
}

/// `(n!)^(n^(ℓ-1))`, or `None` on overflow.
pub fn formula_count(n: u32, order: usize) -> Option<u128> {
    if order == 0 {
        return None;
    }
    let factorial = (1..=u128::from(n)).try_fold(1u128, |acc, i| acc.checked_mul(i))?;
    let exponent = u32::try_from(tuple_count(n, order - 1)?).ok()?;
    factorial.checked_pow(exponent)
}

/// The first `n^ℓ` symbols of [`generate`]`(n, ℓ)`, repeated `k` times.
pub fn adversarial_power(n: u32, order: usize, k: usize) -> Result<Vec<Symbol>> {
    if k == 0 {
        return Err(Error::InvalidParams("repetition count must be at least 1".into()));
    }
    let mut prefix = generate(n, order)?;
    prefix.truncate(prefix.len() + 1 - order);
    Ok(prefix.repeat(k))
}
