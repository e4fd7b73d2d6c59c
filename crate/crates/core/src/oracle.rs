//! Brute-force checks of the defining properties of a Stanley sequence.
//!
//! Nothing here shares code with the generator's admissibility test: AP
//! detection enumerates every pair of outer terms and looks up the midpoint,
//! and greedy minimality is checked against the full set of values `2b - a`
//! forbidden by some pair of terms.

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};

fn ensure_increasing(terms: &[u64]) -> Result<()> {
    if let Some(i) = terms.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(format!(
            "terms must be strictly increasing: terms[{i}] = {} >= terms[{}] = {}",
            terms[i],
            i + 1,
            terms[i + 1]
        )));
    }
    Ok(())
}

fn ap_with_low(terms: &[u64], i: usize) -> Option<(u64, u64, u64)> {
    let a = terms[i];
    terms[i + 1..].iter().find_map(|&c| {
        let sum = a + c;
        (sum.is_multiple_of(2) && terms.binary_search(&(sum / 2)).is_ok()).then_some((a, sum / 2, c))
    })
}

/// Returns some 3-term AP `(a, b, c)` among `terms`, preferring the smallest `a`.
pub fn find_ap_triple_with(mode: ExecMode, terms: &[u64]) -> Result<Option<(u64, u64, u64)>> {
    ensure_increasing(terms)?;
    if terms.len() < 3 {
        return Ok(None);
    }
    let hit = exec::find_first(mode, terms.len() - 2, |i| ap_with_low(terms, i).is_some());
    Ok(hit.and_then(|i| ap_with_low(terms, i)))
}

pub fn find_ap_triple(terms: &[u64]) -> Result<Option<(u64, u64, u64)>> {
    find_ap_triple_with(ExecMode::default(), terms)
}

/// True iff `terms` (strictly increasing) contains no 3-term arithmetic progression.
pub fn verify_ap_free(terms: &[u64]) -> Result<bool> {
    Ok(find_ap_triple(terms)?.is_none())
}

pub fn verify_ap_free_with(mode: ExecMode, terms: &[u64]) -> Result<bool> {
    Ok(find_ap_triple_with(mode, terms)?.is_none())
}

/// The set `{2b - a : a < b both in terms}`.
pub fn forbidden_values(mode: ExecMode, terms: &[u64]) -> BitSet {
    const CHUNK: usize = 64;
    let chunks = terms.len().div_ceil(CHUNK);
    let partial = exec::map_indices(mode, chunks, |chunk| {
        let mut set = BitSet::new();
        let hi = ((chunk + 1) * CHUNK).min(terms.len());
        for j in chunk * CHUNK..hi {
            let b = terms[j];
            for &a in &terms[..j] {
                set.insert(2 * b - a);
            }
        }
        set
    });
    let mut all = BitSet::new();
    for set in &partial {
        all.union_with(set);
    }
    all
}

/// Checks greedy minimality: every integer strictly between consecutive terms,
/// after the seed prefix of length `seed_len`, equals `2b - a` for some earlier
/// terms `a < b`. Returns the first integer that was skipped without cause.
pub fn find_greedy_violation_with(
    mode: ExecMode,
    terms: &[u64],
    seed_len: usize,
) -> Result<Option<u64>> {
    ensure_increasing(terms)?;
    let start = seed_len.max(1);
    if terms.len() <= start {
        return Ok(None);
    }
    let forbidden = forbidden_values(mode, terms);
    for pair in terms[start - 1..].windows(2) {
        if let Some(m) = (pair[0] + 1..pair[1]).find(|&m| !forbidden.contains(m)) {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

pub fn verify_greedy_minimal(terms: &[u64], seed_len: usize) -> Result<bool> {
    Ok(find_greedy_violation_with(ExecMode::default(), terms, seed_len)?.is_none())
}
