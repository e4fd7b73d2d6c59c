//! Greedy generation of Stanley sequences.
//!
//! A Stanley sequence extends an AP-free seed by repeatedly appending the
//! smallest integer larger than the last term that closes no 3-term
//! arithmetic progression `a + c = 2b` with two existing terms. Candidate `c`
//! is tested by walking existing terms `b` from the largest down and asking
//! whether `2b - c` has been seen; the walk stops as soon as `2b - c` turns
//! negative. Walking downward matters: right after a run like `n, n + 1` the
//! candidate `n + 2` is rejected on the first probe.

use std::collections::HashSet;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::oracle;

/// Largest term the generator will produce.
pub const MAX_TERM: u64 = 1 << 62;

/// Largest value the bitset strategy will index (2 GiB of bits).
pub const MAX_BITSET_VALUE: u64 = 1 << 34;

/// Progress is reported every this many terms unless configured otherwise.
pub const DEFAULT_PROGRESS_INTERVAL: usize = 1000;

/// Initial AP-free, strictly increasing terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct SeedSet(Vec<u64>);

impl SeedSet {
    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.len() < 2 {
            return Err(Error::InvalidSeed(format!(
                "need at least 2 elements, got {}",
                elements.len()
            )));
        }
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSeed(format!(
                "elements must be strictly increasing, but {} is followed by {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = elements.last().filter(|&&v| v > MAX_TERM) {
            return Err(Error::InvalidSeed(format!(
                "element {last} exceeds the 2^62 limit"
            )));
        }
        if let Some((a, b, c)) = oracle::find_ap_triple_with(ExecMode::Sequential, &elements)? {
            return Err(Error::InvalidSeed(format!(
                "contains the 3-term arithmetic progression {a}, {b}, {c}"
            )));
        }
        Ok(SeedSet(elements))
    }

    /// The two-element seed `{0, n}`.
    pub fn pair(n: u64) -> Result<Self> {
        Self::new(vec![0, n])
    }

    pub fn elements(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<u64>> for SeedSet {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        SeedSet::new(v)
    }
}

impl From<SeedSet> for Vec<u64> {
    fn from(s: SeedSet) -> Self {
        s.0
    }
}

impl fmt::Display for SeedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for SeedSet {
    type Err = Error;

    /// Parses a comma-separated list such as `0,4`.
    fn from_str(s: &str) -> Result<Self> {
        let elements = s
            .trim()
            .trim_start_matches('{')
            .trim_end_matches('}')
            .split(',')
            .map(|part| {
                part.trim().parse::<u64>().map_err(|e| {
                    Error::InvalidSeed(format!(
                        "'{}' is not a non-negative integer: {e}",
                        part.trim()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SeedSet::new(elements)
    }
}

/// Which seen-set the generator probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Hash set of seen values.
    HashScan,
    /// Dense bit-vector indexed by value.
    #[default]
    BitsetScan,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::HashScan, Strategy::BitsetScan];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::HashScan => "hash-scan",
            Strategy::BitsetScan => "bitset-scan",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hash-scan" | "hash" => Ok(Strategy::HashScan),
            "bitset-scan" | "bitset" => Ok(Strategy::BitsetScan),
            other => Err(Error::Precondition(format!(
                "unknown strategy '{other}' (expected hash-scan or bitset-scan)"
            ))),
        }
    }
}

/// A generated sequence. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StanleySequence {
    seed: SeedSet,
    terms: Vec<u64>,
    strategy: Strategy,
}

impl StanleySequence {
    /// Wraps already-computed terms without checking the greedy invariants.
    /// Loading code re-verifies them separately.
    pub(crate) fn from_parts(seed: SeedSet, terms: Vec<u64>, strategy: Strategy) -> Self {
        StanleySequence {
            seed,
            terms,
            strategy,
        }
    }

    /// Builds a sequence from arbitrary terms for analysis of synthetic data.
    /// The terms must be strictly increasing; the AP-free and greedy
    /// properties are not required. The first two terms act as the seed.
    pub fn from_terms_unchecked(terms: Vec<u64>) -> Result<Self> {
        if terms.len() < 2 {
            return Err(Error::Precondition(format!(
                "need at least 2 terms, got {}",
                terms.len()
            )));
        }
        if let Some(i) = terms.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Precondition(format!(
                "terms must be strictly increasing at position {}",
                i + 1
            )));
        }
        let seed = SeedSet(terms[..2].to_vec());
        Ok(StanleySequence {
            seed,
            terms,
            strategy: Strategy::default(),
        })
    }

    pub fn seed(&self) -> &SeedSet {
        &self.seed
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `a_k` with 1-based `k`.
    pub fn term(&self, k: usize) -> Option<u64> {
        k.checked_sub(1).and_then(|i| self.terms.get(i).copied())
    }

    pub fn last(&self) -> u64 {
        *self.terms.last().expect("sequence holds at least the seed")
    }

    pub fn into_terms(self) -> Vec<u64> {
        self.terms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    pub strategy: Strategy,
    /// Log a progress line every this many terms; `None` disables.
    pub progress_interval: Option<NonZeroUsize>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            strategy: Strategy::default(),
            progress_interval: NonZeroUsize::new(DEFAULT_PROGRESS_INTERVAL),
        }
    }
}

impl GenerateOptions {
    pub fn with_strategy(strategy: Strategy) -> Self {
        GenerateOptions {
            strategy,
            ..Self::default()
        }
    }

    pub fn quiet(mut self) -> Self {
        self.progress_interval = None;
        self
    }
}

trait SeenSet {
    fn contains(&self, value: u64) -> bool;
    fn insert(&mut self, value: u64);

    fn accepts(&self, _value: u64) -> bool {
        true
    }
}

impl SeenSet for HashSet<u64> {
    #[inline]
    fn contains(&self, value: u64) -> bool {
        HashSet::contains(self, &value)
    }

    #[inline]
    fn insert(&mut self, value: u64) {
        HashSet::insert(self, value);
    }
}

impl SeenSet for BitSet {
    #[inline]
    fn contains(&self, value: u64) -> bool {
        BitSet::contains(self, value)
    }

    #[inline]
    fn insert(&mut self, value: u64) {
        BitSet::insert(self, value);
    }
}

/// Bitset seen-set that refuses values beyond [`MAX_BITSET_VALUE`].
struct CappedBitSet(BitSet);

impl CappedBitSet {
    fn new() -> Self {
        CappedBitSet(BitSet::new())
    }
}

impl SeenSet for CappedBitSet {
    #[inline]
    fn contains(&self, value: u64) -> bool {
        self.0.contains(value)
    }

    #[inline]
    fn insert(&mut self, value: u64) {
        self.0.insert(value);
    }

    fn accepts(&self, value: u64) -> bool {
        value <= MAX_BITSET_VALUE
    }
}

/// Descending-`b` admissibility test. All of `terms` is inspected (down to
/// the early exit), including the first element.
#[inline]
fn admissible<S: SeenSet>(candidate: u64, terms: &[u64], seen: &S) -> bool {
    for &b in terms.iter().rev() {
        let twice = 2 * b;
        if twice < candidate {
            return true;
        }
        if seen.contains(twice - candidate) {
            return false;
        }
    }
    true
}

fn extend<S: SeenSet>(
    mut seen: S,
    terms: &mut Vec<u64>,
    target: usize,
    progress: Option<NonZeroUsize>,
) -> Result<()> {
    if let Some(&big) = terms.iter().find(|&&t| !seen.accepts(t)) {
        return Err(Error::Precondition(format!(
            "seed element {big} is too large for bitset-scan (limit 2^34); use hash-scan"
        )));
    }
    for &t in terms.iter() {
        seen.insert(t);
    }
    while terms.len() < target {
        let mut candidate = *terms.last().expect("seed is non-empty") + 1;
        while !admissible(candidate, terms, &seen) {
            candidate += 1;
        }
        if candidate > MAX_TERM {
            return Err(Error::Overflow {
                len: terms.len(),
                candidate,
            });
        }
        if !seen.accepts(candidate) {
            return Err(Error::Precondition(format!(
                "term {candidate} is too large for bitset-scan (limit 2^34); use hash-scan"
            )));
        }
        terms.push(candidate);
        seen.insert(candidate);
        if let Some(every) = progress {
            if terms.len().is_multiple_of(every.get()) {
                log::info!(
                    "generated {} of {} terms (a_k = {candidate})",
                    terms.len(),
                    target
                );
            }
        }
    }
    Ok(())
}

/// Greedily extends `seed` to exactly `target_length` terms.
pub fn generate(
    seed: &SeedSet,
    target_length: usize,
    options: GenerateOptions,
) -> Result<StanleySequence> {
    if target_length < seed.len() {
        return Err(Error::TargetTooShort {
            target: target_length,
            seed_len: seed.len(),
        });
    }
    let mut terms = Vec::with_capacity(target_length);
    terms.extend_from_slice(seed.elements());
    match options.strategy {
        Strategy::HashScan => extend(
            HashSet::with_capacity(target_length),
            &mut terms,
            target_length,
            options.progress_interval,
        )?,
        Strategy::BitsetScan => extend(
            CappedBitSet::new(),
            &mut terms,
            target_length,
            options.progress_interval,
        )?,
    }
    Ok(StanleySequence {
        seed: seed.clone(),
        terms,
        strategy: options.strategy,
    })
}

/// Generates one sequence per seed. Each generation is sequential; the
/// batch fans out across seeds.
pub fn generate_many(
    mode: ExecMode,
    seeds: &[SeedSet],
    target_length: usize,
    options: GenerateOptions,
) -> Vec<Result<StanleySequence>> {
    exec::map_slice(mode, seeds, |seed| generate(seed, target_length, options))
}

/// Whether appending `candidate` to `current` keeps it free of 3-term APs.
pub fn is_admissible(candidate: u64, current: &StanleySequence) -> Result<bool> {
    is_admissible_terms(candidate, current.terms())
}

/// [`is_admissible`] over a bare strictly increasing term list.
pub fn is_admissible_terms(candidate: u64, terms: &[u64]) -> Result<bool> {
    match terms.last() {
        Some(&last) if candidate <= last => Err(Error::Precondition(format!(
            "candidate {candidate} must exceed the last term {last}"
        ))),
        _ => {
            let seen: HashSet<u64> = terms.iter().copied().collect();
            Ok(admissible(candidate, terms, &seen))
        }
    }
}
