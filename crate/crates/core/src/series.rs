//! Derived series over a generated sequence: the exponent ratio
//! `r_k = ln a_k / ln k`, the windowed local exponent, the deviation from
//! `k^2 / ln k`, and the moving-average smoother.
//!
//! All series are indexed by 1-based `k` and use natural logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::sequence::StanleySequence;

pub const DEFAULT_WINDOW: usize = 20;
pub const DEFAULT_SMOOTHING_LENGTH: usize = 25;

/// `(k, value)` samples with strictly increasing `k` and finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedSeries {
    label: String,
    ks: Vec<u64>,
    values: Vec<f64>,
}

impl IndexedSeries {
    pub fn new(label: impl Into<String>, ks: Vec<u64>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if ks.len() != values.len() {
            return Err(Error::Invariant(format!(
                "series '{label}': {} indices but {} values",
                ks.len(),
                values.len()
            )));
        }
        if let Some(w) = ks.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Invariant(format!(
                "series '{label}': k must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!(
                "series '{label}': non-finite value {} at k = {}",
                values[i], ks[i]
            )));
        }
        Ok(IndexedSeries { label, ks, values })
    }

    /// Contiguous series starting at `first_k`.
    pub fn contiguous(label: impl Into<String>, first_k: u64, values: Vec<f64>) -> Result<Self> {
        let ks = (first_k..first_k + values.len() as u64).collect();
        Self::new(label, ks, values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ks(&self) -> &[u64] {
        &self.ks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    pub fn first_k(&self) -> Option<u64> {
        self.ks.first().copied()
    }

    pub fn last_k(&self) -> Option<u64> {
        self.ks.last().copied()
    }

    pub fn points(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.ks.iter().copied().zip(self.values.iter().copied())
    }

    pub fn position(&self, k: u64) -> Option<usize> {
        self.ks.binary_search(&k).ok()
    }

    pub fn value_at(&self, k: u64) -> Option<f64> {
        self.position(k).map(|i| self.values[i])
    }

    /// Like [`value_at`](Self::value_at) but reports a missing `k` as an error.
    pub fn try_value_at(&self, k: u64) -> Result<f64> {
        self.value_at(k).ok_or_else(|| Error::KOutOfDomain {
            k,
            label: self.label.clone(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Pointwise negation, used to find troughs as peaks.
    pub fn negated(&self) -> Self {
        IndexedSeries {
            label: format!("-{}", self.label),
            ks: self.ks.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Drops the first `front` and last `back` samples.
    pub fn trimmed(&self, front: usize, back: usize) -> Self {
        let end = self.len().saturating_sub(back).max(front.min(self.len()));
        let start = front.min(end);
        IndexedSeries {
            label: self.label.clone(),
            ks: self.ks[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        }
    }
}

fn positive_log(seq: &StanleySequence, k: usize) -> Result<f64> {
    let value = seq.terms()[k - 1];
    if value == 0 {
        return Err(Error::NonPositiveTerm { k: k as u64, value });
    }
    Ok((value as f64).ln())
}

fn check_positive_from(seq: &StanleySequence, first_k: usize) -> Result<()> {
    match seq.terms().iter().skip(first_k - 1).position(|&v| v == 0) {
        Some(i) => Err(Error::NonPositiveTerm {
            k: (first_k + i) as u64,
            value: 0,
        }),
        None => Ok(()),
    }
}

fn require_terms(seq: &StanleySequence, needed: usize) -> Result<()> {
    if seq.len() < needed {
        return Err(Error::Precondition(format!(
            "sequence needs at least {needed} terms, has {}",
            seq.len()
        )));
    }
    Ok(())
}

/// `r_k = ln a_k / ln k` for `k = 2..=N`.
pub fn exponent_ratio(seq: &StanleySequence) -> Result<IndexedSeries> {
    exponent_ratio_with(ExecMode::default(), seq)
}

pub fn exponent_ratio_with(mode: ExecMode, seq: &StanleySequence) -> Result<IndexedSeries> {
    require_terms(seq, 2)?;
    check_positive_from(seq, 2)?;
    let terms = seq.terms();
    let values = exec::map_indices(mode, terms.len() - 1, |i| {
        let k = i + 2;
        (terms[k - 1] as f64).ln() / (k as f64).ln()
    });
    IndexedSeries::contiguous("r_k", 2, values)
}

/// Two-sided log-log slope
/// `(ln a_{k+w} - ln a_{k-w}) / (ln(k+w) - ln(k-w))` for `k = w+2..=N-w`.
pub fn windowed_exponent(seq: &StanleySequence, window: usize) -> Result<IndexedSeries> {
    windowed_exponent_with(ExecMode::default(), seq, window)
}

pub fn windowed_exponent_with(
    mode: ExecMode,
    seq: &StanleySequence,
    window: usize,
) -> Result<IndexedSeries> {
    if window == 0 {
        return Err(Error::Precondition("window w must be at least 1".into()));
    }
    let needed = 2 * window + 2;
    if seq.len() < needed {
        return Err(Error::WindowOutOfBounds {
            window,
            needed,
            len: seq.len(),
        });
    }
    check_positive_from(seq, 2)?;
    let first = window + 2;
    let last = seq.len() - window;
    let terms = seq.terms();
    let values = exec::map_indices(mode, last - first + 1, |i| {
        let k = first + i;
        let (lo, hi) = (k - window, k + window);
        let num = (terms[hi - 1] as f64).ln() - (terms[lo - 1] as f64).ln();
        let den = (hi as f64).ln() - (lo as f64).ln();
        num / den
    });
    IndexedSeries::contiguous(format!("alpha_k(w={window})"), first as u64, values)
}

/// `f(k) = ln a_k - 2 ln k + ln ln k` for `k = 2..=N`.
pub fn deviation_series(seq: &StanleySequence) -> Result<IndexedSeries> {
    require_terms(seq, 2)?;
    check_positive_from(seq, 2)?;
    let terms = seq.terms();
    let values = exec::map_indices(ExecMode::default(), terms.len() - 1, |i| {
        let k = (i + 2) as f64;
        (terms[i + 1] as f64).ln() - 2.0 * k.ln() + k.ln().ln()
    });
    IndexedSeries::contiguous("f_k", 2, values)
}

/// Raw `r_k` at a single index.
pub fn ratio_at(seq: &StanleySequence, k: usize) -> Result<f64> {
    if k < 2 || k > seq.len() {
        return Err(Error::KOutOfDomain {
            k: k as u64,
            label: "sequence".into(),
        });
    }
    Ok(positive_log(seq, k)? / (k as f64).ln())
}

/// How the smoother treats windows that run past either end of the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeMode {
    /// Missing samples count as zero and the sum is still divided by `L`,
    /// exactly like a same-length discrete convolution.
    #[default]
    ZeroPad,
    /// Average only the samples that exist.
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    window_length: usize,
    edges: EdgeMode,
}

impl SmoothingConfig {
    pub fn new(window_length: usize) -> Result<Self> {
        Self::with_edges(window_length, EdgeMode::ZeroPad)
    }

    pub fn with_edges(window_length: usize, edges: EdgeMode) -> Result<Self> {
        if window_length == 0 || window_length.is_multiple_of(2) {
            return Err(Error::EvenWindow(window_length));
        }
        Ok(SmoothingConfig {
            window_length,
            edges,
        })
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn edges(&self) -> EdgeMode {
        self.edges
    }
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            window_length: DEFAULT_SMOOTHING_LENGTH,
            edges: EdgeMode::ZeroPad,
        }
    }
}

/// Centered boxcar average over sample positions; the output keeps the
/// input's `k` domain.
pub fn moving_average(series: &IndexedSeries, cfg: &SmoothingConfig) -> Result<IndexedSeries> {
    moving_average_with(ExecMode::default(), series, cfg)
}

pub fn moving_average_with(
    mode: ExecMode,
    series: &IndexedSeries,
    cfg: &SmoothingConfig,
) -> Result<IndexedSeries> {
    if series.is_empty() {
        return Err(Error::Precondition("cannot smooth an empty series".into()));
    }
    let input = series.values();
    let n = input.len();
    let half = cfg.window_length / 2;
    let weight = 1.0 / cfg.window_length as f64;
    let values = exec::map_indices(mode, n, |i| {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        match cfg.edges {
            EdgeMode::ZeroPad => input[lo..hi].iter().map(|v| v * weight).sum::<f64>(),
            EdgeMode::Truncate => input[lo..hi].iter().sum::<f64>() / (hi - lo) as f64,
        }
    });
    IndexedSeries::new(
        format!("{} smoothed (L={})", series.label(), cfg.window_length),
        series.ks().to_vec(),
        values,
    )
}
