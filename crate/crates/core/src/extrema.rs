//! Peak and trough detection on the smoothed exponent-ratio curve.
//!
//! Candidates are local maxima filtered by topographic prominence and then
//! thinned by minimum separation, tallest first. Troughs are the peaks of
//! the negated series. The hand-curated lists used for regression ship as a
//! data file and load through [`curated_extrema`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::IndexedSeries;
use crate::store;

pub const DEFAULT_MIN_DISTANCE: usize = 50;
pub const DEFAULT_PEAK_PROMINENCE: f64 = 0.005;
pub const DEFAULT_TROUGH_PROMINENCE: f64 = 0.003;

/// Curated extrema for the `{0, 4}` sequence, format version 1.
pub const CURATED_EXTREMA_V1: &str = include_str!("../data/curated_extrema_v1.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakConfig {
    min_distance: usize,
    min_prominence: f64,
}

impl PeakConfig {
    pub fn new(min_distance: usize, min_prominence: f64) -> Result<Self> {
        if min_distance < 1 {
            return Err(Error::Precondition(
                "min_distance must be at least 1".into(),
            ));
        }
        if !(min_prominence > 0.0 && min_prominence.is_finite()) {
            return Err(Error::Precondition(format!(
                "min_prominence must be positive and finite, got {min_prominence}"
            )));
        }
        Ok(PeakConfig {
            min_distance,
            min_prominence,
        })
    }

    pub fn default_peaks() -> Self {
        PeakConfig {
            min_distance: DEFAULT_MIN_DISTANCE,
            min_prominence: DEFAULT_PEAK_PROMINENCE,
        }
    }

    pub fn default_troughs() -> Self {
        PeakConfig {
            min_distance: DEFAULT_MIN_DISTANCE,
            min_prominence: DEFAULT_TROUGH_PROMINENCE,
        }
    }

    pub fn min_distance(&self) -> usize {
        self.min_distance
    }

    pub fn min_prominence(&self) -> f64 {
        self.min_prominence
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremaKind {
    Peak,
    Trough,
}

impl ExtremaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtremaKind::Peak => "peak",
            ExtremaKind::Trough => "trough",
        }
    }
}

impl fmt::Display for ExtremaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExtremaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "peak" | "peaks" => Ok(ExtremaKind::Peak),
            "trough" | "troughs" => Ok(ExtremaKind::Trough),
            other => Err(Error::Precondition(format!(
                "unknown extremum kind '{other}' (expected peak or trough)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremaSource {
    Automatic,
    Manual,
}

/// Selected peak and trough indices (in `k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremaSet {
    peaks: Vec<u64>,
    troughs: Vec<u64>,
    source: ExtremaSource,
}

impl ExtremaSet {
    pub fn new(peaks: Vec<u64>, troughs: Vec<u64>, source: ExtremaSource) -> Result<Self> {
        for (name, list) in [("peaks", &peaks), ("troughs", &troughs)] {
            if let Some(w) = list.windows(2).find(|w| w[0] >= w[1]) {
                return Err(Error::Invariant(format!(
                    "{name} must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(ExtremaSet {
            peaks,
            troughs,
            source,
        })
    }

    pub fn peaks(&self) -> &[u64] {
        &self.peaks
    }

    pub fn troughs(&self) -> &[u64] {
        &self.troughs
    }

    pub fn of_kind(&self, kind: ExtremaKind) -> &[u64] {
        match kind {
            ExtremaKind::Peak => &self.peaks,
            ExtremaKind::Trough => &self.troughs,
        }
    }

    pub fn source(&self) -> ExtremaSource {
        self.source
    }

    /// Fails with the first `k` not present in `series`.
    pub fn check_domain(&self, series: &IndexedSeries) -> Result<()> {
        for &k in self.peaks.iter().chain(&self.troughs) {
            series.try_value_at(k)?;
        }
        Ok(())
    }
}

/// A detected local maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: usize,
    pub k: u64,
    pub height: f64,
    pub prominence: f64,
}

/// Positions of local maxima. A run of equal values flanked by strictly lower
/// neighbours counts once, at its left-most position.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i - 1] < values[i] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn is_local_maximum(values: &[f64], at: usize) -> bool {
    if at == 0 || at + 1 >= values.len() || values[at - 1] >= values[at] {
        return false;
    }
    match values[at + 1..].iter().find(|&&v| v != values[at]) {
        Some(&v) => v < values[at],
        None => false,
    }
}

fn prominence_unchecked(values: &[f64], at: usize) -> f64 {
    let height = values[at];
    let mut left_min = height;
    for &v in values[..at].iter().rev() {
        if v > height {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = height;
    for &v in &values[at + 1..] {
        if v > height {
            break;
        }
        right_min = right_min.min(v);
    }
    height - left_min.max(right_min)
}

/// Topographic prominence of the local maximum at sample position `at`:
/// its height above the higher of the two minima reached on each side before
/// meeting a strictly taller sample or the boundary.
pub fn prominence(series: &IndexedSeries, at: usize) -> Result<f64> {
    let values = series.values();
    if !is_local_maximum(values, at) {
        return Err(Error::NotLocalMaximum { index: at });
    }
    Ok(prominence_unchecked(values, at))
}

/// Local maxima with prominence at least `cfg.min_prominence`, thinned so
/// that no two kept peaks are closer than `cfg.min_distance` in `k`. When two
/// candidates conflict the taller wins; equal heights favour the smaller `k`.
/// Returned in increasing `k`.
pub fn find_peaks(series: &IndexedSeries, cfg: &PeakConfig) -> Vec<Peak> {
    let values = series.values();
    let ks = series.ks();
    let mut candidates: Vec<Peak> = local_maxima(values)
        .into_iter()
        .map(|position| Peak {
            position,
            k: ks[position],
            height: values[position],
            prominence: prominence_unchecked(values, position),
        })
        .filter(|p| p.prominence >= cfg.min_prominence)
        .collect();

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        candidates[b]
            .height
            .total_cmp(&candidates[a].height)
            .then(candidates[a].k.cmp(&candidates[b].k))
    });
    let mut keep = vec![true; candidates.len()];
    let min_distance = cfg.min_distance as u64;
    for &i in &order {
        if !keep[i] {
            continue;
        }
        let k = candidates[i].k;
        // candidates are sorted by k, so scan outward until out of range
        for j in (0..i).rev() {
            if k - candidates[j].k >= min_distance {
                break;
            }
            keep[j] = false;
        }
        for j in i + 1..candidates.len() {
            if candidates[j].k - k >= min_distance {
                break;
            }
            keep[j] = false;
        }
    }
    let mut kept = keep.iter();
    candidates.retain(|_| *kept.next().unwrap());
    candidates
}

/// Automatic peaks and troughs of `series`.
pub fn find_extrema(
    series: &IndexedSeries,
    cfg_peaks: &PeakConfig,
    cfg_troughs: &PeakConfig,
) -> ExtremaSet {
    let peaks = find_peaks(series, cfg_peaks).iter().map(|p| p.k).collect();
    let troughs = find_peaks(&series.negated(), cfg_troughs)
        .iter()
        .map(|p| p.k)
        .collect();
    ExtremaSet {
        peaks,
        troughs,
        source: ExtremaSource::Automatic,
    }
}

/// The hand-picked peak and trough indices shipped with the crate.
pub fn curated_extrema() -> ExtremaSet {
    let rows = store::parse_extrema_table(CURATED_EXTREMA_V1.as_bytes(), "curated_extrema_v1.csv")
        .expect("bundled curated extrema file parses");
    ExtremaSet::from_rows(&rows, ExtremaSource::Manual).expect("bundled curated extrema are sorted")
}

/// One row of an extrema table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaRow {
    pub kind: ExtremaKind,
    pub k: u64,
    pub r_smooth: Option<f64>,
    pub r_raw: Option<f64>,
}

impl ExtremaSet {
    pub fn from_rows(rows: &[ExtremaRow], source: ExtremaSource) -> Result<Self> {
        let pick = |kind| {
            rows.iter()
                .filter(|r| r.kind == kind)
                .map(|r| r.k)
                .collect()
        };
        ExtremaSet::new(pick(ExtremaKind::Peak), pick(ExtremaKind::Trough), source)
    }
}

/// Looks up each selected `k` in the smoothed and raw series. Peaks come
/// first, then troughs, each in their stored order.
pub fn extrema_values(
    extrema: &ExtremaSet,
    smoothed: &IndexedSeries,
    raw: &IndexedSeries,
) -> Result<Vec<ExtremaRow>> {
    [ExtremaKind::Peak, ExtremaKind::Trough]
        .into_iter()
        .flat_map(|kind| extrema.of_kind(kind).iter().map(move |&k| (kind, k)))
        .map(|(kind, k)| {
            Ok(ExtremaRow {
                kind,
                k,
                r_smooth: Some(smoothed.try_value_at(k)?),
                r_raw: Some(raw.try_value_at(k)?),
            })
        })
        .collect()
}
