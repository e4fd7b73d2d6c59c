//! Figure-data export for the external renderer.
//!
//! Each figure is a long-format CSV (`layer,k,x,y`) plus a JSON spec that
//! names the figure, the number of leading samples skipped, the axis labels
//! and any reference lines. The renderer plots these arrays verbatim.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrema::ExtremaSet;
use crate::sequence::StanleySequence;
use crate::series::{self, IndexedSeries, SmoothingConfig};
use crate::store::{self, format_f64};

pub const FIGURE_DATA_HEADER: &str = "layer,k,x,y";

/// Leading samples dropped from the deviation and peaks/troughs plots.
pub const DEFAULT_SKIP: usize = 20;
/// Horizontal upper reference line on the deviation plot.
pub const UPPER_LINE_Y: f64 = -0.64;
/// Slanted lower reference line `y = slope * x + intercept` on the deviation plot.
pub const LOWER_LINE_SLOPE: f64 = -0.1;
pub const LOWER_LINE_INTERCEPT: f64 = -0.14;
/// Anchor point the slanted line is drawn through.
pub const LOWER_LINE_ANCHOR: (f64, f64) = (7.0, -0.84);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    WindowedExponent,
    PeaksTroughs,
    Deviation,
}

impl FigureId {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::WindowedExponent => "windowed_exponent",
            FigureId::PeaksTroughs => "peaks_troughs",
            FigureId::Deviation => "deviation",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "windowed_exponent" | "windowed" => Ok(FigureId::WindowedExponent),
            "peaks_troughs" | "peaks" => Ok(FigureId::PeaksTroughs),
            "deviation" => Ok(FigureId::Deviation),
            other => Err(Error::Figure {
                figure: other.to_string(),
                message: "unknown figure id".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Annotation {
    Hline {
        y: f64,
    },
    Affine {
        slope: f64,
        intercept: f64,
        x0: f64,
        y0: f64,
    },
}

impl Annotation {
    /// The slanted line through `(x0, slope * x0 + intercept)`.
    pub fn affine(slope: f64, intercept: f64, x0: f64) -> Self {
        Annotation::Affine {
            slope,
            intercept,
            x0,
            y0: slope * x0 + intercept,
        }
    }

    pub fn y_at(&self, x: f64) -> f64 {
        match *self {
            Annotation::Hline { y } => y,
            Annotation::Affine {
                slope, intercept, ..
            } => slope * x + intercept,
        }
    }
}

/// Deviation-plot reference lines.
pub fn default_annotations() -> Vec<Annotation> {
    vec![
        Annotation::Hline { y: UPPER_LINE_Y },
        Annotation::Affine {
            slope: LOWER_LINE_SLOPE,
            intercept: LOWER_LINE_INTERCEPT,
            x0: LOWER_LINE_ANCHOR.0,
            y0: LOWER_LINE_ANCHOR.1,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub figure_id: FigureId,
    pub skip: usize,
    pub annotations: Vec<Annotation>,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Layer names in drawing order.
    pub layers: Vec<String>,
}

impl FigureSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.annotations.is_empty() && self.figure_id != FigureId::Deviation {
            return Err(Error::Figure {
                figure: self.figure_id.to_string(),
                message: "annotations are only allowed on the deviation figure".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub layer: String,
    pub k: u64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub spec: FigureSpec,
    pub rows: Vec<FigureRow>,
}

impl FigureData {
    pub fn layer(&self, name: &str) -> impl Iterator<Item = &FigureRow> + '_ {
        let name = name.to_string();
        self.rows.iter().filter(move |r| r.layer == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(40 * self.rows.len() + 16);
        out.push_str(FIGURE_DATA_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.layer,
                r.k,
                format_f64(r.x),
                format_f64(r.y)
            ));
        }
        out
    }

    /// Writes the CSV and the spec JSON.
    pub fn save(&self, data_path: &Path, spec_path: &Path) -> Result<()> {
        self.spec.validate()?;
        if let Some(parent) = data_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(data_path, self.to_csv()).map_err(|e| Error::io(data_path, e))?;
        store::write_json(spec_path, &self.spec)
    }
}

fn push_series(rows: &mut Vec<FigureRow>, layer: &str, s: &IndexedSeries, x: impl Fn(u64) -> f64) {
    rows.extend(s.points().map(|(k, y)| FigureRow {
        layer: layer.to_string(),
        k,
        x: x(k),
        y,
    }));
}

/// Windowed local exponent against `k`.
pub fn windowed_exponent_figure(seq: &StanleySequence, window: usize) -> Result<FigureData> {
    let alpha = series::windowed_exponent(seq, window)?;
    let mut rows = Vec::with_capacity(alpha.len());
    push_series(&mut rows, "alpha", &alpha, |k| k as f64);
    Ok(FigureData {
        spec: FigureSpec {
            figure_id: FigureId::WindowedExponent,
            skip: 0,
            annotations: vec![],
            title: format!(
                "Stanley sequence {}: windowed local exponent (w={window})",
                seq.seed()
            ),
            x_label: "k".into(),
            y_label: "local exponent alpha_k^(w)".into(),
            layers: vec!["alpha".into()],
        },
        rows,
    })
}

/// Deviation `f(k)` against `ln k` with the leading `skip` samples dropped.
pub fn deviation_figure(
    seq: &StanleySequence,
    skip: usize,
    annotations: Vec<Annotation>,
) -> Result<FigureData> {
    let f = series::deviation_series(seq)?.trimmed(skip, 0);
    let mut rows = Vec::with_capacity(f.len());
    push_series(&mut rows, "deviation", &f, |k| (k as f64).ln());
    let spec = FigureSpec {
        figure_id: FigureId::Deviation,
        skip,
        annotations,
        title: "Deviation from a_k ~ k^2 / log k".into(),
        x_label: "log k".into(),
        y_label: "log a_k - 2 log k + log log k".into(),
        layers: vec!["deviation".into()],
    };
    spec.validate()?;
    Ok(FigureData { spec, rows })
}

/// Raw and smoothed `r_k` (both trimmed by `skip` at each end) with scatter
/// layers for the selected peaks and troughs on the smoothed curve.
pub fn peaks_troughs_figure(
    seq: &StanleySequence,
    smoothing: &SmoothingConfig,
    extrema: &ExtremaSet,
    skip: usize,
) -> Result<FigureData> {
    let raw = series::exponent_ratio(seq)?;
    let smooth = series::moving_average(&raw, smoothing)?;
    extrema.check_domain(&smooth)?;
    let mut rows = Vec::with_capacity(2 * raw.len());
    push_series(&mut rows, "raw", &raw.trimmed(skip, skip), |k| k as f64);
    push_series(&mut rows, "smoothed", &smooth.trimmed(skip, skip), |k| {
        k as f64
    });
    for (layer, ks) in [("peaks", extrema.peaks()), ("troughs", extrema.troughs())] {
        for &k in ks {
            rows.push(FigureRow {
                layer: layer.into(),
                k,
                x: k as f64,
                y: smooth.try_value_at(k)?,
            });
        }
    }
    Ok(FigureData {
        spec: FigureSpec {
            figure_id: FigureId::PeaksTroughs,
            skip,
            annotations: vec![],
            title: "Smoothed r_k with peaks/troughs".into(),
            x_label: "k".into(),
            y_label: "smoothed r_k".into(),
            layers: vec![
                "raw".into(),
                "smoothed".into(),
                "peaks".into(),
                "troughs".into(),
            ],
        },
        rows,
    })
}
