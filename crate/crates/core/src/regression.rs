//! Asymptotic growth-model fit.
//!
//! Fits `r_k ≈ A + B·(ln ln k / ln k) + C·(1 / ln k)` to exponent-ratio
//! samples by least squares, optionally with `A` held fixed. Growth of
//! `a_k = Θ(k^2 / ln k)` corresponds to `A = 2, B = -1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstsq::{self, Design};

/// Reference coefficients of the `k^2 / ln k` growth law.
pub const REFERENCE_A: f64 = 2.0;
pub const REFERENCE_B: f64 = -1.0;

/// `(k, r)` samples to fit; `k >= 3` and strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FitInput {
    label: String,
    points: Vec<(u64, f64)>,
}

impl FitInput {
    pub fn new(label: impl Into<String>, points: Vec<(u64, f64)>) -> Result<Self> {
        let label = label.into();
        if let Some(&(k, _)) = points.iter().find(|(k, _)| *k < 3) {
            return Err(Error::Precondition(format!(
                "fit input '{label}': k must be at least 3, got {k}"
            )));
        }
        if let Some(w) = points.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::Precondition(format!(
                "fit input '{label}': k must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
        if let Some(&(k, r)) = points.iter().find(|(_, r)| !r.is_finite()) {
            return Err(Error::Precondition(format!(
                "fit input '{label}': non-finite r = {r} at k = {k}"
            )));
        }
        Ok(FitInput { label, points })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    Full,
    DropLast,
    DropFirst,
}

impl Subset {
    fn apply<T>(self, items: &[T]) -> &[T] {
        match self {
            Subset::Full => items,
            Subset::DropLast => &items[..items.len().saturating_sub(1)],
            Subset::DropFirst => items.get(1..).unwrap_or(&[]),
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subset::Full => "full",
            Subset::DropLast => "drop_last",
            Subset::DropFirst => "drop_first",
        })
    }
}

/// Fitted coefficients; serializes as the fit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub label: String,
    pub subset: Subset,
    #[serde(rename = "fixed_A")]
    pub fixed_a: Option<f64>,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub k_values: Vec<u64>,
}

impl GrowthFit {
    pub fn predict(&self, k: u64) -> f64 {
        let [one, x1, x2] = regressors(k);
        self.a * one + self.b * x1 + self.c * x2
    }
}

/// Design row `[1, ln ln k / ln k, 1 / ln k]`.
pub fn regressors(k: u64) -> [f64; 3] {
    let lk = (k as f64).ln();
    [1.0, lk.ln() / lk, 1.0 / lk]
}

fn fit_points(
    label: &str,
    points: &[(u64, f64)],
    fixed_a: Option<f64>,
    subset: Subset,
) -> Result<GrowthFit> {
    let needed = if fixed_a.is_some() { 2 } else { 3 };
    if points.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: points.len(),
        });
    }
    let y: Vec<f64> = points.iter().map(|&(_, r)| r).collect();
    let (a, b, c, y_pred) = match fixed_a {
        None => {
            let rows: Vec<[f64; 3]> = points.iter().map(|&(k, _)| regressors(k)).collect();
            let design = Design::from_rows(&rows);
            let coef = lstsq::solve(&design, &y)?.coefficients;
            let pred = design.mul_vec(&coef);
            (coef[0], coef[1], coef[2], pred)
        }
        Some(a) => {
            let rows: Vec<[f64; 2]> = points
                .iter()
                .map(|&(k, _)| {
                    let [_, x1, x2] = regressors(k);
                    [x1, x2]
                })
                .collect();
            let design = Design::from_rows(&rows);
            let shifted: Vec<f64> = y.iter().map(|v| v - a).collect();
            let coef = lstsq::solve(&design, &shifted)?.coefficients;
            let pred = design.mul_vec(&coef).into_iter().map(|v| a + v).collect();
            (a, coef[0], coef[1], pred)
        }
    };

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(&y_pred).map(|(v, p)| (v - p).powi(2)).sum();
    let r_squared = if ss_tot != 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };

    Ok(GrowthFit {
        label: label.to_string(),
        subset,
        fixed_a,
        a,
        b,
        c,
        r_squared,
        n_points: points.len(),
        k_values: points.iter().map(|&(k, _)| k).collect(),
    })
}

/// Least-squares fit of the growth model on all of `input`.
pub fn fit_growth_model(input: &FitInput, fixed_a: Option<f64>) -> Result<GrowthFit> {
    fit_growth_model_on(input, fixed_a, Subset::Full)
}

pub fn fit_growth_model_on(
    input: &FitInput,
    fixed_a: Option<f64>,
    subset: Subset,
) -> Result<GrowthFit> {
    if let Some(a) = fixed_a.filter(|a| !a.is_finite()) {
        return Err(Error::Precondition(format!(
            "fixed A must be finite, got {a}"
        )));
    }
    fit_points(&input.label, subset.apply(&input.points), fixed_a, subset)
}

/// Refits on the full input, without its last sample, and without its first
/// sample, in that order.
pub fn robustness_sweep(input: &FitInput, fixed_a: Option<f64>) -> Result<Vec<GrowthFit>> {
    [Subset::Full, Subset::DropLast, Subset::DropFirst]
        .into_iter()
        .map(|subset| fit_growth_model_on(input, fixed_a, subset))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(a: f64, b: f64, c: f64, ks: &[u64]) -> FitInput {
        let pts = ks
            .iter()
            .map(|&k| {
                let [_, x1, x2] = regressors(k);
                (k, a + b * x1 + c * x2)
            })
            .collect();
        FitInput::new("synthetic", pts).unwrap()
    }

    #[test]
    fn three_point_interpolation() {
        let input = model(2.0, -1.0, 0.0, &[10, 1000, 100000]);
        let fit = fit_growth_model(&input, None).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-9);
        assert!((fit.b + 1.0).abs() < 1e-9);
        assert!(fit.c.abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
        assert_eq!(fit.subset, Subset::Full);
        assert_eq!(fit.n_points, 3);
    }

    #[test]
    fn point_count_preconditions() {
        let input = model(2.0, -1.0, 0.5, &[10, 100]);
        assert!(matches!(
            fit_growth_model(&input, None),
            Err(Error::TooFewPoints { needed: 3, got: 2 })
        ));
        assert!(fit_growth_model(&input, Some(2.0)).is_ok());
        let one = model(2.0, -1.0, 0.5, &[10]);
        assert!(matches!(
            fit_growth_model(&one, Some(2.0)),
            Err(Error::TooFewPoints { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn input_validation() {
        assert!(FitInput::new("x", vec![(2, 1.0)]).is_err());
        assert!(FitInput::new("x", vec![(5, 1.0), (4, 1.0)]).is_err());
        assert!(FitInput::new("x", vec![(5, f64::INFINITY)]).is_err());
        let input = model(2.0, -1.0, 0.5, &[10, 100, 1000]);
        assert!(fit_growth_model(&input, Some(f64::NAN)).is_err());
    }

    #[test]
    fn constant_response_has_unit_r_squared() {
        let input =
            FitInput::new("flat", vec![(10, 2.0), (20, 2.0), (40, 2.0), (80, 2.0)]).unwrap();
        let fit = fit_growth_model(&input, None).unwrap();
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn sweep_order_and_subsets() {
        let input = model(1.9, -0.7, -0.8, &[300, 500, 800, 1300, 2100]);
        let fits = robustness_sweep(&input, None).unwrap();
        let tags: Vec<Subset> = fits.iter().map(|f| f.subset).collect();
        assert_eq!(
            tags,
            vec![Subset::Full, Subset::DropLast, Subset::DropFirst]
        );
        assert_eq!(fits[1].k_values, vec![300, 500, 800, 1300]);
        assert_eq!(fits[2].k_values, vec![500, 800, 1300, 2100]);
        for f in &fits {
            assert!((f.a - 1.9).abs() < 1e-8, "{f:?}");
        }
    }

    #[test]
    fn report_field_names() {
        let input = model(2.0, -1.0, 0.0, &[10, 1000, 100000]);
        let fit = fit_growth_model(&input, Some(2.0)).unwrap();
        let json = serde_json::to_value(&fit).unwrap();
        for key in [
            "label",
            "subset",
            "fixed_A",
            "A",
            "B",
            "C",
            "r_squared",
            "n_points",
            "k_values",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["subset"], "full");
        assert_eq!(json["fixed_A"], 2.0);
    }
}
