//! Small dense least squares by Householder QR.

use crate::error::{Error, Result};

/// Designs whose column-equilibrated condition estimate exceeds this are
/// rejected as numerically rank-deficient.
pub const MAX_CONDITION: f64 = 1e12;

/// Dense row-major matrix with a fixed column count.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn from_rows<const P: usize>(rows: &[[f64; P]]) -> Self {
        Design {
            rows: rows.len(),
            cols: P,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    fn get_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * x[c]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub coefficients: Vec<f64>,
    /// 1-norm condition estimate of the column-equilibrated triangular factor.
    pub condition: f64,
}

/// Minimises `|A x - y|_2` for a tall, full-rank `A`.
pub fn solve(a: &Design, y: &[f64]) -> Result<Solution> {
    let (m, p) = (a.rows, a.cols);
    if y.len() != m {
        return Err(Error::Precondition(format!(
            "right-hand side has {} entries, design has {m} rows",
            y.len()
        )));
    }
    if m < p {
        return Err(Error::TooFewPoints { needed: p, got: m });
    }
    let mut r = a.clone();
    let mut rhs = y.to_vec();
    let col_norms: Vec<f64> = (0..p)
        .map(|c| a.column(c).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    for j in 0..p {
        let norm = (j..m).map(|i| r.get(i, j).powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::SingularDesign {
                condition: f64::INFINITY,
            });
        }
        let alpha = if r.get(j, j) > 0.0 { -norm } else { norm };
        // v = x - alpha e_1, stored in place below the diagonal
        let mut v: Vec<f64> = (j..m).map(|i| r.get(i, j)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..p {
            let dot: f64 = (j..m).map(|i| v[i - j] * r.get(i, c)).sum();
            let scale = 2.0 * dot / vnorm2;
            for i in j..m {
                *r.get_mut(i, c) -= scale * v[i - j];
            }
        }
        let dot: f64 = (j..m).map(|i| v[i - j] * rhs[i]).sum();
        let scale = 2.0 * dot / vnorm2;
        for i in j..m {
            rhs[i] -= scale * v[i - j];
        }
    }

    let condition = triangular_condition(&r, &col_norms);
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularDesign { condition });
    }

    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let tail: f64 = (i + 1..p).map(|c| r.get(i, c) * x[c]).sum();
        x[i] = (rhs[i] - tail) / r.get(i, i);
    }
    Ok(Solution {
        coefficients: x,
        condition,
    })
}

/// `|R D^-1|_1 |D R^-1|_1` where `D` holds the original column norms.
fn triangular_condition(r: &Design, col_norms: &[f64]) -> f64 {
    let p = r.cols;
    if col_norms.contains(&0.0) || (0..p).any(|i| r.get(i, i) == 0.0) {
        return f64::INFINITY;
    }
    // scaled upper triangle S = R D^-1
    let s = |i: usize, c: usize| {
        if c >= i {
            r.get(i, c) / col_norms[c]
        } else {
            0.0
        }
    };
    let norm1 = |f: &dyn Fn(usize, usize) -> f64| {
        (0..p)
            .map(|c| (0..p).map(|i| f(i, c).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    // invert S column by column with back substitution
    let mut inv = vec![0.0; p * p];
    for c in 0..p {
        for i in (0..p).rev() {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let tail: f64 = (i + 1..p).map(|t| s(i, t) * inv[t * p + c]).sum();
            inv[i * p + c] = (rhs - tail) / s(i, i);
        }
    }
    norm1(&s) * norm1(&|i, c| inv[i * p + c])
}
