//! Dense Cholesky factorization and correlated Gaussian sampling.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Diagonal loadings tried in order until the factorization succeeds.
pub const JITTER_LADDER: [f64; 5] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6];

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(invalid("ragged rows"));
        }
        Self::from_row_major(r, c, rows.iter().flat_map(|row| row.iter().copied()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn matmul_transpose_self(&self) -> DenseMatrix {
        let n = self.rows;
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyResult {
    /// Lower-triangular factor `L` with `L Lᵀ = m + jitter_applied·I`.
    pub factor: DenseMatrix,
    pub jitter_applied: f64,
}

/// Factors a symmetric positive-definite matrix, adding the smallest jitter
/// from [`JITTER_LADDER`] (capped at `max_jitter`) that makes it succeed.
pub fn cholesky(m: &DenseMatrix, max_jitter: f64) -> Result<CholeskyResult> {
    if !m.is_square() {
        return Err(invalid(format!("cholesky needs a square matrix, got {}x{}", m.rows, m.cols)));
    }
    let n = m.rows;
    let tol = 1e-12 * m.max_abs();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    for &jitter in JITTER_LADDER.iter().filter(|&&j| j <= max_jitter) {
        if let Some(factor) = try_factor(m, jitter) {
            return Ok(CholeskyResult {
                factor,
                jitter_applied: jitter,
            });
        }
    }
    Err(Error::NotPositiveDefinite { max_jitter })
}

fn try_factor(m: &DenseMatrix, jitter: f64) -> Option<DenseMatrix> {
    let n = m.rows;
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)] + jitter;
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Draws `sigma · L · x` with `x` i.i.d. standard normal.
pub fn correlated_gaussian<R: Rng + ?Sized>(chol: &CholeskyResult, sigma: f64, rng: &mut R) -> Vec<f64> {
    let l = &chol.factor;
    let n = l.rows();
    let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    (0..n)
        .map(|i| sigma * l.row(i)[..=i].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}
