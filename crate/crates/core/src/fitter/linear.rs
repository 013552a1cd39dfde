//! Closed-form least squares through a Householder QR factorization.

use nalgebra::{DMatrix, DVector};

use crate::dataset::FeatureMatrix;
use crate::error::FitError;
use crate::models::{LinearParams, PolynomialParams};

/// Relative threshold on `|R_ii|` below which a column counts as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Solves `min ‖A w − y‖` for a row-major design matrix with `cols` columns.
pub fn least_squares(design: &[f64], cols: usize, y: &[f64]) -> Result<Vec<f64>, FitError> {
    let rows = y.len();
    if rows < cols {
        return Err(FitError::TooFewRows { rows, params: cols });
    }
    let a = DMatrix::from_row_slice(rows, cols, design);
    // Column equilibration keeps the rank test meaningful when columns
    // differ by orders of magnitude (x2 vs x2²).
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    if let Some(rank) = norms.iter().position(|n| *n == 0.0) {
        return Err(FitError::RankDeficient { rank, cols });
    }
    let mut scaled = a;
    for (j, n) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / n);
    }
    let qr = scaled.qr();
    let r = qr.r();
    let max_diag = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let rank = (0..cols)
        .filter(|&i| r[(i, i)].abs() > RANK_TOLERANCE * max_diag)
        .count();
    if rank < cols {
        return Err(FitError::RankDeficient { rank, cols });
    }
    let qty = qr.q().transpose() * DVector::from_column_slice(y);
    let w = r
        .solve_upper_triangular(&qty)
        .ok_or(FitError::RankDeficient { rank, cols })?;
    Ok(w.iter().zip(&norms).map(|(v, n)| v / n).collect())
}

pub fn fit_linear(m: &FeatureMatrix) -> Result<LinearParams, FitError> {
    let design: Vec<f64> = m
        .rows
        .iter()
        .flat_map(|x| [1.0, x[0], x[1], x[2]])
        .collect();
    let w = least_squares(&design, 4, &m.y)?;
    Ok(LinearParams {
        intercept: w[0],
        weights: [w[1], w[2], w[3]],
    })
}

pub fn fit_polynomial2(m: &FeatureMatrix) -> Result<PolynomialParams, FitError> {
    let design: Vec<f64> = m.rows.iter().flat_map(PolynomialParams::basis).collect();
    let w = least_squares(&design, PolynomialParams::LEN, &m.y)?;
    let mut coef = [0.0; 10];
    coef.copy_from_slice(&w);
    Ok(PolynomialParams { coef })
}
