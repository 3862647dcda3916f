//! Weighted least squares.

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{NumericsError, Result};
use crate::linalg::{least_squares, Matrix};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WlsFit<T> {
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    pub residual_sum_of_squares: T,
}

impl<T: Scalar> WlsFit<T> {
    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        row.iter().zip(&self.coefficients).map(|(&x, &b)| x * b).sum()
    }
}

/// Minimises `Σ w_i (y_i − x_iᵀβ)²` by QR on `√W X`.
pub fn fit_wls<T: Scalar>(x: &DesignMatrix<T>, y: &[T], w: &[T]) -> Result<WlsFit<T>> {
    let n = x.nrows();
    if y.len() != n || w.len() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "{n} rows, {} responses, {} weights",
            y.len(),
            w.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite("response".into()));
    }
    if w.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
        return Err(NumericsError::InvalidInput("weights must be finite and >= 0".into()));
    }
    let collinear = x.collinear_columns(w);
    if !collinear.is_empty() {
        return Err(NumericsError::RankDeficient { columns: collinear });
    }
    let p = x.ncols();
    let mut a = Matrix::zeros(n, p);
    let mut b = vec![T::zero(); n];
    for i in 0..n {
        let sw = w[i].sqrt();
        for (j, &v) in x.row(i).iter().enumerate() {
            a[(i, j)] = sw * v;
        }
        b[i] = sw * y[i];
    }
    let coefficients = least_squares(&a, &b)?;
    let rss = (0..n)
        .map(|i| {
            let r = y[i] - dot_row(x.row(i), &coefficients);
            w[i] * r * r
        })
        .sum();
    Ok(WlsFit {
        names: x.names().to_vec(),
        coefficients,
        residual_sum_of_squares: rss,
    })
}

fn dot_row<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
