use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{NumericsError, Result};
use crate::linalg::Matrix;
use crate::Scalar;

/// Dense, named, finite design matrix (rows are observations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix<T> {
    names: Vec<String>,
    values: Matrix<T>,
}

impl<T: Scalar> DesignMatrix<T> {
    pub fn new(names: Vec<String>, values: Matrix<T>) -> Result<Self> {
        if names.len() != values.cols() {
            return Err(NumericsError::DimensionMismatch(format!(
                "{} column names for {} columns",
                names.len(),
                values.cols()
            )));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(NumericsError::DuplicateColumn(n.clone()));
            }
        }
        for i in 0..values.rows() {
            if let Some(j) = values.row(i).iter().position(|v| !v.is_finite()) {
                return Err(NumericsError::NonFinite(format!(
                    "design row {i}, column `{}`",
                    names[j]
                )));
            }
        }
        Ok(Self { names, values })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<T>]) -> Result<Self> {
        let m = if rows.is_empty() {
            Matrix::zeros(0, names.len())
        } else {
            Matrix::from_rows(rows)?
        };
        Self::new(names, m)
    }

    /// Builds a matrix from named columns of equal length.
    pub fn from_columns(columns: Vec<(String, Vec<T>)>) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.1.len());
        let p = columns.len();
        let mut m = Matrix::zeros(n, p);
        let mut names = Vec::with_capacity(p);
        for (j, (name, col)) in columns.into_iter().enumerate() {
            if col.len() != n {
                return Err(NumericsError::DimensionMismatch(format!(
                    "column `{name}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
            names.push(name);
        }
        Self::new(names, m)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.values.cols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        self.values.row(i)
    }

    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.values.column(j)
    }

    /// `Xᵀ W X` with `W = diag(w)`.
    pub fn weighted_gram(&self, w: &[T]) -> Matrix<T> {
        let p = self.ncols();
        let mut g = Matrix::zeros(p, p);
        for (i, &wi) in w.iter().enumerate().take(self.nrows()) {
            if wi == T::zero() {
                continue;
            }
            let x = self.row(i);
            for a in 0..p {
                let xa = wi * x[a];
                if xa == T::zero() {
                    continue;
                }
                let grow = g.row_mut(a);
                for b in a..p {
                    grow[b] += xa * x[b];
                }
            }
        }
        g.symmetrize_from_upper();
        g
    }

    /// Names of columns that are (numerically) linear combinations of the
    /// columns before them, judged on rows with positive weight.
    pub fn collinear_columns(&self, w: &[T]) -> Vec<String> {
        let p = self.ncols();
        let mask: Vec<T> = w
            .iter()
            .map(|&x| if x > T::zero() { T::one() } else { T::zero() })
            .collect();
        let g = self.weighted_gram(&mask);
        let scale: Vec<T> = (0..p).map(|j| g[(j, j)].sqrt()).collect();
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
        let mut l = Matrix::<T>::zeros(p, p);
        let mut keep = vec![false; p];
        let mut bad = Vec::new();
        for j in 0..p {
            if scale[j] == T::zero() {
                bad.push(self.names[j].clone());
                continue;
            }
            let mut d = T::one();
            for k in 0..j {
                if keep[k] {
                    d -= l[(j, k)] * l[(j, k)];
                }
            }
            if d <= tol {
                bad.push(self.names[j].clone());
                continue;
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            keep[j] = true;
            for i in (j + 1)..p {
                if scale[i] == T::zero() {
                    continue;
                }
                let mut s = g[(i, j)] / (scale[i] * scale[j]);
                for k in 0..j {
                    if keep[k] {
                        s -= l[(i, k)] * l[(j, k)];
                    }
                }
                l[(i, j)] = s / djj;
            }
        }
        bad
    }
}
