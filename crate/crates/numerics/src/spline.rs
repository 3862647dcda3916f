//! Cubic B-spline bases with quantile knots and a second-order
//! divided-difference penalty.

use serde::{Deserialize, Serialize};

use crate::error::{NumericsError, Result};
use crate::linalg::Matrix;
use crate::Scalar;

pub const CUBIC: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSplineBasis<T> {
    /// Full clamped knot vector (boundary knots repeated `degree + 1` times).
    knots: Vec<T>,
    degree: usize,
}

impl<T: Scalar> BSplineBasis<T> {
    /// Clamped basis on `[lower, upper]` with the given strictly interior knots.
    pub fn new(lower: T, upper: T, interior: &[T], degree: usize) -> Result<Self> {
        if !(lower < upper) {
            return Err(NumericsError::InvalidInput(format!(
                "spline range is empty: [{lower}, {upper}]"
            )));
        }
        if interior.windows(2).any(|w| !(w[0] < w[1])) || interior.iter().any(|&k| !(k > lower && k < upper)) {
            return Err(NumericsError::InvalidInput(
                "interior knots must be strictly increasing and inside the range".into(),
            ));
        }
        let mut knots = vec![lower; degree + 1];
        knots.extend_from_slice(interior);
        knots.extend(std::iter::repeat_n(upper, degree + 1));
        Ok(Self { knots, degree })
    }

    /// Cubic basis with up to `n_interior` knots at the empirical quantiles
    /// of `values` (duplicates collapsed).
    pub fn from_quantiles(values: &[T], n_interior: usize) -> Result<Self> {
        let mut sorted: Vec<T> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if sorted.is_empty() {
            return Err(NumericsError::InvalidInput("no finite values for spline knots".into()));
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let lower = sorted[0];
        let upper = sorted[sorted.len() - 1];
        if !(lower < upper) {
            return Err(NumericsError::InvalidInput(
                "spline input is constant; a smooth term needs at least two distinct values".into(),
            ));
        }
        let n = sorted.len();
        let mut interior: Vec<T> = Vec::with_capacity(n_interior);
        for k in 1..=n_interior {
            let pos = k as f64 / (n_interior + 1) as f64 * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = T::lit(pos - lo as f64);
            let q = sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
            if q > lower && q < upper && interior.last().is_none_or(|&last| q > last) {
                interior.push(q);
            }
        }
        Self::new(lower, upper, &interior, CUBIC)
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn lower(&self) -> T {
        self.knots[0]
    }

    pub fn upper(&self) -> T {
        self.knots[self.knots.len() - 1]
    }

    /// Index of the first non-zero basis function and its `degree + 1`
    /// values at `x`. Inputs outside the range are clamped to the boundary.
    pub fn evaluate_sparse(&self, x: T) -> (usize, Vec<T>) {
        let d = self.degree;
        let x = x.max(self.lower()).min(self.upper());
        let m = self.knots.len();
        // Knot span μ with t_μ ≤ x < t_{μ+1}, using the last non-empty span at the top.
        let mut mu = d;
        let last = m - d - 2;
        if x >= self.knots[last + 1] {
            mu = last;
        } else {
            while mu < last && x >= self.knots[mu + 1] {
                mu += 1;
            }
        }
        let t = &self.knots;
        let mut b = vec![T::zero(); d + 1];
        b[0] = T::one();
        for j in 1..=d {
            let mut saved = T::zero();
            for r in 0..j {
                let left = t[mu + 1 + r - j];
                let right = t[mu + 1 + r];
                let denom = right - left;
                let temp = if denom > T::zero() { b[r] / denom } else { T::zero() };
                b[r] = saved + (right - x) * temp;
                saved = (x - left) * temp;
            }
            b[j] = saved;
        }
        (mu - d, b)
    }

    pub fn evaluate(&self, x: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        let (start, vals) = self.evaluate_sparse(x);
        for (k, v) in vals.into_iter().enumerate() {
            out[start + k] = v;
        }
        out
    }

    /// Knot averages; the coefficient vector `c_j = a + b·g_j` reproduces the
    /// straight line `a + b·x`.
    pub fn greville(&self) -> Vec<T> {
        let d = T::from_usize(self.degree).expect("degree");
        (0..self.dim())
            .map(|j| self.knots[j + 1..=j + self.degree].iter().copied().sum::<T>() / d)
            .collect()
    }

    /// `Dᵀ D` where `D` takes second divided differences of the coefficients
    /// over the Greville abscissae. Its null space is exactly the linear
    /// functions of `x`.
    pub fn penalty(&self) -> Matrix<T> {
        let k = self.dim();
        let g = self.greville();
        let mut d = Matrix::zeros(k.saturating_sub(2), k);
        let two = T::lit(2.0);
        for j in 0..k.saturating_sub(2) {
            let h0 = g[j + 1] - g[j];
            let h1 = g[j + 2] - g[j + 1];
            let span = (g[j + 2] - g[j]) / two;
            d[(j, j)] = T::one() / (h0 * span);
            d[(j, j + 1)] = -(T::one() / h0 + T::one() / h1) / span;
            d[(j, j + 2)] = T::one() / (h1 * span);
        }
        d.transpose().matmul(&d).expect("penalty shape")
    }
}

/// A fitted one-dimensional smooth `s(x) = B(x)·c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineSmoother<T> {
    pub basis: BSplineBasis<T>,
    pub lambda: T,
    pub coefficients: Vec<T>,
}

impl<T: Scalar> SplineSmoother<T> {
    pub fn value(&self, x: T) -> T {
        let (start, vals) = self.basis.evaluate_sparse(x);
        vals.iter()
            .enumerate()
            .map(|(k, &v)| v * self.coefficients[start + k])
            .sum()
    }
}
