//! Weighted multinomial logistic regression against a reference class,
//! fit by damped Newton iterations on the full coefficient block.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{NumericsError, Result};
use crate::linalg::{dot, Matrix};
use crate::Scalar;

/// Rows per accumulation chunk. Partial sums are combined in chunk order so
/// results do not depend on the thread count.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MultinomialOptions<T> {
    pub ridge: T,
    pub gradient_tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for MultinomialOptions<T> {
    fn default() -> Self {
        Self {
            ridge: T::lit(1e-8),
            gradient_tolerance: T::lit(1e-8),
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialFit<T> {
    pub n_classes: usize,
    pub reference: usize,
    pub columns: Vec<String>,
    /// One coefficient vector per non-reference class, in class order.
    pub coefficients: Vec<Vec<T>>,
    pub report: ConvergenceReport,
}

/// Likelihood pieces for a fixed data set; the objective is
/// `−(1/Σw) Σ wᵢ log P(yᵢ | xᵢ) + (ridge/2) ‖β‖²`.
pub struct MultinomialProblem<'a, T> {
    x: &'a DesignMatrix<T>,
    y: &'a [usize],
    w: &'a [T],
    n_classes: usize,
    reference: usize,
    ridge: T,
    total_weight: T,
}

impl<'a, T: Scalar> MultinomialProblem<'a, T> {
    pub fn new(
        x: &'a DesignMatrix<T>,
        y: &'a [usize],
        w: &'a [T],
        n_classes: usize,
        reference: usize,
        ridge: T,
    ) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n || w.len() != n {
            return Err(NumericsError::DimensionMismatch(format!(
                "{n} design rows, {} labels, {} weights",
                y.len(),
                w.len()
            )));
        }
        if n_classes < 2 || reference >= n_classes {
            return Err(NumericsError::InvalidInput(format!(
                "need >= 2 classes and a valid reference (got {n_classes} classes, reference {reference})"
            )));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(NumericsError::InvalidInput(format!("label {bad} out of range")));
        }
        if w.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(NumericsError::InvalidInput("weights must be finite and >= 0".into()));
        }
        let total_weight: T = w.iter().copied().sum();
        if !(total_weight > T::zero()) {
            return Err(NumericsError::InvalidInput("all weights are zero".into()));
        }
        Ok(Self {
            x,
            y,
            w,
            n_classes,
            reference,
            ridge,
            total_weight,
        })
    }

    pub fn n_parameters(&self) -> usize {
        (self.n_classes - 1) * self.x.ncols()
    }

    fn free_index(&self, class: usize) -> Option<usize> {
        match class.cmp(&self.reference) {
            std::cmp::Ordering::Less => Some(class),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(class - 1),
        }
    }

    fn chunk_ranges(&self) -> Vec<(usize, usize)> {
        let n = self.x.nrows();
        (0..n.div_ceil(CHUNK))
            .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n)))
            .collect()
    }

    pub fn objective(&self, beta: &[T]) -> T {
        let p = self.x.ncols();
        let km1 = self.n_classes - 1;
        let partial: Vec<T> = self
            .chunk_ranges()
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut probs = vec![T::zero(); km1];
                let mut s = T::zero();
                for i in lo..hi {
                    if self.w[i] == T::zero() {
                        continue;
                    }
                    let logz = log_softmax_free(self.x.row(i), beta, p, &mut probs);
                    let ll = match self.free_index(self.y[i]) {
                        Some(k) => dot(self.x.row(i), &beta[k * p..(k + 1) * p]) - logz,
                        None => -logz,
                    };
                    s -= self.w[i] * ll;
                }
                s
            })
            .collect();
        let nll: T = partial.into_iter().fold(T::zero(), |a, b| a + b) / self.total_weight;
        let half = T::lit(0.5);
        nll + half * self.ridge * beta.iter().map(|&b| b * b).sum::<T>()
    }

    pub fn gradient(&self, beta: &[T]) -> Vec<T> {
        self.gradient_and_hessian(beta, false).0
    }

    /// Gradient, and (when requested) the Hessian of the objective.
    pub fn gradient_and_hessian(&self, beta: &[T], with_hessian: bool) -> (Vec<T>, Option<Matrix<T>>) {
        let p = self.x.ncols();
        let km1 = self.n_classes - 1;
        let np = km1 * p;
        let partial: Vec<(Vec<T>, Option<Vec<T>>)> = self
            .chunk_ranges()
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut g = vec![T::zero(); np];
                let mut h = if with_hessian { Some(vec![T::zero(); np * np]) } else { None };
                let mut probs = vec![T::zero(); km1];
                let mut xx = vec![T::zero(); p * p];
                for i in lo..hi {
                    let wi = self.w[i];
                    if wi == T::zero() {
                        continue;
                    }
                    let x = self.x.row(i);
                    log_softmax_free(x, beta, p, &mut probs);
                    let yk = self.free_index(self.y[i]);
                    for k in 0..km1 {
                        let r = probs[k] - if yk == Some(k) { T::one() } else { T::zero() };
                        let c = wi * r;
                        for (gj, &xj) in g[k * p..(k + 1) * p].iter_mut().zip(x) {
                            *gj += c * xj;
                        }
                    }
                    if let Some(h) = h.as_mut() {
                        for a in 0..p {
                            for b in a..p {
                                xx[a * p + b] = x[a] * x[b];
                            }
                        }
                        for k in 0..km1 {
                            for l in k..km1 {
                                let c = if k == l {
                                    wi * probs[k] * (T::one() - probs[k])
                                } else {
                                    -wi * probs[k] * probs[l]
                                };
                                for a in 0..p {
                                    let row = (k * p + a) * np + l * p;
                                    for b in a..p {
                                        h[row + b] += c * xx[a * p + b];
                                    }
                                }
                            }
                        }
                    }
                }
                (g, h)
            })
            .collect();

        let mut g = vec![T::zero(); np];
        let mut h = if with_hessian { Some(vec![T::zero(); np * np]) } else { None };
        for (pg, ph) in partial {
            for (a, b) in g.iter_mut().zip(pg) {
                *a += b;
            }
            if let (Some(h), Some(ph)) = (h.as_mut(), ph) {
                for (a, b) in h.iter_mut().zip(ph) {
                    *a += b;
                }
            }
        }
        for (gj, &bj) in g.iter_mut().zip(beta) {
            *gj = *gj / self.total_weight + self.ridge * bj;
        }
        let hess = h.map(|h| {
            let mut m = Matrix::from_vec(np, np, h).expect("hessian shape");
            // Only the upper triangle of each block pair (k ≤ l, a ≤ b) was
            // filled; complete the symmetric matrix.
            for k in 0..km1 {
                for l in k..km1 {
                    for a in 0..p {
                        for b in 0..a {
                            let v = m[(k * p + b, l * p + a)];
                            m[(k * p + a, l * p + b)] = v;
                        }
                    }
                }
            }
            m.symmetrize_from_upper();
            for i in 0..np {
                for j in 0..np {
                    m[(i, j)] /= self.total_weight;
                }
                m[(i, i)] += self.ridge;
            }
            m
        });
        (g, hess)
    }
}

/// Fills `probs` with the non-reference class probabilities for one row and
/// returns `log Σ exp(η)` including the reference logit 0.
fn log_softmax_free<T: Scalar>(x: &[T], beta: &[T], p: usize, probs: &mut [T]) -> T {
    let mut m = T::zero();
    for (k, pk) in probs.iter_mut().enumerate() {
        let eta = dot(x, &beta[k * p..(k + 1) * p]);
        *pk = eta;
        if eta > m {
            m = eta;
        }
    }
    let mut z = (-m).exp();
    for pk in probs.iter_mut() {
        *pk = (*pk - m).exp();
        z += *pk;
    }
    for pk in probs.iter_mut() {
        *pk /= z;
    }
    m + z.ln()
}

/// Fits `log(P(Y=k|x)/P(Y=ref|x)) = x·β_k` for every non-reference class.
pub fn fit_multinomial<T: Scalar>(
    x: &DesignMatrix<T>,
    y: &[usize],
    w: &[T],
    n_classes: usize,
    reference: usize,
    opts: &MultinomialOptions<T>,
) -> Result<MultinomialFit<T>> {
    let problem = MultinomialProblem::new(x, y, w, n_classes, reference, opts.ridge)?;
    let mut present = vec![false; n_classes];
    for (&c, &wi) in y.iter().zip(w) {
        if wi > T::zero() {
            present[c] = true;
        }
    }
    if let Some(class) = present.iter().position(|&p| !p) {
        return Err(NumericsError::MissingClass { class });
    }
    let collinear = x.collinear_columns(w);
    if !collinear.is_empty() {
        return Err(NumericsError::RankDeficient { columns: collinear });
    }

    let p = x.ncols();
    let np = problem.n_parameters();
    let mut beta = vec![T::zero(); np];
    let mut f = problem.objective(&beta);
    let mut gnorm = T::infinity();
    for iter in 0..=opts.max_iterations {
        let (g, h) = problem.gradient_and_hessian(&beta, true);
        gnorm = g.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        if gnorm <= opts.gradient_tolerance {
            // Under separation the gradient vanishes while the Newton step
            // stays of order one: the likelihood has no finite maximiser.
            let h = h.as_ref().expect("hessian requested");
            let bmax = beta.iter().fold(T::one(), |a, &b| a.max(b.abs()));
            let flat = match h.cholesky() {
                Ok(ch) => ch.solve(&g).iter().any(|s| s.abs() > T::lit(1e-3) * bmax),
                Err(_) => true,
            };
            if flat {
                break;
            }
            return Ok(MultinomialFit {
                n_classes,
                reference,
                columns: x.names().to_vec(),
                coefficients: beta.chunks(p).map(<[T]>::to_vec).collect(),
                report: ConvergenceReport {
                    iterations: iter,
                    gradient_norm: gnorm.to_f64_lossy(),
                    objective: f.to_f64_lossy(),
                },
            });
        }
        if iter == opts.max_iterations {
            break;
        }
        let h = h.expect("hessian requested");
        let step = h.cholesky()?.solve(&g);
        let slope: T = -dot(&g, &step);
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..50 {
            let cand: Vec<T> = beta.iter().zip(&step).map(|(&b, &s)| b - t * s).collect();
            let fc = problem.objective(&cand);
            if fc.is_finite() && fc <= f + T::lit(1e-4) * t * slope {
                beta = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= T::lit(0.5);
        }
        if !accepted {
            // No decrease is available in floating point; the gradient test
            // above decides whether this point is acceptable.
            let (g, _) = problem.gradient_and_hessian(&beta, false);
            gnorm = g.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
            break;
        }
    }
    Err(NumericsError::NotConverged {
        iterations: opts.max_iterations,
        gradient_norm: gnorm.to_f64_lossy(),
    })
}

impl<T: Scalar> MultinomialFit<T> {
    fn check_columns(&self, x: &DesignMatrix<T>) -> Result<()> {
        if x.names() != self.columns.as_slice() {
            return Err(NumericsError::DimensionMismatch(format!(
                "design columns [{}] do not match fitted columns [{}]",
                x.names().join(", "),
                self.columns.join(", ")
            )));
        }
        Ok(())
    }

    /// Class probabilities for one feature row (length `n_classes`).
    pub fn predict_row(&self, x: &[T]) -> Vec<T> {
        let km1 = self.n_classes - 1;
        let mut etas = Vec::with_capacity(km1);
        for b in &self.coefficients {
            etas.push(dot(x, b));
        }
        let m = etas.iter().fold(T::zero(), |a, &b| a.max(b));
        let mut out = vec![T::zero(); self.n_classes];
        let mut z = T::zero();
        let mut k = 0;
        for (c, slot) in out.iter_mut().enumerate() {
            let e = if c == self.reference {
                (-m).exp()
            } else {
                let v = (etas[k] - m).exp();
                k += 1;
                v
            };
            *slot = e;
            z += e;
        }
        for v in &mut out {
            *v /= z;
        }
        out
    }

    /// `n × K` probability matrix.
    pub fn predict(&self, x: &DesignMatrix<T>) -> Result<Matrix<T>> {
        self.check_columns(x)?;
        let mut out = Matrix::zeros(x.nrows(), self.n_classes);
        for i in 0..x.nrows() {
            out.row_mut(i).copy_from_slice(&self.predict_row(x.row(i)));
        }
        Ok(out)
    }

    pub fn flat_coefficients(&self) -> Vec<T> {
        self.coefficients.iter().flatten().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn intercept_only_recovers_log_odds() {
        let n = 400;
        let rows = vec![vec![1.0f64]; n];
        let x = DesignMatrix::from_rows(names(&["(intercept)"]), &rows).unwrap();
        let y: Vec<usize> = (0..n).map(|i| usize::from(i % 4 == 0)).collect();
        let fit = fit_multinomial(&x, &y, &vec![1.0; n], 2, 0, &Default::default()).unwrap();
        assert!((fit.coefficients[0][0] - (0.25f64 / 0.75).ln()).abs() < 1e-6);
    }

    #[test]
    fn zero_coefficients_give_uniform_rows() {
        let fit = MultinomialFit::<f64> {
            n_classes: 4,
            reference: 2,
            columns: names(&["a", "b"]),
            coefficients: vec![vec![0.0, 0.0]; 3],
            report: ConvergenceReport { iterations: 0, gradient_norm: 0.0, objective: 0.0 },
        };
        for p in fit.predict_row(&[0.3, -2.0]) {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn saturated_logit_dominates() {
        let fit = MultinomialFit::<f64> {
            n_classes: 3,
            reference: 0,
            columns: names(&["a"]),
            coefficients: vec![vec![50.0], vec![0.0]],
            report: ConvergenceReport { iterations: 0, gradient_norm: 0.0, objective: 0.0 },
        };
        let p = fit.predict_row(&[1.0]);
        assert!(p[1] > 1.0 - 1e-15);
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0 + 1e-15));
    }

    #[test]
    fn missing_class_is_reported() {
        let rows = vec![vec![1.0f64]; 4];
        let x = DesignMatrix::from_rows(names(&["c"]), &rows).unwrap();
        let err = fit_multinomial(&x, &[0, 1, 0, 1], &[1.0; 4], 3, 0, &Default::default()).unwrap_err();
        assert_eq!(err, NumericsError::MissingClass { class: 2 });
    }

    #[test]
    fn rank_deficiency_names_columns() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0, i as f64, 3.0 * i as f64]).collect();
        let x = DesignMatrix::from_rows(names(&["c", "x", "x3"]), &rows).unwrap();
        let y: Vec<usize> = (0..20).map(|i| i % 2).collect();
        match fit_multinomial(&x, &y, &[1.0; 20], 2, 0, &Default::default()) {
            Err(NumericsError::RankDeficient { columns }) => assert_eq!(columns, vec!["x3"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn separation_reports_nonconvergence() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0, i as f64 - 9.5]).collect();
        let x = DesignMatrix::from_rows(names(&["c", "x"]), &rows).unwrap();
        let y: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let opts = MultinomialOptions { ridge: 0.0, max_iterations: 30, ..Default::default() };
        assert!(matches!(
            fit_multinomial(&x, &y, &[1.0; 20], 2, 0, &opts),
            Err(NumericsError::NotConverged { .. })
        ));
    }
}
