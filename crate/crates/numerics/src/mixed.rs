//! Linear models with crossed varying intercepts,
//!
//! ```text
//! y = Xβ + Σ_g Z_g u_g + ε,   u_g ~ N(0, σ²_g I),   ε_i ~ N(0, σ²/w_i)
//! ```
//!
//! Variance components are estimated by restricted maximum likelihood. With
//! relative scales `θ_g = σ_g/σ` and spherical effects `u_g = θ_g v_g`, the
//! residual variance profiles out and the criterion is
//!
//! ```text
//! d(θ) = log det M(θ) + (n − p) log r²(θ)
//! M(θ) = S A S + diag(1_q, 0_p),   A = [ZᵀWZ ZᵀWX; XᵀWZ XᵀWX],   S = diag(θ ⊗ 1, 1_p)
//! ```
//!
//! where `r²` is the penalized residual sum of squares at the joint solution
//! for `(v, β)`. `d` is minimised over `θ ≥ 0` by projected Newton steps with
//! an analytic gradient. The intercepts returned are the conditional modes
//! (BLUPs) `u_g = θ_g v̂_g`.

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{NumericsError, Result};
use crate::linalg::{dot, Matrix};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFactor {
    pub name: String,
    pub levels: Vec<String>,
    /// Level index of every observation.
    pub codes: Vec<usize>,
}

impl GroupFactor {
    /// Builds a factor from per-observation labels, levels in first-seen order.
    pub fn from_labels<S: AsRef<str>>(name: &str, labels: &[S]) -> Self {
        let mut levels: Vec<String> = Vec::new();
        let mut index = std::collections::HashMap::new();
        let codes = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                *index.entry(l.to_string()).or_insert_with(|| {
                    levels.push(l.to_string());
                    levels.len() - 1
                })
            })
            .collect();
        Self {
            name: name.to_string(),
            levels,
            codes,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MixedOptions {
    /// Relative change in every variance component that ends the search.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MixedOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponents<T> {
    pub factor: String,
    pub variance: T,
    pub levels: Vec<String>,
    /// Shrunken intercept per level; levels without observations get 0.
    pub intercepts: Vec<T>,
    pub counts: Vec<usize>,
}

impl<T: Scalar> VarianceComponents<T> {
    pub fn intercept(&self, level: &str) -> Option<T> {
        self.levels.iter().position(|l| l == level).map(|i| self.intercepts[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaryingInterceptFit<T> {
    pub fixed_names: Vec<String>,
    pub fixed: Vec<T>,
    pub factors: Vec<VarianceComponents<T>>,
    pub residual_variance: T,
    pub reml_criterion: f64,
    pub iterations: usize,
    pub n_obs: usize,
}

impl<T: Scalar> VaryingInterceptFit<T> {
    pub fn factor(&self, name: &str) -> Option<&VarianceComponents<T>> {
        self.factors.iter().find(|f| f.factor == name)
    }
}

/// Sufficient statistics of the model, from which the profiled REML
/// criterion and its gradient are evaluated for any `θ`.
pub struct RemlProfile<T> {
    a: Matrix<T>,
    b: Vec<T>,
    yy: T,
    n: usize,
    p: usize,
    q: usize,
    /// Block of each of the first `q` coordinates.
    block: Vec<usize>,
    offsets: Vec<usize>,
    factors: Vec<GroupFactor>,
    counts: Vec<Vec<usize>>,
    fixed_names: Vec<String>,
}

pub struct RemlEval<T> {
    pub criterion: T,
    pub r2: T,
    /// `(v̂, β̂)` stacked.
    solution: Vec<T>,
    inverse: Option<Matrix<T>>,
}

impl<T: Scalar> RemlProfile<T> {
    pub fn new(y: &[T], x: &DesignMatrix<T>, groups: &[GroupFactor], w: &[T]) -> Result<Self> {
        let n = y.len();
        if x.nrows() != n || w.len() != n {
            return Err(NumericsError::DimensionMismatch(format!(
                "{n} responses, {} design rows, {} weights",
                x.nrows(),
                w.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite("response".into()));
        }
        if w.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(NumericsError::InvalidInput("weights must be finite and >= 0".into()));
        }
        if groups.is_empty() {
            return Err(NumericsError::InvalidInput("at least one group factor is required".into()));
        }
        let collinear = x.collinear_columns(w);
        if !collinear.is_empty() {
            return Err(NumericsError::RankDeficient { columns: collinear });
        }
        let mut offsets = Vec::with_capacity(groups.len());
        let mut q = 0;
        let mut counts = Vec::with_capacity(groups.len());
        for g in groups {
            if g.codes.len() != n {
                return Err(NumericsError::DimensionMismatch(format!(
                    "factor `{}` has {} memberships for {n} observations",
                    g.name,
                    g.codes.len()
                )));
            }
            let mut c = vec![0usize; g.levels.len()];
            for (&code, &wi) in g.codes.iter().zip(w) {
                if code >= g.levels.len() {
                    return Err(NumericsError::InvalidInput(format!(
                        "factor `{}` membership {code} out of range",
                        g.name
                    )));
                }
                if wi > T::zero() {
                    c[code] += 1;
                }
            }
            if c.iter().filter(|&&k| k > 0).count() < 2 {
                return Err(NumericsError::InvalidInput(format!(
                    "factor `{}` needs at least two observed members",
                    g.name
                )));
            }
            offsets.push(q);
            q += g.levels.len();
            counts.push(c);
        }
        let p = x.ncols();
        if n <= p {
            return Err(NumericsError::InvalidInput(format!("{n} observations for {p} fixed effects")));
        }
        let d = q + p;
        let mut a = Matrix::zeros(d, d);
        let mut b = vec![T::zero(); d];
        let mut yy = T::zero();
        let mut idx = vec![0usize; groups.len()];
        for i in 0..n {
            let wi = w[i];
            if wi == T::zero() {
                continue;
            }
            for (k, g) in groups.iter().enumerate() {
                idx[k] = offsets[k] + g.codes[i];
            }
            let xi = x.row(i);
            for (k, &zi) in idx.iter().enumerate() {
                for &zj in &idx[k..] {
                    let (r, c) = if zi <= zj { (zi, zj) } else { (zj, zi) };
                    a[(r, c)] += wi;
                }
                for (j, &xv) in xi.iter().enumerate() {
                    a[(zi, q + j)] += wi * xv;
                }
                b[zi] += wi * y[i];
            }
            for j in 0..p {
                let wx = wi * xi[j];
                for k in j..p {
                    a[(q + j, q + k)] += wx * xi[k];
                }
                b[q + j] += wx * y[i];
            }
            yy += wi * y[i] * y[i];
        }
        // Two distinct members of one factor never share a row, so every
        // accumulated Z block entry already sits in the upper triangle.
        a.symmetrize_from_upper();
        let mut block = vec![0usize; q];
        for (k, g) in groups.iter().enumerate() {
            for l in 0..g.levels.len() {
                block[offsets[k] + l] = k;
            }
        }
        let n_obs = w.iter().filter(|&&v| v > T::zero()).count();
        Ok(Self {
            a,
            b,
            yy,
            n: n_obs,
            p,
            q,
            block,
            offsets,
            factors: groups.to_vec(),
            counts,
            fixed_names: x.names().to_vec(),
        })
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    fn scales(&self, theta: &[T]) -> Vec<T> {
        let mut s = vec![T::one(); self.q + self.p];
        for (i, si) in s.iter_mut().take(self.q).enumerate() {
            *si = theta[self.block[i]];
        }
        s
    }

    pub fn evaluate(&self, theta: &[T], with_inverse: bool) -> Result<RemlEval<T>> {
        let d = self.q + self.p;
        let s = self.scales(theta);
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = s[i] * self.a[(i, j)] * s[j];
            }
            if i < self.q {
                m[(i, i)] += T::one();
            }
        }
        let rhs: Vec<T> = self.b.iter().zip(&s).map(|(&b, &si)| b * si).collect();
        let ch = m.cholesky().map_err(|_| {
            NumericsError::Singular("mixed-model equations are not positive definite".into())
        })?;
        let solution = ch.solve(&rhs);
        let r2 = self.yy - dot(&solution, &rhs);
        if !(r2 > T::zero()) {
            return Err(NumericsError::ZeroResidualVariance);
        }
        let dof = T::from_usize(self.n - self.p).expect("dof");
        let criterion = ch.log_det() + dof * r2.ln();
        let inverse = with_inverse.then(|| ch.inverse());
        Ok(RemlEval {
            criterion,
            r2,
            solution,
            inverse,
        })
    }

    pub fn criterion(&self, theta: &[T]) -> Result<T> {
        Ok(self.evaluate(theta, false)?.criterion)
    }

    /// Analytic gradient of the profiled criterion with respect to `θ`.
    pub fn gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        let ev = self.evaluate(theta, true)?;
        Ok(self.gradient_from(&ev, theta))
    }

    fn gradient_from(&self, ev: &RemlEval<T>, theta: &[T]) -> Vec<T> {
        let d = self.q + self.p;
        let s = self.scales(theta);
        let minv = ev.inverse.as_ref().expect("inverse computed");
        // S·(v̂, β̂) = (u, β)
        let scaled: Vec<T> = ev.solution.iter().zip(&s).map(|(&v, &si)| v * si).collect();
        let two = T::lit(2.0);
        let dof = T::from_usize(self.n - self.p).expect("dof");
        let mut grad = vec![T::zero(); self.factors.len()];
        for i in 0..self.q {
            let g = self.block[i];
            // ∂ log det M: 2 tr(M⁻¹ D_g A S), row i of the trace
            let mut t = T::zero();
            for k in 0..d {
                t += minv[(i, k)] * self.a[(k, i)] * s[k];
            }
            // ∂ r²: −2 v̂_i (Zᵀ W e)_i
            let ztwe = self.b[i] - dot(self.a.row(i), &scaled);
            let dr2 = -two * ev.solution[i] * ztwe;
            grad[g] += two * t + dof * dr2 / ev.r2;
        }
        grad
    }

    fn finish(&self, theta: &[T], ev: &RemlEval<T>, iterations: usize) -> VaryingInterceptFit<T> {
        let dof = T::from_usize(self.n - self.p).expect("dof");
        let sigma2 = ev.r2 / dof;
        let factors = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let off = self.offsets[k];
                VarianceComponents {
                    factor: g.name.clone(),
                    variance: theta[k] * theta[k] * sigma2,
                    levels: g.levels.clone(),
                    intercepts: (0..g.levels.len())
                        .map(|l| theta[k] * ev.solution[off + l])
                        .collect(),
                    counts: self.counts[k].clone(),
                }
            })
            .collect();
        VaryingInterceptFit {
            fixed_names: self.fixed_names.clone(),
            fixed: ev.solution[self.q..].to_vec(),
            factors,
            residual_variance: sigma2,
            reml_criterion: ev.criterion.to_f64_lossy(),
            iterations,
            n_obs: self.n,
        }
    }

    fn variances(&self, theta: &[T], r2: T) -> Vec<T> {
        let sigma2 = r2 / T::from_usize(self.n - self.p).expect("dof");
        let mut v: Vec<T> = theta.iter().map(|&t| t * t * sigma2).collect();
        v.push(sigma2);
        v
    }

    fn fd_hessian(&self, theta: &[T], grad: &[T]) -> Result<Matrix<T>> {
        let m = theta.len();
        let mut h = Matrix::zeros(m, m);
        for j in 0..m {
            let step = T::lit(1e-5) * theta[j].max(T::lit(1e-2));
            let mut tp = theta.to_vec();
            tp[j] += step;
            let gp = self.gradient(&tp)?;
            for i in 0..m {
                h[(i, j)] = (gp[i] - grad[i]) / step;
            }
        }
        for i in 0..m {
            for j in 0..i {
                let avg = (h[(i, j)] + h[(j, i)]) / T::lit(2.0);
                h[(i, j)] = avg;
                h[(j, i)] = avg;
            }
        }
        Ok(h)
    }

    /// Minimises the profiled criterion over `θ ≥ 0`.
    pub fn optimize(&self, opts: &MixedOptions) -> Result<VaryingInterceptFit<T>> {
        let m = self.factors.len();
        let tol = T::lit(opts.tolerance);
        let mut theta = vec![T::one(); m];
        let mut ev = self.evaluate(&theta, true)?;
        let mut grad = self.gradient_from(&ev, &theta);
        let mut pg_norm = T::infinity();
        for iter in 1..=opts.max_iterations {
            let free: Vec<usize> = (0..m)
                .filter(|&j| theta[j] > T::zero() || grad[j] < T::zero())
                .collect();
            pg_norm = free.iter().fold(T::zero(), |a, &j| a.max(grad[j].abs()));
            if free.is_empty() || pg_norm <= T::lit(1e-10) * ev.criterion.abs().max(T::one()) {
                return Ok(self.finish(&theta, &ev, iter - 1));
            }
            let h = self.fd_hessian(&theta, &grad)?;
            let nf = free.len();
            let mut hf = Matrix::zeros(nf, nf);
            for (a, &i) in free.iter().enumerate() {
                for (b, &j) in free.iter().enumerate() {
                    hf[(a, b)] = h[(i, j)];
                }
            }
            let gf: Vec<T> = free.iter().map(|&j| grad[j]).collect();
            let mut mu = T::zero();
            let dir = loop {
                let mut hm = hf.clone();
                for a in 0..nf {
                    hm[(a, a)] += mu;
                }
                if let Ok(ch) = hm.cholesky() {
                    break ch.solve(&gf);
                }
                let base = (0..nf).map(|a| hf[(a, a)].abs()).fold(T::zero(), T::max).max(T::lit(1e-8));
                mu = if mu == T::zero() { base * T::lit(1e-6) } else { mu * T::lit(10.0) };
                if !mu.is_finite() {
                    // Fall back to steepest descent.
                    break gf.clone();
                }
            };
            let old_var = self.variances(&theta, ev.r2);
            let mut t = T::one();
            let mut accepted = None;
            for _ in 0..60 {
                let mut cand = theta.clone();
                for (a, &j) in free.iter().enumerate() {
                    cand[j] = (theta[j] - t * dir[a]).max(T::zero());
                }
                let decrease: T = (0..m).map(|j| grad[j] * (cand[j] - theta[j])).sum();
                if let Ok(ce) = self.evaluate(&cand, true) {
                    if ce.criterion <= ev.criterion + T::lit(1e-4) * decrease {
                        accepted = Some((cand, ce));
                        break;
                    }
                }
                t *= T::lit(0.5);
            }
            let Some((cand, ce)) = accepted else {
                // No representable decrease left: the point is a minimum to
                // working precision if the projected gradient is small.
                if pg_norm <= T::lit(1e-6) * ev.criterion.abs().max(T::one()) {
                    return Ok(self.finish(&theta, &ev, iter));
                }
                break;
            };
            theta = cand;
            ev = ce;
            grad = self.gradient_from(&ev, &theta);
            let new_var = self.variances(&theta, ev.r2);
            let converged = old_var.iter().zip(&new_var).all(|(&o, &nv)| {
                let scale = o.abs().max(nv.abs());
                scale == T::zero() || (nv - o).abs() <= tol * scale
            });
            if converged {
                return Ok(self.finish(&theta, &ev, iter));
            }
        }
        Err(NumericsError::NotConverged {
            iterations: opts.max_iterations,
            gradient_norm: pg_norm.to_f64_lossy(),
        })
    }
}

/// Fits fixed effects and one varying intercept per member of each factor.
pub fn fit_varying_intercepts<T: Scalar>(
    y: &[T],
    x_fixed: &DesignMatrix<T>,
    groups: &[GroupFactor],
    w: &[T],
    opts: &MixedOptions,
) -> Result<VaryingInterceptFit<T>> {
    RemlProfile::new(y, x_fixed, groups, w)?.optimize(opts)
}
