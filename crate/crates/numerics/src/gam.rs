//! Logistic generalized additive models: an intercept, linear columns and
//! centred cubic-spline smooths (optionally one per level of a factor),
//! fit by penalized IRLS. Smoothing weights are chosen per smooth by GCV on
//! the working linear model at each IRLS step (performance iteration),
//! searching a fixed log-spaced grid coordinate by coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{NumericsError, Result};
use crate::linalg::{dot, null_space_of_row, Matrix};
use crate::spline::{BSplineBasis, SplineSmoother};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorCodes {
    pub name: String,
    pub levels: Vec<String>,
    pub codes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GamTerm<T> {
    Linear { name: String, values: Vec<T> },
    /// `s(values)`, or `s(values)·1(factor = level)` for every level when `by` is set.
    Smooth { name: String, values: Vec<T>, by: Option<FactorCodes> },
}

impl<T> GamTerm<T> {
    pub fn name(&self) -> &str {
        match self {
            GamTerm::Linear { name, .. } | GamTerm::Smooth { name, .. } => name,
        }
    }

    fn len(&self) -> usize {
        match self {
            GamTerm::Linear { values, .. } | GamTerm::Smooth { values, .. } => values.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GamOptions {
    pub interior_knots: usize,
    pub grid_points: usize,
    /// log10 bounds of the relative smoothing-weight grid.
    pub log10_lambda_min: f64,
    pub log10_lambda_max: f64,
    pub deviance_tolerance: f64,
    /// Largest absolute penalized-likelihood gradient entry that also counts as converged.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// IRLS steps during which smoothing weights may still move.
    pub max_lambda_updates: usize,
}

impl Default for GamOptions {
    fn default() -> Self {
        Self {
            interior_knots: 10,
            grid_points: 30,
            log10_lambda_min: -5.0,
            log10_lambda_max: 7.0,
            deviance_tolerance: 1e-9,
            gradient_tolerance: 1e-6,
            max_iterations: 500,
            max_lambda_updates: 25,
        }
    }
}

impl GamOptions {
    fn grid(&self) -> Vec<f64> {
        let k = self.grid_points.max(2);
        (0..k)
            .map(|i| {
                let t = i as f64 / (k - 1) as f64;
                10f64.powf(self.log10_lambda_min + t * (self.log10_lambda_max - self.log10_lambda_min))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSmooth<T> {
    pub term: String,
    /// `(level code, level label)` for factor-by smooths.
    pub level: Option<(usize, String)>,
    /// Full-length basis coefficients (constraint already applied).
    pub smoother: SplineSmoother<T>,
    /// Index of the grid value chosen for this smooth.
    pub grid_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamFit<T> {
    pub intercept: T,
    pub linear: Vec<(String, T)>,
    /// Linear columns dropped because they were constant or collinear.
    pub dropped: Vec<String>,
    pub smooths: Vec<FittedSmooth<T>>,
    pub deviance: f64,
    pub effective_df: f64,
    pub gcv: f64,
    pub iterations: usize,
}

struct Component<T> {
    term: usize,
    level: Option<(usize, String)>,
    basis: BSplineBasis<T>,
    z: Matrix<T>,
    offset: usize,
    width: usize,
    /// Penalty in reduced coordinates, normalised to the data scale.
    penalty: Matrix<T>,
    scale: T,
}

/// Assembled model matrix, penalties and response for a logistic GAM.
pub struct GamDesign<T> {
    x: Matrix<T>,
    y: Vec<T>,
    prior: Vec<T>,
    linear_names: Vec<String>,
    term_names: Vec<String>,
    dropped: Vec<String>,
    components: Vec<Component<T>>,
    lambdas: Vec<T>,
    grid: Vec<f64>,
    grid_index: Vec<usize>,
}

impl<T: Scalar> GamDesign<T> {
    pub fn build(terms: &[GamTerm<T>], y: &[T], w: &[T], opts: &GamOptions) -> Result<Self> {
        let n = y.len();
        if w.len() != n || terms.iter().any(|t| t.len() != n) {
            return Err(NumericsError::DimensionMismatch(
                "every term, the response and the weights need one value per row".into(),
            ));
        }
        if y.iter().any(|&v| v != T::zero() && v != T::one()) {
            return Err(NumericsError::DegenerateResponse("response must be 0/1".into()));
        }
        if w.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(NumericsError::InvalidInput("weights must be finite and >= 0".into()));
        }
        let ones = y.iter().zip(w).filter(|(&v, &wi)| v == T::one() && wi > T::zero()).count();
        let zeros = y.iter().zip(w).filter(|(&v, &wi)| v == T::zero() && wi > T::zero()).count();
        if ones == 0 || zeros == 0 {
            return Err(NumericsError::DegenerateResponse(
                "response has a single class; the logit MLE is not finite".into(),
            ));
        }

        // Unpenalized block: intercept + linear columns, minus collinear ones.
        let mut linear_cols: Vec<(usize, String, Vec<T>)> = Vec::new();
        for (ti, t) in terms.iter().enumerate() {
            if let GamTerm::Linear { name, values } = t {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(NumericsError::NonFinite(format!("term `{name}`")));
                }
                linear_cols.push((ti, name.clone(), values.clone()));
            }
        }
        let mut dropped = Vec::new();
        {
            let mut cols = vec![("(intercept)".to_string(), vec![T::one(); n])];
            cols.extend(linear_cols.iter().map(|(_, nm, v)| (nm.clone(), v.clone())));
            let dm = crate::design::DesignMatrix::from_columns(cols)?;
            let bad = dm.collinear_columns(w);
            if bad.iter().any(|b| b == "(intercept)") {
                return Err(NumericsError::InvalidInput("no rows with positive weight".into()));
            }
            linear_cols.retain(|(_, nm, _)| {
                if bad.contains(nm) {
                    dropped.push(nm.clone());
                    false
                } else {
                    true
                }
            });
        }

        let mut components = Vec::new();
        let mut offset = 1 + linear_cols.len();
        for (ti, t) in terms.iter().enumerate() {
            let GamTerm::Smooth { name, values, by } = t else { continue };
            if values.iter().any(|v| !v.is_finite()) {
                return Err(NumericsError::NonFinite(format!("term `{name}`")));
            }
            let groups: Vec<(Option<(usize, String)>, Vec<usize>)> = match by {
                None => vec![(None, (0..n).collect())],
                Some(f) => {
                    if f.codes.len() != n {
                        return Err(NumericsError::DimensionMismatch(format!(
                            "factor `{}` has {} codes for {n} rows",
                            f.name,
                            f.codes.len()
                        )));
                    }
                    f.levels
                        .iter()
                        .enumerate()
                        .map(|(code, lab)| {
                            let rows = (0..n).filter(|&i| f.codes[i] == code && w[i] > T::zero()).collect();
                            (Some((code, lab.clone())), rows)
                        })
                        .collect()
                }
            };
            for (level, rows) in groups {
                let xs: Vec<T> = rows.iter().map(|&i| values[i]).collect();
                let basis = BSplineBasis::from_quantiles(&xs, opts.interior_knots).map_err(|e| {
                    NumericsError::InvalidInput(format!(
                        "smooth `{name}`{}: {e}",
                        level.as_ref().map(|l| format!(" (level {})", l.1)).unwrap_or_default()
                    ))
                })?;
                let k = basis.dim();
                let mut csum = vec![T::zero(); k];
                for &x in &xs {
                    let (s, v) = basis.evaluate_sparse(x);
                    for (j, b) in v.into_iter().enumerate() {
                        csum[s + j] += b;
                    }
                }
                let z = null_space_of_row(&csum)?;
                let penalty = {
                    let s = basis.penalty();
                    z.transpose().matmul(&s)?.matmul(&z)?
                };
                components.push(Component {
                    term: ti,
                    level,
                    basis,
                    z,
                    offset,
                    width: k - 1,
                    penalty,
                    scale: T::one(),
                });
                offset += k - 1;
            }
        }

        let p = offset;
        let mut x = Matrix::zeros(n, p);
        for i in 0..n {
            x[(i, 0)] = T::one();
            for (j, (_, _, v)) in linear_cols.iter().enumerate() {
                x[(i, 1 + j)] = v[i];
            }
        }
        for c in &components {
            let GamTerm::Smooth { values, by, .. } = &terms[c.term] else { unreachable!() };
            for i in 0..n {
                if let (Some((code, _)), Some(f)) = (&c.level, by) {
                    if f.codes[i] != *code {
                        continue;
                    }
                }
                let reduced = reduce_row(&c.basis, &c.z, values[i]);
                x.row_mut(i)[c.offset..c.offset + c.width].copy_from_slice(&reduced);
            }
        }

        let grid = opts.grid();
        let start = grid.len() / 2;
        let mut design = Self {
            x,
            y: y.to_vec(),
            prior: w.to_vec(),
            linear_names: linear_cols.iter().map(|(_, n, _)| n.clone()).collect(),
            term_names: terms.iter().map(|t| t.name().to_string()).collect(),
            dropped,
            lambdas: Vec::new(),
            grid_index: vec![start; components.len()],
            components,
            grid,
        };
        // Normalise each penalty against its block of XᵀWX at the starting weights.
        let w0: Vec<T> = design.prior.iter().map(|&p| p * T::lit(0.25)).collect();
        let g0 = weighted_gram(&design.x, &w0);
        for c in &mut design.components {
            let mut gn = T::zero();
            for a in 0..c.width {
                for b in 0..c.width {
                    let v = g0[(c.offset + a, c.offset + b)];
                    gn += v * v;
                }
            }
            let sn: T = c.penalty.as_slice().iter().map(|&v| v * v).sum();
            c.scale = if sn > T::zero() && gn > T::zero() { (gn / sn).sqrt() } else { T::one() };
        }
        design.lambdas = design.grid_index.iter().map(|&i| T::lit(design.grid[i])).collect();
        Ok(design)
    }

    pub fn n_parameters(&self) -> usize {
        self.x.cols()
    }

    pub fn n_smooths(&self) -> usize {
        self.components.len()
    }

    /// Sets relative smoothing weights (multiplying each normalised penalty).
    pub fn set_lambdas(&mut self, lambdas: &[T]) {
        assert_eq!(lambdas.len(), self.components.len());
        self.lambdas = lambdas.to_vec();
    }

    fn total_penalty(&self, lambdas: &[T]) -> Matrix<T> {
        let p = self.n_parameters();
        let mut s = Matrix::zeros(p, p);
        for (c, &l) in self.components.iter().zip(lambdas) {
            let f = l * c.scale;
            for a in 0..c.width {
                for b in 0..c.width {
                    s[(c.offset + a, c.offset + b)] += f * c.penalty[(a, b)];
                }
            }
        }
        s
    }

    fn linear_predictor(&self, beta: &[T]) -> Vec<T> {
        self.x.matvec(beta)
    }

    /// `−Σ wᵢ [yᵢ log μᵢ + (1−yᵢ) log(1−μᵢ)] + ½ βᵀ S_λ β`.
    pub fn penalized_nll(&self, beta: &[T]) -> T {
        let eta = self.linear_predictor(beta);
        let mut nll = T::zero();
        for ((&e, &y), &w) in eta.iter().zip(&self.y).zip(&self.prior) {
            // log(1 + e^η) − yη, computed stably
            let softplus = if e > T::zero() { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
            nll += w * (softplus - y * e);
        }
        let s = self.total_penalty(&self.lambdas);
        nll + T::lit(0.5) * dot(beta, &s.matvec(beta))
    }

    pub fn penalized_nll_gradient(&self, beta: &[T]) -> Vec<T> {
        let eta = self.linear_predictor(beta);
        let p = self.n_parameters();
        let mut g = vec![T::zero(); p];
        for i in 0..self.x.rows() {
            let mu = logistic(eta[i]);
            let r = self.prior[i] * (mu - self.y[i]);
            for (gj, &xj) in g.iter_mut().zip(self.x.row(i)) {
                *gj += r * xj;
            }
        }
        let sb = self.total_penalty(&self.lambdas).matvec(beta);
        g.iter().zip(sb).map(|(&a, b)| a + b).collect()
    }

    fn deviance(&self, eta: &[T]) -> T {
        let two = T::lit(2.0);
        let mut d = T::zero();
        for ((&e, &y), &w) in eta.iter().zip(&self.y).zip(&self.prior) {
            let softplus = if e > T::zero() { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
            d += w * (softplus - y * e);
        }
        two * d
    }

    /// Penalized IRLS with GCV choice of the smoothing weights.
    pub fn fit(mut self, opts: &GamOptions) -> Result<GamFit<T>> {
        let n = self.x.rows();
        let p = self.n_parameters();
        let n_eff = T::from_usize(self.prior.iter().filter(|&&w| w > T::zero()).count()).expect("count");
        let tiny = T::lit(1e-10);
        let mut eta: Vec<T> = self
            .y
            .iter()
            .map(|&y| {
                let mu = (y + T::lit(0.5)) / T::lit(2.0);
                (mu / (T::one() - mu)).ln()
            })
            .collect();
        let mut beta = vec![T::zero(); p];
        let mut prev_dev = T::infinity();
        let mut prev_pen = T::infinity();
        for iter in 0..opts.max_iterations {
            let mut w = vec![T::zero(); n];
            let mut z = vec![T::zero(); n];
            for i in 0..n {
                let mu = logistic(eta[i]);
                let v = (mu * (T::one() - mu)).max(tiny);
                w[i] = self.prior[i] * v;
                z[i] = eta[i] + (self.y[i] - mu) / v;
            }
            let g = weighted_gram(&self.x, &w);
            let wz: Vec<T> = w.iter().zip(&z).map(|(&a, &b)| a * b).collect();
            let r = self.x.transpose_matvec(&wz);
            let zz = dot(&wz, &z);

            let mut changed = false;
            if iter < opts.max_lambda_updates && !self.components.is_empty() {
                changed = self.search_lambdas(&g, &r, zz, n_eff)?;
            }
            let (new_beta, last_gcv, edf) = self
                .gcv(&g, &r, zz, n_eff, &self.lambdas)
                .ok_or(NumericsError::GcvExhausted)?;

            // Step halving on the penalized deviance once the weights are fixed.
            let s = self.total_penalty(&self.lambdas);
            let mut cand = new_beta;
            let mut cand_eta = self.linear_predictor(&cand);
            let mut dev = self.deviance(&cand_eta);
            let mut pen = dev + dot(&cand, &s.matvec(&cand));
            if !changed && prev_pen.is_finite() {
                let mut halvings = 0;
                while !(pen <= prev_pen * (T::one() + T::lit(1e-12))) && halvings < 30 {
                    cand = cand.iter().zip(&beta).map(|(&a, &b)| (a + b) / T::lit(2.0)).collect();
                    cand_eta = self.linear_predictor(&cand);
                    dev = self.deviance(&cand_eta);
                    pen = dev + dot(&cand, &s.matvec(&cand));
                    halvings += 1;
                }
            }
            if !dev.is_finite() {
                return Err(NumericsError::NotConverged {
                    iterations: iter + 1,
                    gradient_norm: f64::NAN,
                });
            }
            beta = cand;
            eta = cand_eta;
            let converged = !changed
                && prev_dev.is_finite()
                && ((dev - prev_dev).abs() <= T::lit(opts.deviance_tolerance) * (dev.abs() + T::lit(0.1))
                    || self.max_gradient(&beta) <= opts.gradient_tolerance);
            prev_dev = dev;
            prev_pen = pen;
            if converged {
                return Ok(self.finish(&beta, dev, edf, last_gcv, iter + 1));
            }
        }
        Err(NumericsError::NotConverged {
            iterations: opts.max_iterations,
            gradient_norm: self.max_gradient(&beta),
        })
    }

    fn max_gradient(&self, beta: &[T]) -> f64 {
        self.penalized_nll_gradient(beta).iter().fold(0.0, |a: f64, &b| a.max(b.to_f64_lossy().abs()))
    }

    /// Solves the working penalized least-squares problem for `lambdas` and
    /// returns `(β, GCV, effective df)`.
    fn gcv(&self, g: &Matrix<T>, r: &[T], zz: T, n: T, lambdas: &[T]) -> Option<(Vec<T>, T, T)> {
        let mut a = g.clone();
        a.add_assign(&self.total_penalty(lambdas));
        let ch = a.cholesky().ok()?;
        let beta = ch.solve(r);
        let gb = g.matvec(&beta);
        let rss = (zz - T::lit(2.0) * dot(&beta, r) + dot(&beta, &gb)).max(T::zero());
        let inv = ch.inverse();
        let p = g.rows();
        let mut edf = T::zero();
        for i in 0..p {
            edf += dot(inv.row(i), &g.column(i));
        }
        let denom = n - edf;
        if !(denom > T::zero()) {
            return None;
        }
        let score = n * rss / (denom * denom);
        score.is_finite().then_some((beta, score, edf))
    }

    /// Coordinate-wise grid search; returns whether any weight moved.
    fn search_lambdas(&mut self, g: &Matrix<T>, r: &[T], zz: T, n: T) -> Result<bool> {
        let mut changed = false;
        for _sweep in 0..3 {
            let mut sweep_changed = false;
            for j in 0..self.components.len() {
                let mut best: Option<(usize, T)> = None;
                let mut trial = self.lambdas.clone();
                for (gi, &lv) in self.grid.iter().enumerate() {
                    trial[j] = T::lit(lv);
                    if let Some((_, score, _)) = self.gcv(g, r, zz, n, &trial) {
                        if best.is_none_or(|(_, b)| score < b) {
                            best = Some((gi, score));
                        }
                    }
                }
                let (gi, _) = best.ok_or(NumericsError::GcvExhausted)?;
                if gi != self.grid_index[j] {
                    self.grid_index[j] = gi;
                    self.lambdas[j] = T::lit(self.grid[gi]);
                    sweep_changed = true;
                }
            }
            changed |= sweep_changed;
            if !sweep_changed {
                break;
            }
        }
        Ok(changed)
    }

    fn finish(self, beta: &[T], dev: T, edf: T, gcv: T, iterations: usize) -> GamFit<T> {
        let linear = self
            .linear_names
            .iter()
            .enumerate()
            .map(|(j, n)| (n.clone(), beta[1 + j]))
            .collect();
        let smooths = self
            .components
            .iter()
            .zip(&self.lambdas)
            .zip(&self.grid_index)
            .map(|((c, &l), &gi)| {
                let reduced = &beta[c.offset..c.offset + c.width];
                let full = c.z.matvec(reduced);
                FittedSmooth {
                    term: term_name_of(&self, c),
                    level: c.level.clone(),
                    smoother: SplineSmoother {
                        basis: c.basis.clone(),
                        lambda: l * c.scale,
                        coefficients: full,
                    },
                    grid_index: gi,
                }
            })
            .collect();
        GamFit {
            intercept: beta[0],
            linear,
            dropped: self.dropped.clone(),
            smooths,
            deviance: dev.to_f64_lossy(),
            effective_df: edf.to_f64_lossy(),
            gcv: gcv.to_f64_lossy(),
            iterations,
        }
    }
}

fn term_name_of<T>(d: &GamDesign<T>, c: &Component<T>) -> String {
    d.term_names.get(c.term).cloned().unwrap_or_default()
}

fn reduce_row<T: Scalar>(basis: &BSplineBasis<T>, z: &Matrix<T>, x: T) -> Vec<T> {
    let (start, vals) = basis.evaluate_sparse(x);
    let mut out = vec![T::zero(); z.cols()];
    for (k, v) in vals.into_iter().enumerate() {
        let zr = z.row(start + k);
        for (o, &zv) in out.iter_mut().zip(zr) {
            *o += v * zv;
        }
    }
    out
}

fn weighted_gram<T: Scalar>(x: &Matrix<T>, w: &[T]) -> Matrix<T> {
    let p = x.cols();
    let mut g = Matrix::zeros(p, p);
    for (i, &wi) in w.iter().enumerate() {
        if wi == T::zero() {
            continue;
        }
        let row = x.row(i);
        for a in 0..p {
            let xa = wi * row[a];
            if xa == T::zero() {
                continue;
            }
            let grow = g.row_mut(a);
            for b in a..p {
                grow[b] += xa * row[b];
            }
        }
    }
    g.symmetrize_from_upper();
    g
}

#[inline]
pub fn logistic<T: Scalar>(eta: T) -> T {
    if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    }
}

/// Fits a logistic GAM; see the module docs for the smoothing-weight search.
pub fn fit_gam_logit<T: Scalar>(terms: &[GamTerm<T>], y: &[T], w: &[T], opts: &GamOptions) -> Result<GamFit<T>> {
    GamDesign::build(terms, y, w, opts)?.fit(opts)
}

impl<T: Scalar> GamFit<T> {
    /// Linear predictor for new data laid out exactly like the fitting terms.
    pub fn linear_predictor(&self, terms: &[GamTerm<T>]) -> Result<Vec<T>> {
        let n = terms.first().map_or(0, GamTerm::len);
        if terms.iter().any(|t| t.len() != n) {
            return Err(NumericsError::DimensionMismatch("terms have different lengths".into()));
        }
        let mut eta = vec![self.intercept; n];
        for (name, coef) in &self.linear {
            let t = terms
                .iter()
                .find(|t| matches!(t, GamTerm::Linear { name: nm, .. } if nm == name))
                .ok_or_else(|| NumericsError::InvalidInput(format!("missing linear term `{name}`")))?;
            let GamTerm::Linear { values, .. } = t else { unreachable!() };
            for (e, &v) in eta.iter_mut().zip(values) {
                *e += *coef * v;
            }
        }
        for s in &self.smooths {
            let t = terms
                .iter()
                .find(|t| matches!(t, GamTerm::Smooth { name, .. } if *name == s.term))
                .ok_or_else(|| NumericsError::InvalidInput(format!("missing smooth term `{}`", s.term)))?;
            let GamTerm::Smooth { values, by, .. } = t else { unreachable!() };
            for i in 0..n {
                if let Some((code, _)) = &s.level {
                    let f = by.as_ref().ok_or_else(|| {
                        NumericsError::InvalidInput(format!("smooth `{}` needs its factor codes", s.term))
                    })?;
                    if f.codes[i] != *code {
                        continue;
                    }
                }
                eta[i] += s.smoother.value(values[i]);
            }
        }
        Ok(eta)
    }

    pub fn predict(&self, terms: &[GamTerm<T>]) -> Result<Vec<T>> {
        Ok(self.linear_predictor(terms)?.into_iter().map(logistic).collect())
    }

    pub fn smooth(&self, term: &str, level: Option<usize>) -> Option<&FittedSmooth<T>> {
        self.smooths
            .iter()
            .find(|s| s.term == term && s.level.as_ref().map(|l| l.0) == level)
    }
}
