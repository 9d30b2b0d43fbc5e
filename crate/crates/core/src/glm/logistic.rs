//! Logistic regression on the design `[1 | one-hot(group) | z]`, fitted by
//! damped Newton on the exact negative log-likelihood.
//!
//! Parameter vectors are laid out as `[intercept, group coefficients...,
//! feature coefficients...]`. The one-hot group block is never materialised.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};

use super::{sigmoid, softplus, Scorer};

/// Ridge applied when the Hessian is singular (the intercept is collinear with
/// the full one-hot group block).
pub const FALLBACK_RIDGE: f64 = 1e-8;
const SINGULAR_RTOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaLayout {
    pub num_groups: usize,
    pub p: usize,
}

impl ThetaLayout {
    pub fn of(data: &Dataset) -> Self {
        ThetaLayout {
            num_groups: data.num_groups(),
            p: data.p(),
        }
    }

    pub fn len(&self) -> usize {
        1 + self.num_groups + self.p
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn group(&self, a: usize) -> usize {
        1 + a
    }

    pub fn feature(&self, k: usize) -> usize {
        1 + self.num_groups + k
    }
}

#[inline]
fn linear_predictor(theta: &[f64], layout: ThetaLayout, group: usize, z: &[f64]) -> f64 {
    let zc = &theta[layout.feature(0)..];
    theta[0] + theta[layout.group(group)] + zc.iter().zip(z).map(|(b, x)| b * x).sum::<f64>()
}

fn check_dims(theta: &[f64], data: &Dataset, weights: Option<&[f64]>) -> ThetaLayout {
    let layout = ThetaLayout::of(data);
    assert_eq!(theta.len(), layout.len(), "theta length");
    if let Some(w) = weights {
        assert_eq!(w.len(), data.n(), "weights length");
    }
    layout
}

#[inline]
fn weight(weights: Option<&[f64]>, i: usize) -> f64 {
    weights.map_or(1.0, |w| w[i])
}

/// `Σ wᵢ log(1 + exp(-ỹᵢ θᵀξᵢ))` with `ỹ = 2y - 1`.
pub fn nll(theta: &[f64], data: &Dataset, weights: Option<&[f64]>) -> f64 {
    let layout = check_dims(theta, data, weights);
    let mut total = 0.0;
    for i in 0..data.n() {
        let u = linear_predictor(theta, layout, data.groups()[i], data.z_row(i));
        let signed = if data.labels()[i] == 1 { u } else { -u };
        total += weight(weights, i) * softplus(-signed);
    }
    total
}

/// Gradient `Ξᵀ(μ - y)` and Hessian `Ξᵀ diag[μ(1-μ)] Ξ` in one pass.
pub fn gradient_and_hessian(
    theta: &[f64],
    data: &Dataset,
    weights: Option<&[f64]>,
) -> (Vec<f64>, Array2<f64>) {
    let layout = check_dims(theta, data, weights);
    let dim = layout.len();
    let off = layout.feature(0);
    let p = layout.p;
    let mut g = vec![0.0; dim];
    let mut h = vec![0.0; dim * dim];
    for i in 0..data.n() {
        let a = layout.group(data.groups()[i]);
        let z = data.z_row(i);
        let w = weight(weights, i);
        let mu = sigmoid(linear_predictor(theta, layout, data.groups()[i], z));
        let r = w * (mu - f64::from(data.labels()[i]));
        let c = w * mu * (1.0 - mu);

        g[0] += r;
        g[a] += r;
        h[0] += c;
        h[a] += c; // row 0, column a
        h[a * dim + a] += c;
        for k in 0..p {
            let cz = c * z[k];
            g[off + k] += r * z[k];
            h[off + k] += cz;
            h[a * dim + off + k] += cz;
            let row = (off + k) * dim + off;
            for l in k..p {
                h[row + l] += cz * z[l];
            }
        }
    }
    // Only the upper triangle was accumulated.
    for r in 0..dim {
        for c in 0..r {
            h[r * dim + c] = h[c * dim + r];
        }
    }
    (g, Array2::from_shape_vec((dim, dim), h).expect("shape"))
}

pub fn gradient(theta: &[f64], data: &Dataset, weights: Option<&[f64]>) -> Vec<f64> {
    gradient_and_hessian(theta, data, weights).0
}

pub fn hessian(theta: &[f64], data: &Dataset, weights: Option<&[f64]>) -> Array2<f64> {
    gradient_and_hessian(theta, data, weights).1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Sup-norm gradient tolerance. `None` uses `1e-8 * n`.
    pub tol_grad: Option<f64>,
    pub max_iter: usize,
    /// `λ` in the penalty `λ‖θ‖²` on every coefficient except the intercept.
    pub ridge: f64,
    pub verbose: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol_grad: None,
            max_iter: 100,
            ridge: 0.0,
            verbose: false,
        }
    }
}

impl FitOptions {
    pub fn tolerance(&self, n: usize) -> f64 {
        self.tol_grad.unwrap_or(1e-8 * n.max(1) as f64)
    }

    fn validate(&self) -> Result<()> {
        let tol_ok = self.tol_grad.is_none_or(|t| t > 0.0);
        if !tol_ok || self.max_iter == 0 || !(self.ridge >= 0.0) {
            return Err(Error::InvalidParameter(format!("fit options {self:?}")));
        }
        Ok(())
    }
}

/// How a fit terminated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSummary {
    pub iterations: usize,
    /// Sup-norm of the penalised gradient at the returned coefficients.
    pub grad_norm: f64,
    pub tolerance: f64,
    pub converged: bool,
    /// Ridge actually used (the requested value or the singular fallback).
    pub ridge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    pub group_coef: Vec<f64>,
    pub feature_coef: Vec<f64>,
    /// Decision threshold; classify as 1 iff probability ≥ threshold.
    pub threshold: f64,
    /// Group-dependent intercept adjustments, zero unless set.
    pub group_offsets: Vec<f64>,
    pub group_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub fit: Option<FitSummary>,
}

impl LogisticModel {
    /// Model with all coefficients zero and threshold 1/2.
    pub fn zeros(group_names: Vec<String>, feature_names: Vec<String>) -> Self {
        let layout = ThetaLayout {
            num_groups: group_names.len(),
            p: feature_names.len(),
        };
        Self::from_theta(&vec![0.0; layout.len()], group_names, feature_names)
    }

    pub fn from_theta(theta: &[f64], group_names: Vec<String>, feature_names: Vec<String>) -> Self {
        let k = group_names.len();
        assert_eq!(theta.len(), 1 + k + feature_names.len(), "theta length");
        LogisticModel {
            intercept: theta[0],
            group_coef: theta[1..1 + k].to_vec(),
            feature_coef: theta[1 + k..].to_vec(),
            threshold: 0.5,
            group_offsets: vec![0.0; k],
            group_names,
            feature_names,
            fit: None,
        }
    }

    pub fn theta(&self) -> Vec<f64> {
        let mut v = vec![self.intercept];
        v.extend_from_slice(&self.group_coef);
        v.extend_from_slice(&self.feature_coef);
        v
    }

    pub fn num_groups(&self) -> usize {
        self.group_coef.len()
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold {threshold} outside (0, 1)"
            )));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn linear_predictor(&self, group: usize, z: &[f64]) -> f64 {
        self.intercept
            + self.group_offsets[group]
            + self.group_coef[group]
            + self.feature_coef.iter().zip(z).map(|(b, x)| b * x).sum::<f64>()
    }

    pub fn predict_proba(&self, group: usize, z: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(group, z))
    }

    pub fn classify(&self, group: usize, z: &[f64]) -> u8 {
        u8::from(self.predict_proba(group, z) >= self.threshold)
    }

    pub fn classify_rows(&self, data: &Dataset) -> Vec<u8> {
        (0..data.n())
            .map(|i| self.classify(data.groups()[i], data.z_row(i)))
            .collect()
    }

    /// Tab-separated `name<TAB>value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "intercept\t{:?}", self.intercept);
        for (name, v) in self.group_names.iter().zip(&self.group_coef) {
            let _ = writeln!(out, "group:{name}\t{v:?}");
        }
        for (name, v) in self.feature_names.iter().zip(&self.feature_coef) {
            let _ = writeln!(out, "z:{name}\t{v:?}");
        }
        let _ = writeln!(out, "threshold\t{:?}", self.threshold);
        for (name, v) in self.group_names.iter().zip(&self.group_offsets) {
            let _ = writeln!(out, "offset:{name}\t{v:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut intercept = None;
        let mut threshold = None;
        let mut groups: Vec<(String, f64)> = Vec::new();
        let mut features: Vec<(String, f64)> = Vec::new();
        let mut offsets: Vec<(String, f64, usize)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::ModelFormat {
                line: line_no,
                message,
            };
            let (name, value) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected name<TAB>value".into()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| bad(format!("{value:?} is not a number")))?;
            if name == "intercept" {
                intercept = Some(value);
            } else if name == "threshold" {
                threshold = Some(value);
            } else if let Some(g) = name.strip_prefix("group:") {
                groups.push((g.to_string(), value));
            } else if let Some(f) = name.strip_prefix("z:") {
                features.push((f.to_string(), value));
            } else if let Some(g) = name.strip_prefix("offset:") {
                offsets.push((g.to_string(), value, line_no));
            } else {
                return Err(bad(format!("unknown coefficient {name:?}")));
            }
        }
        let missing = |what: &str| Error::ModelFormat {
            line: 0,
            message: format!("missing {what}"),
        };
        let (group_names, group_coef): (Vec<_>, Vec<_>) = groups.into_iter().unzip();
        let (feature_names, feature_coef): (Vec<_>, Vec<_>) = features.into_iter().unzip();
        let mut group_offsets = vec![0.0; group_names.len()];
        for (g, v, line) in offsets {
            let a = group_names
                .iter()
                .position(|n| *n == g)
                .ok_or_else(|| Error::ModelFormat {
                    line,
                    message: format!("offset for unknown group {g:?}"),
                })?;
            group_offsets[a] = v;
        }
        Ok(LogisticModel {
            intercept: intercept.ok_or_else(|| missing("intercept"))?,
            group_coef,
            feature_coef,
            threshold: threshold.ok_or_else(|| missing("threshold"))?,
            group_offsets,
            group_names,
            feature_names,
            fit: None,
        })
    }
}

impl Scorer for LogisticModel {
    fn score(&self, group: usize, z: &[f64]) -> f64 {
        self.predict_proba(group, z)
    }
}

fn penalised(theta: &[f64], data: &Dataset, weights: Option<&[f64]>, ridge: f64) -> f64 {
    nll(theta, data, weights) + ridge * theta[1..].iter().map(|t| t * t).sum::<f64>()
}

/// Fits by Newton's method with step halving. A fit that does not reach the
/// gradient tolerance within `max_iter` is returned with
/// `fit.converged == false`.
pub fn fit_logistic(
    data: &Dataset,
    opts: &FitOptions,
    weights: Option<&[f64]>,
) -> Result<LogisticModel> {
    opts.validate()?;
    if data.n() == 0 {
        return Err(Error::InvalidParameter("cannot fit on an empty dataset".into()));
    }
    if let Some(w) = weights {
        if w.len() != data.n() || w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "weights must be finite, nonnegative, one per row".into(),
            ));
        }
    }
    let layout = ThetaLayout::of(data);
    let tol = opts.tolerance(data.n());
    let mut ridge = opts.ridge;
    let mut theta = vec![0.0; layout.len()];
    let mut objective = penalised(&theta, data, weights, ridge);
    let mut iterations = 0;

    let penalised_derivatives = |theta: &[f64], ridge: f64| {
        let (mut g, mut h) = gradient_and_hessian(theta, data, weights);
        for k in 1..theta.len() {
            g[k] += 2.0 * ridge * theta[k];
            h[[k, k]] += 2.0 * ridge;
        }
        (g, h)
    };

    let (mut g, mut h) = penalised_derivatives(&theta, ridge);
    while iterations < opts.max_iter {
        let grad_norm = sup_norm(&g);
        if opts.verbose {
            eprintln!("newton iter {iterations}: objective {objective:.10e}, |g|inf {grad_norm:.3e}");
        }
        if grad_norm <= tol {
            break;
        }
        let max_diag = h.diag().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let factor = match cholesky(&h, SINGULAR_RTOL * max_diag) {
            Some(l) => l,
            None => {
                if ridge < FALLBACK_RIDGE {
                    ridge = FALLBACK_RIDGE;
                    objective = penalised(&theta, data, weights, ridge);
                    (g, h) = penalised_derivatives(&theta, ridge);
                }
                cholesky(&h, 0.0).ok_or(Error::SingularHessian)?
            }
        };
        let step = cholesky_solve(&factor, &g);
        iterations += 1;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate: Vec<f64> = theta.iter().zip(&step).map(|(x, d)| x - t * d).collect();
            let value = penalised(&candidate, data, weights, ridge);
            if value <= objective {
                accepted = Some((candidate, value));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((candidate, value)) => {
                theta = candidate;
                objective = value;
                (g, h) = penalised_derivatives(&theta, ridge);
            }
            None => {
                // Objective differences are below rounding; judge the full
                // step by the gradient instead.
                let candidate: Vec<f64> = theta.iter().zip(&step).map(|(x, d)| x - d).collect();
                let (cg, ch) = penalised_derivatives(&candidate, ridge);
                if sup_norm(&cg) >= sup_norm(&g) {
                    break;
                }
                objective = penalised(&candidate, data, weights, ridge);
                theta = candidate;
                (g, h) = (cg, ch);
            }
        }
    }

    let grad_norm = sup_norm(&g);
    let mut model = LogisticModel::from_theta(
        &theta,
        data.group_names().to_vec(),
        data.feature_names().to_vec(),
    );
    model.fit = Some(FitSummary {
        iterations,
        grad_norm,
        tolerance: tol,
        converged: grad_norm <= tol,
        ridge,
    });
    Ok(model)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Per-row weights `M / n_a^y` that turn the log-likelihood into the
/// expectation of the equity-bootstrap objective.
pub fn equity_weights(data: &Dataset, m: usize) -> Result<Vec<f64>> {
    let counts = data.cell_counts();
    for (a, c) in counts.iter().enumerate() {
        for y in 0..2u8 {
            if c[y as usize] == 0 {
                return Err(Error::EmptyCell {
                    group: data.group_names()[a].clone(),
                    label: y,
                });
            }
        }
    }
    Ok(data
        .groups()
        .iter()
        .zip(data.labels())
        .map(|(&a, &y)| m as f64 / counts[a][y as usize] as f64)
        .collect())
}

pub fn equity_weighted_nll(theta: &[f64], data: &Dataset, m: usize) -> Result<f64> {
    let w = equity_weights(data, m)?;
    Ok(nll(theta, data, Some(&w)))
}
