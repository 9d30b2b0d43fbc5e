//! Classifiers: logistic regression and Bernoulli naive Bayes.

mod logistic;
mod naive_bayes;

pub use logistic::{
    equity_weighted_nll, equity_weights, fit_logistic, gradient, gradient_and_hessian, hessian,
    nll, FitOptions, FitSummary, LogisticModel, ThetaLayout, FALLBACK_RIDGE,
};
pub use naive_bayes::{fit_naive_bayes, fit_naive_bayes_with, NaiveBayesModel};

use crate::data::Dataset;

/// A classifier producing `P(Y = 1 | group, z)`.
pub trait Scorer {
    fn score(&self, group: usize, z: &[f64]) -> f64;

    fn score_rows(&self, data: &Dataset) -> Vec<f64> {
        (0..data.n())
            .map(|i| self.score(data.groups()[i], data.z_row(i)))
            .collect()
    }
}

/// Logistic function, evaluated without overflow for large `|t|`.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    (-x.abs()).exp().ln_1p() + x.max(0.0)
}
