//! Bernoulli naive Bayes with the group factor kept separate:
//! `P(y | a, z) ∝ P(y) P(a | y) Πₖ P(zₖ | y)`.

use crate::data::Dataset;
use crate::error::{Error, Result};

use super::{sigmoid, Scorer};

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    /// `P(Y = y)`, indexed by label.
    pub prior: [f64; 2],
    /// `P(A = a | Y = y)` as `group_cond[y][a]`.
    pub group_cond: [Vec<f64>; 2],
    /// `P(Z_k = 1 | Y = y)` as `feature_cond[y][k]`.
    pub feature_cond: [Vec<f64>; 2],
    /// Laplace pseudo-count.
    pub smoothing: f64,
}

pub fn fit_naive_bayes(data: &Dataset) -> Result<NaiveBayesModel> {
    fit_naive_bayes_with(data, 1.0)
}

pub fn fit_naive_bayes_with(data: &Dataset, alpha: f64) -> Result<NaiveBayesModel> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("smoothing {alpha} must be positive")));
    }
    for (k, col) in data.z().columns().into_iter().enumerate() {
        if col.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::NonBinaryFeature(data.feature_names()[k].clone()));
        }
    }
    let num_groups = data.num_groups();
    let p = data.p();
    let mut class_n = [0usize; 2];
    let mut group_n = [vec![0usize; num_groups], vec![0usize; num_groups]];
    let mut ones = [vec![0usize; p], vec![0usize; p]];
    for i in 0..data.n() {
        let y = data.labels()[i] as usize;
        class_n[y] += 1;
        group_n[y][data.groups()[i]] += 1;
        for (k, &v) in data.z_row(i).iter().enumerate() {
            if v == 1.0 {
                ones[y][k] += 1;
            }
        }
    }
    for y in 0..2u8 {
        if class_n[y as usize] == 0 {
            return Err(Error::EmptyClass(y));
        }
    }
    let n = data.n() as f64;
    let smooth = |count: usize, total: usize, levels: usize| {
        (count as f64 + alpha) / (total as f64 + levels as f64 * alpha)
    };
    let group_cond = [0, 1].map(|y| {
        group_n[y]
            .iter()
            .map(|&c| smooth(c, class_n[y], num_groups))
            .collect()
    });
    let feature_cond = [0, 1].map(|y| ones[y].iter().map(|&c| smooth(c, class_n[y], 2)).collect());
    Ok(NaiveBayesModel {
        prior: [class_n[0] as f64 / n, class_n[1] as f64 / n],
        group_cond,
        feature_cond,
        smoothing: alpha,
    })
}

impl NaiveBayesModel {
    fn log_joint(&self, y: usize, group: usize, z: &[f64]) -> f64 {
        let mut s = self.prior[y].ln() + self.group_cond[y][group].ln();
        for (q, &v) in self.feature_cond[y].iter().zip(z) {
            s += v * q.ln() + (1.0 - v) * (1.0 - q).ln();
        }
        s
    }

    /// `[P(Y=0 | a, z), P(Y=1 | a, z)]`.
    pub fn posterior_distribution(&self, group: usize, z: &[f64]) -> [f64; 2] {
        let d = self.log_joint(1, group, z) - self.log_joint(0, group, z);
        [sigmoid(-d), sigmoid(d)]
    }

    /// `P(Y = 1 | A = group, Z = z)`.
    pub fn posterior(&self, group: usize, z: &[f64]) -> f64 {
        self.posterior_distribution(group, z)[1]
    }
}

impl Scorer for NaiveBayesModel {
    fn score(&self, group: usize, z: &[f64]) -> f64 {
        self.posterior(group, z)
    }
}
