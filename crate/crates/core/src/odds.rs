//! Group odds-ratio estimators, their mean absolute deviation from one, and
//! group-dependent intercept adjustment.
//!
//! Entry `(j, k)` of every matrix is the odds of `Y = 1` in group `j` divided
//! by the odds in group `k`.

use std::io::Write;

use ndarray::Array2;
use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::glm::{sigmoid, LogisticModel};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OddsEstimator {
    /// Counting estimate from labels.
    Empirical,
    /// `exp(β_j - β_k)` from logistic group coefficients.
    Conditional,
    /// Ratio of Monte Carlo marginal group probabilities.
    MonteCarlo,
    /// Monte Carlo estimate after intercept adjustment.
    InterceptAdjusted,
}

impl OddsEstimator {
    pub fn abbrev(&self) -> &'static str {
        match self {
            OddsEstimator::Empirical => "EOR",
            OddsEstimator::Conditional => "LOR",
            OddsEstimator::MonteCarlo => "MCLOR",
            OddsEstimator::InterceptAdjusted => "INTADJ",
        }
    }
}

/// Mean of `|ρ - 1|` over the defined entries considered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadSummary {
    pub value: f64,
    pub entries: usize,
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OddsRatioMatrix {
    size: usize,
    values: Vec<Option<f64>>,
    pub estimator: OddsEstimator,
    pub group_names: Vec<String>,
    /// Mean absolute deviation from one under `diagonal_included`.
    pub mad_from_one: f64,
    pub diagonal_included: bool,
}

impl OddsRatioMatrix {
    /// Builds the pairwise matrix from per-group log-odds (`None` where a
    /// group's odds are 0 or infinite).
    pub fn from_log_odds(
        log_odds: &[Option<f64>],
        estimator: OddsEstimator,
        group_names: Vec<String>,
    ) -> Self {
        let size = log_odds.len();
        let mut values = Vec::with_capacity(size * size);
        for j in 0..size {
            for k in 0..size {
                values.push(if j == k {
                    Some(1.0)
                } else {
                    match (log_odds[j], log_odds[k]) {
                        (Some(a), Some(b)) => Some((a - b).exp()),
                        _ => None,
                    }
                });
            }
        }
        Self::from_entries(size, values, estimator, group_names)
    }

    fn from_entries(
        size: usize,
        values: Vec<Option<f64>>,
        estimator: OddsEstimator,
        group_names: Vec<String>,
    ) -> Self {
        let mut m = OddsRatioMatrix {
            size,
            values,
            estimator,
            group_names,
            mad_from_one: 0.0,
            diagonal_included: false,
        };
        m.mad_from_one = mad_from_one(&m, false).value;
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, j: usize, k: usize) -> Option<f64> {
        self.values[j * self.size + k]
    }

    /// Recomputes the stored mad under the requested diagonal convention.
    pub fn with_diagonal(mut self, diagonal_included: bool) -> Self {
        self.diagonal_included = diagonal_included;
        self.mad_from_one = mad_from_one(&self, diagonal_included).value;
        self
    }

    /// Square matrix with `NaN` for undefined entries.
    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.size, self.size), |(j, k)| {
            self.get(j, k).unwrap_or(f64::NAN)
        })
    }

    /// CSV with a header of group names, one row per group, and a trailing
    /// `mad_from_one` line. Undefined entries are written empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        let mut header = vec![self.estimator.abbrev().to_string()];
        header.extend(self.group_names.iter().cloned());
        w.write_record(&header)?;
        for j in 0..self.size {
            let mut row = vec![self.group_names[j].clone()];
            row.extend((0..self.size).map(|k| self.get(j, k).map_or(String::new(), |v| format!("{v:?}"))));
            w.write_record(&row)?;
        }
        w.write_record(["mad_from_one".to_string(), format!("{:?}", self.mad_from_one)])?;
        w.flush()?;
        Ok(())
    }
}

/// Mean of `|ρ_{j,k} - 1|` over ordered pairs `j ≠ k`, or over all entries
/// when `diagonal_included`. Undefined entries are skipped and counted.
pub fn mad_from_one(matrix: &OddsRatioMatrix, diagonal_included: bool) -> MadSummary {
    let mut total = 0.0;
    let mut entries = 0;
    let mut undefined = 0;
    for j in 0..matrix.size {
        for k in 0..matrix.size {
            if j == k && !diagonal_included {
                continue;
            }
            match matrix.get(j, k) {
                Some(v) => {
                    total += (v - 1.0).abs();
                    entries += 1;
                }
                None => undefined += 1,
            }
        }
    }
    MadSummary {
        value: if entries > 0 { total / entries as f64 } else { 0.0 },
        entries,
        undefined,
    }
}

/// Counting estimate `(n_j¹/n_j⁰) / (n_k¹/n_k⁰)`.
pub fn empirical_or(data: &Dataset) -> OddsRatioMatrix {
    empirical_or_from_counts(&data.cell_counts(), data.group_names().to_vec())
}

/// Same as [`empirical_or`] from `[negatives, positives]` counts per group.
pub fn empirical_or_from_counts(counts: &[[usize; 2]], group_names: Vec<String>) -> OddsRatioMatrix {
    let size = counts.len();
    let odds = |c: &[usize; 2]| (c[0] > 0 && c[1] > 0).then(|| (c[1], c[0]));
    let mut values = Vec::with_capacity(size * size);
    for j in 0..size {
        for k in 0..size {
            values.push(if j == k {
                Some(1.0)
            } else {
                match (odds(&counts[j]), odds(&counts[k])) {
                    // (p_j / n_j) / (p_k / n_k) with integer products; equal
                    // odds give exactly 1.
                    (Some((pj, nj)), Some((pk, nk))) => {
                        Some((pj as f64 * nk as f64) / (nj as f64 * pk as f64))
                    }
                    _ => None,
                }
            });
        }
    }
    OddsRatioMatrix::from_entries(size, values, OddsEstimator::Empirical, group_names)
}

/// `exp((β_j + o_j) - (β_k + o_k))` from the model's group coefficients and
/// offsets.
pub fn conditional_lor(model: &LogisticModel) -> OddsRatioMatrix {
    let log_odds: Vec<Option<f64>> = model
        .group_coef
        .iter()
        .zip(&model.group_offsets)
        .map(|(b, o)| Some(b + o))
        .collect();
    OddsRatioMatrix::from_log_odds(&log_odds, OddsEstimator::Conditional, model.group_names.clone())
}

/// Source of feature rows for Monte Carlo integration over `Z | A = a`.
pub trait ZSampler {
    fn sample_z(&self, group: usize, rows: usize, rng: &mut StreamRng) -> Array2<f64>;

    /// Whether draws depend on the group. When they do not, one draw is
    /// shared by every group.
    fn depends_on_group(&self) -> bool {
        false
    }
}

/// Resamples observed feature rows of the requested group.
#[derive(Debug, Clone)]
pub struct EmpiricalZ<'a> {
    data: &'a Dataset,
    rows_by_group: Vec<Vec<usize>>,
}

impl<'a> EmpiricalZ<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        let mut rows_by_group = vec![Vec::new(); data.num_groups()];
        for (i, &a) in data.groups().iter().enumerate() {
            rows_by_group[a].push(i);
        }
        EmpiricalZ { data, rows_by_group }
    }
}

impl ZSampler for EmpiricalZ<'_> {
    fn sample_z(&self, group: usize, rows: usize, rng: &mut StreamRng) -> Array2<f64> {
        let pool = &self.rows_by_group[group];
        assert!(!pool.is_empty(), "group {group} has no rows to resample");
        let picks: Vec<usize> = (0..rows).map(|_| pool[rng.random_range(0..pool.len())]).collect();
        self.data.subset(&picks).z().clone()
    }

    fn depends_on_group(&self) -> bool {
        true
    }
}

/// `(1/ν) Σᵢ σ(β₀ + o_j + β_j + β_zᵀzᵢ)` over the rows of `z_samples`.
pub fn mc_group_prob(model: &LogisticModel, group: usize, z_samples: &Array2<f64>) -> f64 {
    let base = model.intercept + model.group_offsets[group] + model.group_coef[group];
    let nu = z_samples.nrows();
    assert!(nu >= 1, "need at least one Monte Carlo sample");
    let total: f64 = z_samples
        .outer_iter()
        .map(|z| {
            let dot: f64 = model.feature_coef.iter().zip(z.iter()).map(|(b, x)| b * x).sum();
            sigmoid(base + dot)
        })
        .sum();
    total / nu as f64
}

fn log_odds_of(prob: f64) -> Option<f64> {
    (prob > 0.0 && prob < 1.0).then(|| (prob / (1.0 - prob)).ln())
}

/// Monte Carlo odds ratios with one sample set shared by all groups.
pub fn mc_lor_from_samples(model: &LogisticModel, z_samples: &Array2<f64>) -> OddsRatioMatrix {
    let log_odds: Vec<Option<f64>> = (0..model.num_groups())
        .map(|j| log_odds_of(mc_group_prob(model, j, z_samples)))
        .collect();
    OddsRatioMatrix::from_log_odds(&log_odds, OddsEstimator::MonteCarlo, model.group_names.clone())
}

/// Monte Carlo odds ratios from `nu` draws per group. Group-independent
/// samplers are drawn once; group-dependent ones are drawn from the same
/// random stream position for every group.
pub fn mc_lor<S: ZSampler + ?Sized>(
    model: &LogisticModel,
    sampler: &S,
    nu: usize,
    rng: &mut StreamRng,
) -> OddsRatioMatrix {
    if !sampler.depends_on_group() {
        let z = sampler.sample_z(0, nu, rng);
        return mc_lor_from_samples(model, &z);
    }
    let start = rng.clone();
    let log_odds: Vec<Option<f64>> = (0..model.num_groups())
        .map(|j| {
            let mut r = start.clone();
            let z = sampler.sample_z(j, nu, &mut r);
            *rng = r;
            log_odds_of(mc_group_prob(model, j, &z))
        })
        .collect();
    OddsRatioMatrix::from_log_odds(&log_odds, OddsEstimator::MonteCarlo, model.group_names.clone())
}

/// Copy of `model` with offsets `log(ζ₁ⱼ/ζ₀ⱼ)`, where `ζ_{y,j}` is the
/// fraction of group-`j` rows in `reference` whose label is `1 - y`. The
/// coefficients themselves are unchanged.
pub fn intercept_adjust(model: &LogisticModel, reference: &Dataset) -> Result<LogisticModel> {
    if reference.num_groups() != model.num_groups() {
        return Err(Error::Dimension(format!(
            "model has {} groups, reference data {}",
            model.num_groups(),
            reference.num_groups()
        )));
    }
    let counts = reference.cell_counts();
    let mut adjusted = model.clone();
    for (j, c) in counts.iter().enumerate() {
        for y in 0..2u8 {
            if c[y as usize] == 0 {
                return Err(Error::GroupMissingLabel {
                    group: reference.group_names()[j].clone(),
                    label: y,
                });
            }
        }
        let total = (c[0] + c[1]) as f64;
        let zeta1 = c[0] as f64 / total;
        let zeta0 = c[1] as f64 / total;
        adjusted.group_offsets[j] = (zeta1 / zeta0).ln();
    }
    Ok(adjusted)
}

/// Threshold that reproduces, with intercept `intercept`, the labels a model
/// with intercept `new_intercept` and threshold `tau` assigns.
pub fn threshold_equiv(intercept: f64, new_intercept: f64, tau: f64) -> f64 {
    1.0 / ((new_intercept - intercept).exp() * (1.0 - tau) / tau + 1.0)
}
