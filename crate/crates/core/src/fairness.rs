//! Per-group sensitivity/specificity and threshold calibration.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::glm::Scorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.fp + self.tn
    }

    pub fn sensitivity(&self) -> Option<f64> {
        (self.positives() > 0).then(|| self.tp as f64 / self.positives() as f64)
    }

    pub fn specificity(&self) -> Option<f64> {
        (self.negatives() > 0).then(|| 1.0 - self.fp as f64 / self.negatives() as f64)
    }
}

/// Sensitivity and specificity per group. Groups without positives (or
/// negatives) have no sensitivity (or specificity) and are left out of the
/// corresponding range.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMetrics {
    pub sens: Vec<Option<f64>>,
    pub spec: Vec<Option<f64>>,
    pub sens_range: f64,
    pub spec_range: f64,
    pub counts: Vec<ConfusionCounts>,
}

impl GroupMetrics {
    pub fn from_counts(counts: Vec<ConfusionCounts>) -> Self {
        let sens: Vec<_> = counts.iter().map(ConfusionCounts::sensitivity).collect();
        let spec: Vec<_> = counts.iter().map(ConfusionCounts::specificity).collect();
        GroupMetrics {
            sens_range: range(&sens),
            spec_range: range(&spec),
            sens,
            spec,
            counts,
        }
    }

    /// Groups left out of at least one range for lack of rows.
    pub fn excluded_groups(&self) -> Vec<usize> {
        (0..self.counts.len())
            .filter(|&a| self.sens[a].is_none() || self.spec[a].is_none())
            .collect()
    }
}

fn range(values: &[Option<f64>]) -> f64 {
    let defined = values.iter().flatten();
    let (lo, hi) = defined.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

pub fn group_sens_spec(
    pred: &[u8],
    truth: &[u8],
    groups: &[usize],
    num_groups: usize,
) -> Result<GroupMetrics> {
    if pred.len() != truth.len() || pred.len() != groups.len() {
        return Err(Error::Dimension(format!(
            "pred {}, truth {}, groups {}",
            pred.len(),
            truth.len(),
            groups.len()
        )));
    }
    let mut counts = vec![ConfusionCounts::default(); num_groups];
    for ((&p, &t), &a) in pred.iter().zip(truth).zip(groups) {
        let c = counts.get_mut(a).ok_or(Error::GroupOutOfRange {
            row: 0,
            index: a,
            num_groups,
        })?;
        match (t, p) {
            (1, 1) => c.tp += 1,
            (1, _) => c.fn_ += 1,
            (_, 1) => c.fp += 1,
            _ => c.tn += 1,
        }
    }
    Ok(GroupMetrics::from_counts(counts))
}

/// Largest of the sensitivity and specificity ranges; zero exactly when
/// every group has the same sensitivity and the same specificity.
pub fn equal_odds_gap(metrics: &GroupMetrics) -> f64 {
    metrics.sens_range.max(metrics.spec_range)
}

/// Smallest threshold, among the observed negative scores and one value just
/// above the largest, whose specificity `#{s < τ} / #negatives` reaches
/// `target_spec`. Scores at or above the threshold classify as positive.
pub fn threshold_for_specificity(negative_scores: &[f64], target_spec: f64) -> Result<f64> {
    if negative_scores.is_empty() {
        return Err(Error::EmptyClass(0));
    }
    if !(target_spec > 0.0 && target_spec < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target specificity {target_spec} outside (0, 1)"
        )));
    }
    let mut sorted = negative_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // Fewest negatives that must fall strictly below the threshold.
    let need = (0..=n)
        .find(|&k| k as f64 / n as f64 >= target_spec)
        .expect("k = n gives specificity 1");
    let first_distinct = (need.max(1)..n).find(|&j| sorted[j] > sorted[j - 1]);
    Ok(match first_distinct {
        Some(j) => sorted[j],
        None => sorted[n - 1].next_up(),
    })
}

/// Threshold giving training specificity `target_spec` for `model`.
pub fn calibrate_threshold<S: Scorer + ?Sized>(
    model: &S,
    train: &Dataset,
    target_spec: f64,
) -> Result<f64> {
    let negatives: Vec<f64> = (0..train.n())
        .filter(|&i| train.labels()[i] == 0)
        .map(|i| model.score(train.groups()[i], train.z_row(i)))
        .collect();
    threshold_for_specificity(&negatives, target_spec)
}

/// One calibrated threshold per group, each from that group's negatives.
pub fn group_thresholds<S: Scorer + ?Sized>(
    model: &S,
    train: &Dataset,
    targets: &[f64],
) -> Result<Vec<f64>> {
    if targets.len() != train.num_groups() {
        return Err(Error::Dimension(format!(
            "{} targets for {} groups",
            targets.len(),
            train.num_groups()
        )));
    }
    let mut scores = vec![Vec::new(); train.num_groups()];
    for i in 0..train.n() {
        if train.labels()[i] == 0 {
            let a = train.groups()[i];
            scores[a].push(model.score(a, train.z_row(i)));
        }
    }
    scores
        .iter()
        .zip(targets)
        .enumerate()
        .map(|(a, (s, &t))| {
            threshold_for_specificity(s, t).map_err(|e| match e {
                Error::EmptyClass(_) => Error::GroupMissingLabel {
                    group: train.group_names()[a].clone(),
                    label: 0,
                },
                other => other,
            })
        })
        .collect()
}
