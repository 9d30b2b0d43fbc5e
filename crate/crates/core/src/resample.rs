//! Blind (class-balanced) and equity-directed (class- and group-balanced)
//! bootstrap construction.

use rand::seq::index;
use rand::{Rng, SeedableRng};

use crate::data::{Dataset, TrainTestValSplit};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReplacementPolicy {
    /// Without replacement when the source has at least the requested number
    /// of rows, with replacement otherwise.
    #[default]
    Auto,
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapMode {
    /// `n_pos` positives and `n_neg` negatives from the pooled training set.
    Blind { n_pos: usize, n_neg: usize },
    /// Exactly `m_per_cell` rows from every (group, label) training cell.
    Equity { m_per_cell: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapSpec {
    pub mode: BootstrapMode,
    pub replacement: ReplacementPolicy,
    pub seed: u64,
}

impl BootstrapSpec {
    pub fn blind(n_pos: usize, n_neg: usize, seed: u64) -> Self {
        BootstrapSpec {
            mode: BootstrapMode::Blind { n_pos, n_neg },
            replacement: ReplacementPolicy::Auto,
            seed,
        }
    }

    pub fn equity(m_per_cell: usize, seed: u64) -> Self {
        BootstrapSpec {
            mode: BootstrapMode::Equity { m_per_cell },
            replacement: ReplacementPolicy::Auto,
            seed,
        }
    }

    pub fn with_replacement(mut self, policy: ReplacementPolicy) -> Self {
        self.replacement = policy;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.mode {
            BootstrapMode::Blind { n_pos, n_neg } => n_pos >= 1 && n_neg >= 1,
            BootstrapMode::Equity { m_per_cell } => m_per_cell >= 1,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "bootstrap counts must be positive: {:?}",
                self.mode
            )));
        }
        Ok(())
    }
}

/// Draws `count` entries of `source`.
pub fn draw<R: Rng + ?Sized>(
    source: &[usize],
    count: usize,
    policy: ReplacementPolicy,
    rng: &mut R,
) -> Vec<usize> {
    let with_replacement = policy == ReplacementPolicy::Always || source.len() < count;
    if with_replacement {
        (0..count)
            .map(|_| source[rng.random_range(0..source.len())])
            .collect()
    } else {
        index::sample(rng, source.len(), count)
            .into_iter()
            .map(|k| source[k])
            .collect()
    }
}

/// Source row indices of a blind bootstrap: positives (always with
/// replacement) followed by negatives (per the replacement policy).
pub fn blind_indices(split: &TrainTestValSplit, spec: &BootstrapSpec) -> Result<Vec<usize>> {
    spec.validate()?;
    let BootstrapMode::Blind { n_pos, n_neg } = spec.mode else {
        return Err(Error::InvalidParameter("expected a blind bootstrap spec".into()));
    };
    let pooled = |y: u8| -> Vec<usize> {
        (0..split.num_groups())
            .flat_map(|a| split.train_cell(a, y).iter().copied())
            .collect()
    };
    let pos = pooled(1);
    let neg = pooled(0);
    if pos.is_empty() {
        return Err(Error::EmptyClass(1));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass(0));
    }
    let mut rng = StreamRng::seed_from_u64(spec.seed);
    let mut rows = draw(&pos, n_pos, ReplacementPolicy::Always, &mut rng);
    rows.extend(draw(&neg, n_neg, spec.replacement, &mut rng));
    Ok(rows)
}

/// Source row indices of an equity bootstrap, cell by cell in (group, label)
/// order.
pub fn equity_indices(
    split: &TrainTestValSplit,
    group_names: &[String],
    spec: &BootstrapSpec,
) -> Result<Vec<usize>> {
    spec.validate()?;
    let BootstrapMode::Equity { m_per_cell: m } = spec.mode else {
        return Err(Error::InvalidParameter("expected an equity bootstrap spec".into()));
    };
    let num_groups = split.num_groups();
    for a in 0..num_groups {
        for y in 0..2u8 {
            if split.train_cell(a, y).is_empty() {
                return Err(Error::EmptyCell {
                    group: group_names.get(a).cloned().unwrap_or_else(|| a.to_string()),
                    label: y,
                });
            }
        }
    }
    let mut rng = StreamRng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(2 * num_groups * m);
    for a in 0..num_groups {
        for y in 0..2u8 {
            rows.extend(draw(split.train_cell(a, y), m, spec.replacement, &mut rng));
        }
    }
    Ok(rows)
}

/// Class-balanced training set that ignores group membership.
pub fn blind_bootstrap(
    split: &TrainTestValSplit,
    data: &Dataset,
    spec: &BootstrapSpec,
) -> Result<Dataset> {
    Ok(data.subset(&blind_indices(split, spec)?))
}

/// Training set with exactly `M` rows in every (group, label) cell.
pub fn equity_bootstrap(
    split: &TrainTestValSplit,
    data: &Dataset,
    spec: &BootstrapSpec,
) -> Result<Dataset> {
    Ok(data.subset(&equity_indices(split, data.group_names(), spec)?))
}
