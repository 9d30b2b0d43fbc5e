//! Blind vs equity training on a labelled dataset: split each (group, label)
//! cell 60/20/20, bootstrap the training part, fit both classifiers,
//! calibrate thresholds to a common training specificity, and evaluate per
//! group on the frozen test cells.

use equiboot_core::data::{partition_by_group_label, sequential_split};
use equiboot_core::fairness::{calibrate_threshold, equal_odds_gap, group_sens_spec, GroupMetrics};
use equiboot_core::odds::{conditional_lor, empirical_or, OddsRatioMatrix};
use equiboot_core::resample::{blind_bootstrap, equity_bootstrap, BootstrapSpec};
use equiboot_core::rng::derive_seed;
use equiboot_core::{fit_logistic, fit_naive_bayes, Dataset, Error, LogisticModel, NaiveBayesModel, Scorer};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Blind,
    Equity,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Blind => "blind",
            Regime::Equity => "equity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Logistic,
    NaiveBayes,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::NaiveBayes => "naive_bayes",
        }
    }
}

/// Test-set score counts of one (model, group, label) series over equal-width
/// bins on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub group: usize,
    pub label: u8,
    pub counts: Vec<usize>,
}

pub fn bin_of(score: f64, bins: usize) -> usize {
    ((score * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvaluation {
    pub kind: ModelKind,
    pub threshold: f64,
    pub metrics: GroupMetrics,
    pub gap: f64,
    pub histograms: Vec<Histogram>,
}

#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub regime: Regime,
    pub train_rows: usize,
    pub logistic: LogisticModel,
    pub naive_bayes: Option<NaiveBayesModel>,
    pub evaluations: Vec<ModelEvaluation>,
    /// Counting odds ratios of the bootstrap training set.
    pub train_eor: OddsRatioMatrix,
    pub lor: OddsRatioMatrix,
}

impl RegimeReport {
    pub fn evaluation(&self, kind: ModelKind) -> Option<&ModelEvaluation> {
        self.evaluations.iter().find(|e| e.kind == kind)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub group_names: Vec<String>,
    pub m_per_cell: usize,
    pub test_rows: usize,
    pub regimes: Vec<RegimeReport>,
    pub notes: Vec<String>,
}

impl PipelineReport {
    pub fn regime(&self, regime: Regime) -> &RegimeReport {
        self.regimes
            .iter()
            .find(|r| r.regime == regime)
            .expect("both regimes are always run")
    }
}

fn evaluate<S: Scorer>(
    kind: ModelKind,
    model: &S,
    threshold: f64,
    test: &Dataset,
    bins: usize,
) -> Result<ModelEvaluation, HarnessError> {
    let scores = model.score_rows(test);
    let pred: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let metrics = group_sens_spec(&pred, test.labels(), test.groups(), test.num_groups())?;
    let mut histograms: Vec<Histogram> = (0..test.num_groups())
        .flat_map(|group| {
            (0..2u8).map(move |label| Histogram {
                group,
                label,
                counts: vec![0; bins],
            })
        })
        .collect();
    for (i, &s) in scores.iter().enumerate() {
        let series = 2 * test.groups()[i] + test.labels()[i] as usize;
        histograms[series].counts[bin_of(s, bins)] += 1;
    }
    Ok(ModelEvaluation {
        kind,
        threshold,
        gap: equal_odds_gap(&metrics),
        metrics,
        histograms,
    })
}

fn is_binary(data: &Dataset) -> bool {
    data.z().iter().all(|&v| v == 0.0 || v == 1.0)
}

pub fn run_dataset_pipeline(
    config: &ExperimentConfig,
    data: &Dataset,
) -> Result<PipelineReport, HarnessError> {
    config.validate()?;
    let part = partition_by_group_label(data);
    let split = sequential_split(&part, config.split_fractions()?)?;
    let num_groups = data.num_groups();

    let smallest = (0..num_groups)
        .flat_map(|a| (0..2u8).map(move |y| (a, y)))
        .map(|(a, y)| (split.train_cell(a, y).len(), a, y))
        .min()
        .ok_or_else(|| HarnessError::Config("dataset has no groups".into()))?;
    if smallest.0 == 0 {
        return Err(Error::EmptyCell {
            group: data.group_names()[smallest.1].clone(),
            label: smallest.2,
        }
        .into());
    }
    let m = config
        .bootstrap
        .m_per_cell
        .unwrap_or_else(|| smallest.0.min(config.bootstrap.m_cap));
    let n_pos = config.bootstrap.n_pos.unwrap_or(num_groups * m);
    let n_neg = config.bootstrap.n_neg.unwrap_or(num_groups * m);
    let replacement = config.bootstrap.replacement.into();

    let test = data.subset(&split.test_indices());
    let mut notes = Vec::new();
    let binary = is_binary(data);
    if !binary {
        notes.push("naive Bayes skipped: predictors are not all binary".to_string());
    }
    let bins = config.metrics.histogram_bins;
    let target = config.metrics.target_spec;
    let fit_opts = config.fit.options();

    let mut regimes = Vec::with_capacity(2);
    for (r, regime) in [Regime::Blind, Regime::Equity].into_iter().enumerate() {
        let seed = derive_seed(config.master_seed, &[u64::MAX, r as u64]);
        let train = match regime {
            Regime::Blind => {
                let spec = BootstrapSpec::blind(n_pos, n_neg, seed).with_replacement(replacement);
                blind_bootstrap(&split, data, &spec)?
            }
            Regime::Equity => {
                let spec = BootstrapSpec::equity(m, seed).with_replacement(replacement);
                equity_bootstrap(&split, data, &spec)?
            }
        };
        let lr = fit_logistic(&train, &fit_opts, None)?;
        let tau = calibrate_threshold(&lr, &train, target)?;
        let lr = lr.with_threshold(tau)?;
        if lr.fit.is_some_and(|f| !f.converged) {
            notes.push(format!("{}: logistic fit did not reach tolerance", regime.name()));
        }
        let mut evaluations = vec![evaluate(ModelKind::Logistic, &lr, tau, &test, bins)?];
        let naive_bayes = if binary {
            let nb = fit_naive_bayes(&train)?;
            let nb_tau = calibrate_threshold(&nb, &train, target)?;
            evaluations.push(evaluate(ModelKind::NaiveBayes, &nb, nb_tau, &test, bins)?);
            Some(nb)
        } else {
            None
        };
        for e in &evaluations {
            let excluded = e.metrics.excluded_groups();
            if !excluded.is_empty() {
                let names: Vec<&str> = excluded.iter().map(|&a| data.group_names()[a].as_str()).collect();
                notes.push(format!(
                    "{} {}: groups without test positives or negatives left out of ranges: {}",
                    regime.name(),
                    e.kind.name(),
                    names.join(", ")
                ));
            }
        }
        regimes.push(RegimeReport {
            regime,
            train_rows: train.n(),
            train_eor: empirical_or(&train),
            lor: conditional_lor(&lr),
            logistic: lr,
            naive_bayes,
            evaluations,
        });
    }
    Ok(PipelineReport {
        group_names: data.group_names().to_vec(),
        m_per_cell: m,
        test_rows: test.n(),
        regimes,
        notes,
    })
}
