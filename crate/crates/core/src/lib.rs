//! Equity-directed bootstrapping for imbalanced binary classification.
//!
//! The crate is organised around a group-annotated [`Dataset`]:
//!
//! * [`data`] partitions rows into (group, label) cells and splits each cell
//!   sequentially into train/test/validation parts.
//! * [`resample`] builds class-balanced ("blind") and class-and-group balanced
//!   ("equity") bootstrap training sets.
//! * [`glm`] fits logistic regression by damped Newton and a Bernoulli naive
//!   Bayes classifier.
//! * [`fairness`] measures per-group sensitivity and specificity and calibrates
//!   decision thresholds.
//! * [`odds`] estimates group odds-ratio matrices and applies group-dependent
//!   intercept adjustment.
//! * [`simgen`] draws synthetic data from a logistic model with known
//!   coefficients.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod fairness;
pub mod glm;
pub(crate) mod linalg;
pub mod odds;
pub mod resample;
pub mod rng;
pub mod simgen;

pub use data::{load_csv, partition_by_group_label, sequential_split, ColumnRoles, Dataset};
pub use data::{GroupLabelPartition, SplitFractions, TrainTestValSplit};
pub use error::{Error, Result};
pub use fairness::{calibrate_threshold, equal_odds_gap, group_sens_spec, GroupMetrics};
pub use glm::{fit_logistic, fit_naive_bayes, FitOptions, LogisticModel, NaiveBayesModel, Scorer};
pub use odds::{
    conditional_lor, empirical_or, intercept_adjust, mad_from_one, mc_lor, threshold_equiv,
    OddsEstimator, OddsRatioMatrix,
};
pub use resample::{blind_bootstrap, equity_bootstrap, BootstrapSpec, ReplacementPolicy};
pub use simgen::{Scenario, SimConfig, TrueTheta, ZDistribution};
