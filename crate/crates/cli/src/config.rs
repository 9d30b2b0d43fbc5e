//! Experiment configuration, read from a TOML file (flat `key = value` pairs
//! under `[section]` headers).

use std::path::{Path, PathBuf};

use equiboot_core::data::SplitFractions;
use equiboot_core::resample::ReplacementPolicy;
use equiboot_core::{FitOptions, Scenario};
use serde::Deserialize;

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Dataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Replacement {
    #[default]
    Auto,
    Always,
}

impl From<Replacement> for ReplacementPolicy {
    fn from(r: Replacement) -> Self {
        match r {
            Replacement::Auto => ReplacementPolicy::Auto,
            Replacement::Always => ReplacementPolicy::Always,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n: usize,
    pub p: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection { n: 50_000, p: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSection {
    /// Rows per (group, label) cell. Simulation default 800; dataset default
    /// is the smallest training cell, capped at `m_cap`.
    pub m_per_cell: Option<usize>,
    pub m_cap: usize,
    /// Blind bootstrap class counts; default `num_groups * M` each.
    pub n_pos: Option<usize>,
    pub n_neg: Option<usize>,
    pub replacement: Replacement,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        BootstrapSection {
            m_per_cell: None,
            m_cap: 500_000,
            n_pos: None,
            n_neg: None,
            replacement: Replacement::Auto,
        }
    }
}

pub const DEFAULT_SIM_M: usize = 800;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub tol_grad: Option<f64>,
    pub max_iter: usize,
    pub ridge: f64,
    pub verbose: bool,
}

impl Default for FitSection {
    fn default() -> Self {
        let d = FitOptions::default();
        FitSection {
            tol_grad: d.tol_grad,
            max_iter: d.max_iter,
            ridge: d.ridge,
            verbose: d.verbose,
        }
    }
}

impl FitSection {
    pub fn options(&self) -> FitOptions {
        FitOptions {
            tol_grad: self.tol_grad,
            max_iter: self.max_iter,
            ridge: self.ridge,
            verbose: self.verbose,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub target_spec: f64,
    pub mclor_nu: usize,
    /// Include the unit diagonal when averaging |ρ - 1|.
    pub mad_diagonal: bool,
    pub histogram_bins: usize,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection {
            target_spec: 0.56,
            mclor_nu: 20_000,
            mad_diagonal: false,
            histogram_bins: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub group_column: String,
    pub label_column: String,
    pub train_fraction: f64,
    pub test_fraction: f64,
    pub val_fraction: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            group_column: "group".into(),
            label_column: "y".into(),
            train_fraction: 0.6,
            test_fraction: 0.2,
            val_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub master_seed: u64,
    pub replications: usize,
    pub output_dir: PathBuf,
    /// Scenario names, or `["all"]`.
    pub scenarios: Vec<String>,
    pub sim: SimSection,
    pub bootstrap: BootstrapSection,
    pub fit: FitSection,
    pub metrics: MetricsSection,
    pub dataset: DatasetSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: None,
            master_seed: 2021,
            replications: 100,
            output_dir: PathBuf::from("out"),
            scenarios: vec!["all".into()],
            sim: SimSection::default(),
            bootstrap: BootstrapSection::default(),
            fit: FitSection::default(),
            metrics: MetricsSection::default(),
            dataset: DatasetSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.replications == 0 {
            return fail("replications must be at least 1".into());
        }
        self.scenario_list()?;
        if self.sim.n == 0 || self.sim.p == 0 {
            return fail("sim.n and sim.p must be positive".into());
        }
        if self.bootstrap.m_per_cell == Some(0) || self.bootstrap.m_cap == 0 {
            return fail("bootstrap counts must be positive".into());
        }
        if self.bootstrap.n_pos == Some(0) || self.bootstrap.n_neg == Some(0) {
            return fail("bootstrap counts must be positive".into());
        }
        if !(self.metrics.target_spec > 0.0 && self.metrics.target_spec < 1.0) {
            return fail(format!("target_spec {} outside (0, 1)", self.metrics.target_spec));
        }
        if self.metrics.mclor_nu == 0 || self.metrics.histogram_bins == 0 {
            return fail("mclor_nu and histogram_bins must be positive".into());
        }
        if self.fit.max_iter == 0 || !(self.fit.ridge >= 0.0) || self.fit.tol_grad.is_some_and(|t| !(t > 0.0)) {
            return fail("invalid [fit] section".into());
        }
        self.split_fractions()?;
        Ok(())
    }

    /// Resolves scenario names; `all` expands to the full grid.
    pub fn scenario_list(&self) -> Result<Vec<(usize, Scenario)>, HarnessError> {
        let all = Scenario::all();
        if self.scenarios.is_empty() {
            return Err(HarnessError::Config("no scenarios selected".into()));
        }
        if self.scenarios.iter().any(|s| s == "all") {
            return Ok(all.into_iter().enumerate().collect());
        }
        self.scenarios
            .iter()
            .map(|name| {
                all.iter()
                    .position(|s| s.name() == *name)
                    .map(|i| (i, all[i]))
                    .ok_or_else(|| {
                        let known: Vec<String> = all.iter().map(|s| s.name()).collect();
                        HarnessError::Config(format!(
                            "unknown scenario {name:?}; known: {}",
                            known.join(", ")
                        ))
                    })
            })
            .collect()
    }

    pub fn split_fractions(&self) -> Result<SplitFractions, HarnessError> {
        let d = &self.dataset;
        SplitFractions::new(d.train_fraction, d.test_fraction, d.val_fraction)
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn sim_m_per_cell(&self) -> usize {
        self.bootstrap.m_per_cell.unwrap_or(DEFAULT_SIM_M)
    }
}
