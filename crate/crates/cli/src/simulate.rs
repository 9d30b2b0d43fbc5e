//! The odds-ratio simulation study: for each scenario and replication, fit
//! logistic regression to the generated data and to its equity bootstrap,
//! adjust intercepts of the original fit, and summarise every odds-ratio
//! matrix by its mean absolute deviation from one.

use equiboot_core::data::partition_by_group_label;
use equiboot_core::odds::{empirical_or, mc_lor_from_samples, mad_from_one, OddsRatioMatrix};
use equiboot_core::resample::{equity_bootstrap, BootstrapSpec};
use equiboot_core::rng::{derive_seed, StreamRng};
use equiboot_core::simgen::generate_with;
use equiboot_core::{conditional_lor, fit_logistic, intercept_adjust, Scenario, TrainTestValSplit};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

/// Columns of the summary table, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    OriginalEor,
    OriginalLor,
    OriginalMclor,
    EquityEor,
    EquityLor,
    EquityMclor,
    InterceptAdjusted,
}

impl Statistic {
    pub const ALL: [Statistic; 7] = [
        Statistic::OriginalEor,
        Statistic::OriginalLor,
        Statistic::OriginalMclor,
        Statistic::EquityEor,
        Statistic::EquityLor,
        Statistic::EquityMclor,
        Statistic::InterceptAdjusted,
    ];

    pub fn column(&self) -> &'static str {
        match self {
            Statistic::OriginalEor => "orig_eor",
            Statistic::OriginalLor => "orig_lor",
            Statistic::OriginalMclor => "orig_mclor",
            Statistic::EquityEor => "equity_eor",
            Statistic::EquityLor => "equity_lor",
            Statistic::EquityMclor => "equity_mclor",
            Statistic::InterceptAdjusted => "intadj",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

/// Mad values of one replication under both diagonal conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub seed: u64,
    pub off_diagonal: [f64; 7],
    pub all_entries: [f64; 7],
    /// Largest ratio of final gradient norm to tolerance over both fits.
    pub worst_grad_ratio: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    pub scenario: Scenario,
    pub replications: usize,
    /// Means over replications, diagonal excluded.
    pub off_diagonal: [f64; 7],
    /// Means over replications, diagonal included.
    pub all_entries: [f64; 7],
    pub nonconverged: usize,
    pub worst_grad_ratio: f64,
}

impl ScenarioRow {
    pub fn values(&self, diagonal_included: bool) -> &[f64; 7] {
        if diagonal_included {
            &self.all_entries
        } else {
            &self.off_diagonal
        }
    }

    pub fn get(&self, stat: Statistic, diagonal_included: bool) -> f64 {
        self.values(diagonal_included)[stat.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table4Report {
    pub rows: Vec<ScenarioRow>,
    pub mad_diagonal: bool,
    pub n: usize,
    pub p: usize,
    pub m_per_cell: usize,
    pub mclor_nu: usize,
    pub replications: usize,
    pub master_seed: u64,
}

/// Seed of one replication. Depends on the scenario's position in the full
/// grid, so running a subset reproduces the same replications.
pub fn replication_seed(master_seed: u64, scenario_index: usize, replication: usize) -> u64 {
    derive_seed(master_seed, &[scenario_index as u64, replication as u64])
}

fn both(m: &OddsRatioMatrix) -> (f64, f64) {
    (mad_from_one(m, false).value, mad_from_one(m, true).value)
}

pub fn run_replication(
    scenario: &Scenario,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<ReplicationStats, equiboot_core::Error> {
    let mut rng = StreamRng::seed_from_u64(seed);
    let sim_cfg = scenario.config(config.sim.n, config.sim.p, seed);
    let sim = generate_with(&sim_cfg, &mut rng)?;
    let data = &sim.data;
    let fit_opts = config.fit.options();

    let original = fit_logistic(data, &fit_opts, None)?;

    let split = TrainTestValSplit::train_only(&partition_by_group_label(data));
    let spec = BootstrapSpec::equity(config.sim_m_per_cell(), rng.random())
        .with_replacement(config.bootstrap.replacement.into());
    let boot = equity_bootstrap(&split, data, &spec)?;
    let refit = fit_logistic(&boot, &fit_opts, None)?;

    let adjusted = intercept_adjust(&original, data)?;

    // One fresh feature sample shared by every model and group.
    let z_mc = sim.z_dist.sample(config.metrics.mclor_nu, &mut rng);

    let matrices = [
        empirical_or(data),
        conditional_lor(&original),
        mc_lor_from_samples(&original, &z_mc),
        empirical_or(&boot),
        conditional_lor(&refit),
        mc_lor_from_samples(&refit, &z_mc),
        mc_lor_from_samples(&adjusted, &z_mc),
    ];
    let mut off_diagonal = [0.0; 7];
    let mut all_entries = [0.0; 7];
    for (k, m) in matrices.iter().enumerate() {
        (off_diagonal[k], all_entries[k]) = both(m);
    }
    let fits = [original.fit, refit.fit].map(|f| f.expect("fitted model"));
    Ok(ReplicationStats {
        seed,
        off_diagonal,
        all_entries,
        worst_grad_ratio: fits
            .iter()
            .map(|f| f.grad_norm / f.tolerance)
            .fold(0.0, f64::max),
        converged: fits.iter().all(|f| f.converged),
    })
}

/// Runs every selected scenario. Replications run on the current rayon pool;
/// aggregation is in replication order, so results do not depend on the
/// number of threads.
pub fn run_simulation(config: &ExperimentConfig) -> Result<Table4Report, HarnessError> {
    config.validate()?;
    let scenarios = config.scenario_list()?;
    let tasks: Vec<(usize, usize, Scenario)> = scenarios
        .iter()
        .flat_map(|&(idx, s)| (0..config.replications).map(move |r| (idx, r, s)))
        .collect();
    let results: Vec<Result<ReplicationStats, HarnessError>> = tasks
        .par_iter()
        .map(|&(idx, rep, scenario)| {
            let seed = replication_seed(config.master_seed, idx, rep);
            run_replication(&scenario, config, seed).map_err(|source| HarnessError::Replication {
                scenario: scenario.name(),
                replication: rep,
                seed,
                source,
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(scenarios.len());
    let mut results = results.into_iter();
    for &(_, scenario) in &scenarios {
        let mut off = [0.0; 7];
        let mut all = [0.0; 7];
        let mut nonconverged = 0;
        let mut worst = 0.0f64;
        for _ in 0..config.replications {
            let r = results.next().expect("one result per task")?;
            for k in 0..7 {
                off[k] += r.off_diagonal[k];
                all[k] += r.all_entries[k];
            }
            nonconverged += usize::from(!r.converged);
            worst = worst.max(r.worst_grad_ratio);
        }
        let reps = config.replications as f64;
        rows.push(ScenarioRow {
            scenario,
            replications: config.replications,
            off_diagonal: off.map(|v| v / reps),
            all_entries: all.map(|v| v / reps),
            nonconverged,
            worst_grad_ratio: worst,
        });
    }
    Ok(Table4Report {
        rows,
        mad_diagonal: config.metrics.mad_diagonal,
        n: config.sim.n,
        p: config.sim.p,
        m_per_cell: config.sim_m_per_cell(),
        mclor_nu: config.metrics.mclor_nu,
        replications: config.replications,
        master_seed: config.master_seed,
    })
}
