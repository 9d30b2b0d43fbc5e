//! Synthetic group-annotated data drawn from a logistic model with known
//! coefficients.
//!
//! One random stream is consumed in a fixed order: coefficients (intercept,
//! extra group coefficients, feature coefficients), then the parameters of the
//! feature distribution, then features, groups, and labels.

use std::fmt;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::odds::ZSampler;
use crate::rng::StreamRng;

/// Fixed group coefficients used for the first three groups.
pub const PRESET_GROUP_COEF: [f64; 3] = [-0.5, 0.2, 1.0];
const COEF_HALF_WIDTH: f64 = 0.1;
const COV_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZMode {
    /// Independent Bernoulli(1/2) features.
    Discrete,
    /// Multivariate normal features.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanMode {
    Zero,
    /// One mean vector per dataset with standard-normal entries.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovMode {
    Identity,
    /// `Σ = ΦᵀΦ` with `Φ` a `p×p` standard-normal matrix.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub num_groups: usize,
    pub z_mode: ZMode,
    /// Ignored in discrete mode.
    pub mean_mode: MeanMode,
    /// Ignored in discrete mode.
    pub cov_mode: CovMode,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 || self.num_groups < 2 {
            return Err(Error::InvalidParameter(format!(
                "simulation needs n >= 1, p >= 1 and at least 2 groups (n={}, p={}, groups={})",
                self.n, self.p, self.num_groups
            )));
        }
        Ok(())
    }
}

/// The ten feature-distribution / group-count combinations of the simulation
/// study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub z_mode: ZMode,
    pub mean_mode: MeanMode,
    pub cov_mode: CovMode,
    pub num_groups: usize,
}

impl Scenario {
    const KINDS: [(ZMode, MeanMode, CovMode); 5] = [
        (ZMode::Discrete, MeanMode::Zero, CovMode::Identity),
        (ZMode::Continuous, MeanMode::Zero, CovMode::Identity),
        (ZMode::Continuous, MeanMode::Zero, CovMode::Random),
        (ZMode::Continuous, MeanMode::Random, CovMode::Identity),
        (ZMode::Continuous, MeanMode::Random, CovMode::Random),
    ];

    /// All ten scenarios: the five feature distributions for 3 groups, then
    /// for 10 groups.
    pub fn all() -> Vec<Scenario> {
        [3, 10]
            .into_iter()
            .flat_map(|num_groups| {
                Self::KINDS
                    .into_iter()
                    .map(move |(z_mode, mean_mode, cov_mode)| Scenario {
                        z_mode,
                        mean_mode,
                        cov_mode,
                        num_groups,
                    })
            })
            .collect()
    }

    /// Short name such as `discrete-a3` or `zero-correlated-a10`.
    pub fn name(&self) -> String {
        format!("{}-a{}", self.kind_name(), self.num_groups)
    }

    pub fn kind_name(&self) -> &'static str {
        match (self.z_mode, self.mean_mode, self.cov_mode) {
            (ZMode::Discrete, _, _) => "discrete",
            (ZMode::Continuous, MeanMode::Zero, CovMode::Identity) => "zero-uncorrelated",
            (ZMode::Continuous, MeanMode::Zero, CovMode::Random) => "zero-correlated",
            (ZMode::Continuous, MeanMode::Random, CovMode::Identity) => "random-uncorrelated",
            (ZMode::Continuous, MeanMode::Random, CovMode::Random) => "random-correlated",
        }
    }

    /// Human-readable description of the feature distribution.
    pub fn description(&self) -> &'static str {
        match self.kind_name() {
            "discrete" => "Discrete",
            "zero-uncorrelated" => "Continuous, zero mean, uncorrelated",
            "zero-correlated" => "Continuous, zero mean, correlated",
            "random-uncorrelated" => "Continuous, random mean, uncorrelated",
            _ => "Continuous, random mean, correlated",
        }
    }

    pub fn is_correlated(&self) -> bool {
        self.z_mode == ZMode::Continuous && self.cov_mode == CovMode::Random
    }

    pub fn by_name(name: &str) -> Option<Scenario> {
        Scenario::all().into_iter().find(|s| s.name() == name)
    }

    pub fn config(&self, n: usize, p: usize, seed: u64) -> SimConfig {
        SimConfig {
            n,
            p,
            num_groups: self.num_groups,
            z_mode: self.z_mode,
            mean_mode: self.mean_mode,
            cov_mode: self.cov_mode,
            seed,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Ground-truth coefficients of the generating model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueTheta {
    pub intercept: f64,
    pub group_coef: Vec<f64>,
    pub feature_coef: Vec<f64>,
}

impl TrueTheta {
    pub fn linear_predictor(&self, group: usize, z: &[f64]) -> f64 {
        self.intercept
            + self.group_coef[group]
            + self.feature_coef.iter().zip(z).map(|(b, x)| b * x).sum::<f64>()
    }

    /// Flattened as `[intercept, group..., feature...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.intercept];
        v.extend_from_slice(&self.group_coef);
        v.extend_from_slice(&self.feature_coef);
        v
    }
}

fn small_coef<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-COEF_HALF_WIDTH..COEF_HALF_WIDTH)
}

/// Intercept and feature coefficients are Unif(-0.1, 0.1). The first three
/// group coefficients are fixed at (-0.5, 0.2, 1.0) when there are at least
/// three groups; the remaining ones are Unif(-0.1, 0.1).
pub fn make_theta<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> TrueTheta {
    let intercept = small_coef(rng);
    let fixed = if cfg.num_groups >= PRESET_GROUP_COEF.len() {
        PRESET_GROUP_COEF.len()
    } else {
        0
    };
    let mut group_coef = PRESET_GROUP_COEF[..fixed].to_vec();
    group_coef.extend((fixed..cfg.num_groups).map(|_| small_coef(rng)));
    let feature_coef = (0..cfg.p).map(|_| small_coef(rng)).collect();
    TrueTheta {
        intercept,
        group_coef,
        feature_coef,
    }
}

/// Distribution of the non-group features for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum ZDistribution {
    Bernoulli {
        p: usize,
    },
    Gaussian {
        mean: Array1<f64>,
        /// Lower Cholesky factor of the covariance; `None` is the identity.
        chol: Option<Array2<f64>>,
    },
}

impl ZDistribution {
    /// Draws the per-dataset parameters (mean vector, covariance) for `cfg`.
    pub fn draw<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> ZDistribution {
        let p = cfg.p;
        match cfg.z_mode {
            ZMode::Discrete => ZDistribution::Bernoulli { p },
            ZMode::Continuous => {
                let mean = match cfg.mean_mode {
                    MeanMode::Zero => Array1::zeros(p),
                    MeanMode::Random => (0..p).map(|_| rng.sample(StandardNormal)).collect(),
                };
                let chol = match cfg.cov_mode {
                    CovMode::Identity => None,
                    CovMode::Random => {
                        let phi = Array2::from_shape_simple_fn((p, p), || {
                            rng.sample::<f64, _>(StandardNormal)
                        });
                        let sigma = phi.t().dot(&phi);
                        Some(gaussian_factor(&sigma))
                    }
                };
                ZDistribution::Gaussian { mean, chol }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ZDistribution::Bernoulli { p } => *p,
            ZDistribution::Gaussian { mean, .. } => mean.len(),
        }
    }

    pub fn covariance(&self) -> Array2<f64> {
        match self {
            ZDistribution::Bernoulli { p } => Array2::eye(*p) * 0.25,
            ZDistribution::Gaussian { chol: None, mean } => Array2::eye(mean.len()),
            ZDistribution::Gaussian { chol: Some(l), .. } => l.dot(&l.t()),
        }
    }

    /// `rows` i.i.d. draws, one per row.
    pub fn sample<R: Rng + ?Sized>(&self, rows: usize, rng: &mut R) -> Array2<f64> {
        let p = self.dim();
        let mut out = Vec::with_capacity(rows * p);
        match self {
            ZDistribution::Bernoulli { .. } => {
                for _ in 0..rows * p {
                    out.push(if rng.random_bool(0.5) { 1.0 } else { 0.0 });
                }
            }
            ZDistribution::Gaussian { mean, chol } => {
                let mut eps = vec![0.0; p];
                for _ in 0..rows {
                    for e in eps.iter_mut() {
                        *e = rng.sample(StandardNormal);
                    }
                    match chol {
                        None => out.extend(mean.iter().zip(&eps).map(|(m, e)| m + e)),
                        Some(l) => {
                            for i in 0..p {
                                let mut v = mean[i];
                                for (k, e) in eps[..=i].iter().enumerate() {
                                    v += l[[i, k]] * e;
                                }
                                out.push(v);
                            }
                        }
                    }
                }
            }
        }
        Array2::from_shape_vec((rows, p), out).expect("shape")
    }
}

impl ZSampler for ZDistribution {
    fn sample_z(&self, _group: usize, rows: usize, rng: &mut StreamRng) -> Array2<f64> {
        self.sample(rows, rng)
    }
}

fn gaussian_factor(sigma: &Array2<f64>) -> Array2<f64> {
    cholesky(sigma, 0.0).unwrap_or_else(|| {
        let jittered = sigma + &(Array2::<f64>::eye(sigma.nrows()) * COV_JITTER);
        cholesky(&jittered, 0.0).expect("jittered covariance is positive definite")
    })
}

pub fn gen_z<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Array2<f64> {
    ZDistribution::draw(cfg, rng).sample(cfg.n, rng)
}

/// Uniform group membership.
pub fn gen_groups<R: Rng + ?Sized>(n: usize, num_groups: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..num_groups.max(1))).collect()
}

pub fn gen_labels<R: Rng + ?Sized>(
    z: &Array2<f64>,
    groups: &[usize],
    theta: &TrueTheta,
    rng: &mut R,
) -> Vec<u8> {
    z.outer_iter()
        .zip(groups)
        .map(|(row, &g)| {
            let eta = theta.linear_predictor(g, row.as_slice().expect("row-major"));
            u8::from(rng.random_bool(crate::glm::sigmoid(eta)))
        })
        .collect()
}

/// A generated dataset together with the model that produced it.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub data: Dataset,
    pub theta: TrueTheta,
    pub z_dist: ZDistribution,
}

pub fn generate(cfg: &SimConfig) -> Result<SimulatedData> {
    let mut rng = StreamRng::seed_from_u64(cfg.seed);
    generate_with(cfg, &mut rng)
}

pub fn generate_with<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<SimulatedData> {
    cfg.validate()?;
    let theta = make_theta(cfg, rng);
    let z_dist = ZDistribution::draw(cfg, rng);
    let z = z_dist.sample(cfg.n, rng);
    let groups = gen_groups(cfg.n, cfg.num_groups, rng);
    let labels = gen_labels(&z, &groups, &theta, rng);
    let data = Dataset::with_default_names(z, groups, labels, cfg.num_groups)?;
    Ok(SimulatedData {
        data,
        theta,
        z_dist,
    })
}
