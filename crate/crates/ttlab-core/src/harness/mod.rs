//! Reproducible Monte Carlo experiments tying the samplers, statistics and
//! closed forms together.
//!
//! Replica i of any experiment draws its randomness as a pure function of
//! `(master_seed, stream_id, i)`, and per-replica summaries are merged in
//! ascending replica order, so a result is byte-identical no matter how
//! many workers ran it.

mod experiments;
mod result;

pub use result::{ExperimentResult, Provenance};
pub use stat_tests::{
    chi_square_from_counts, correlation, dkw_radius, ks_statistic, ks_two_sample, ChiSquare,
    EmpiricalDistribution, SampleSummary,
};

use crate::analytic::AnalyticError;
use crate::brw::BrwError;
use crate::rng::SeedSpec;
use crate::sampler::SampleError;
use crate::tree::{InvalidParams, TreeParams};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("experiment '{name}' requires parameter '{param}'")]
    MissingParameter { name: String, param: String },
    #[error("empty sample")]
    EmptySample,
    #[error("alpha {0} outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("chi-square: observed count in a zero-probability bin")]
    ImpossibleBin,
    #[error(transparent)]
    Sampler(#[from] SampleError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Brw(#[from] BrwError),
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
}

/// Name-specific knobs; only the ones an experiment consumes are set.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct ExtraParams {
    /// Number of ranked root masses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Mixture size / degree index, depending on the experiment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// BRW generation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    /// ε for the perturbed BRW.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Series truncation N for the remark identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u32>,
    /// Lower-tail threshold x for the Cramér check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Grid of n values (height scaling, Cramér check).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u32>>,
    /// Grid of trim values K.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<u32>>,
    /// Grid of BRW generations L.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_grid: Option<Vec<u32>>,
}

/// Full description of one experiment run.
///
/// `workers` controls scheduling only; it is deliberately excluded from the
/// serialized form so reruns with different worker counts emit identical
/// documents.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<TreeParams>,
    pub replicas: u64,
    pub seed: SeedSpec,
    #[serde(skip_serializing_if = "ExtraParams::is_default")]
    pub extra: ExtraParams,
    #[serde(skip)]
    pub workers: usize,
}

impl ExtraParams {
    fn is_default(&self) -> bool {
        *self == ExtraParams::default()
    }
}

impl ExperimentConfig {
    pub fn new(name: &str, replicas: u64, seed: SeedSpec) -> Self {
        Self {
            name: name.to_string(),
            params: None,
            replicas: replicas.max(1),
            seed,
            extra: ExtraParams::default(),
            workers: 1,
        }
    }

    pub fn with_params(mut self, params: TreeParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub(crate) fn require_params(&self) -> Result<TreeParams, HarnessError> {
        self.params.ok_or_else(|| HarnessError::MissingParameter {
            name: self.name.clone(),
            param: "params (n, p)".into(),
        })
    }
}

/// Names `run` understands.
pub const EXPERIMENT_NAMES: [&str; 10] = [
    "size_limit",
    "root_mass",
    "remark_identity",
    "height_scaling",
    "depth_concentration",
    "degree_distribution",
    "sampler_equivalence",
    "trimmed_height",
    "brw_martingale",
    "cramer_check",
];

/// Run one experiment; deterministic for a fixed config.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    let start = std::time::Instant::now();
    let mut result = ExperimentResult::new(config);
    match config.name.as_str() {
        "size_limit" => experiments::size_limit(config, &mut result)?,
        "root_mass" => experiments::root_mass(config, &mut result)?,
        "remark_identity" => experiments::remark_identity(config, &mut result)?,
        "height_scaling" => experiments::height_scaling(config, &mut result)?,
        "depth_concentration" => experiments::depth_concentration(config, &mut result)?,
        "degree_distribution" => experiments::degree_distribution(config, &mut result)?,
        "sampler_equivalence" => experiments::sampler_equivalence(config, &mut result)?,
        "trimmed_height" => experiments::trimmed_height(config, &mut result)?,
        "brw_martingale" => experiments::brw_martingale(config, &mut result)?,
        "cramer_check" => experiments::cramer_check(config, &mut result)?,
        other => return Err(HarnessError::UnknownExperiment(other.to_string())),
    }
    result.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(result)
}

/// Map replica indices through `f` on a dedicated pool, preserving replica
/// order in the output regardless of worker count.
pub(crate) fn parallel_replicas<T, E>(
    workers: usize,
    replicas: u64,
    f: impl Fn(u64) -> Result<T, E> + Sync + Send,
) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return (0..replicas).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| (0..replicas).into_par_iter().map(f).collect())
}
