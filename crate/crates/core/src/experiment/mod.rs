//! Batch experiments: per-trial graph, source, cascade and estimation runs,
//! dispatched over a worker pool with seeds derived from one master seed.

mod config;
mod summary;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{BoundsSpec, Candidates, EstimatorSpec, ExpTailSpec, ExperimentConfig, GraphSpec, NoiseSpec, RateSpec, SourceSpec};
pub use summary::{lower_median, summarize, Summary};

use crate::bounds::{self, BoundReport, BoundsError};
use crate::cascade::{default_alpha_beta, simulate_fpp, CascadeError, CascadeTrajectory, RateParams};
use crate::estimator::{run_estimation, EstimationRun, EstimatorConfig, EstimatorError, RunOptions};
use crate::graph::{Graph, GraphError, VertexSet};
use crate::observation::NoiseParams;
use crate::rng::{self, derive_seed, label};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("config: {0}")]
    Toml(String),
    #[error("summary of an empty result set")]
    EmptyInput,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// One CSV row per trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub trial: u64,
    pub seed: u64,
    pub stop_time: u64,
    pub fallback: bool,
    pub dist_error: usize,
    pub infected_at_stop: usize,
    pub spread_estimate_size: usize,
    pub containment: bool,
    pub boundary_contaminated: bool,
}

impl ResultRow {
    pub const COLUMNS: [&'static str; 9] = [
        "trial",
        "seed",
        "stop_time",
        "fallback",
        "dist_error",
        "infected_at_stop",
        "spread_estimate_size",
        "containment",
        "boundary_contaminated",
    ];

    pub fn from_run(trial: u64, seed: u64, run: &EstimationRun) -> Self {
        Self {
            trial,
            seed,
            stop_time: run.result.stop_time,
            fallback: run.result.fallback,
            dist_error: run.dist_error,
            infected_at_stop: run.infected_at_stop,
            spread_estimate_size: run.result.spread.vertices.len(),
            containment: run.containment,
            boundary_contaminated: run.boundary_contaminated,
        }
    }
}

/// Choices the output alone does not reveal, written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub crate_version: String,
    pub time_discretization: String,
    pub graph_sampling: String,
    pub seed_derivation: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
    pub metadata: RunMetadata,
}

/// A trial's full output, for callers that need more than the CSV row.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub row: ResultRow,
    pub run: EstimationRun,
    /// The trial's graph when graphs are not shared.
    pub graph: Option<Graph>,
}

fn with_rates(config: &ExperimentConfig, topology: &Graph, seed: u64) -> Result<Graph, ExperimentError> {
    Ok(match config.rates {
        RateSpec::FromFile => topology.clone(),
        RateSpec::Homogeneous { value } => topology.with_rates(|_, _| value)?,
        RateSpec::Uniform { low, high } => {
            let mut s = rng::stream(seed);
            topology.with_rates(|_, _| low + (high - low) * s.random::<f64>())?
        }
    })
}

/// The graph for a trial seed (or the master seed in shared mode).
pub fn build_trial_graph(config: &ExperimentConfig, seed: u64) -> Result<Graph, ExperimentError> {
    let topology = config.topology(derive_seed(seed, label::GRAPH))?;
    with_rates(config, &topology, derive_seed(seed, label::RATES))
}

fn candidates(config: &ExperimentConfig, g: &Graph) -> Result<VertexSet, ExperimentError> {
    match &config.estimator.candidates {
        Candidates::List(list) => VertexSet::new(list.clone(), g.vertex_count()).map_err(|e| ExperimentError::Config {
            field: "estimator.candidates".into(),
            message: e.to_string(),
        }),
        Candidates::Keyword(_) => Ok(VertexSet::all(g.vertex_count())),
    }
}

/// Estimator settings for `config` on `g`: candidate set, speeds and threshold.
pub fn estimator_config(config: &ExperimentConfig, g: &Graph) -> Result<EstimatorConfig, ExperimentError> {
    let speeds = match (config.estimator.alpha, config.estimator.beta) {
        (Some(alpha), Some(beta)) => RateParams::new(alpha, beta)?,
        _ => default_alpha_beta(g)?,
    };
    Ok(EstimatorConfig::new(candidates(config, g)?, speeds.alpha, speeds.beta, config.threshold_eps())?)
}

/// Everything one trial produces, with its observation log recorded.
#[derive(Debug, Clone)]
pub struct TrialArtifacts {
    pub graph: Graph,
    pub trajectory: CascadeTrajectory,
    pub run: EstimationRun,
}

fn simulate_trial(
    config: &ExperimentConfig,
    g: &Graph,
    seed: u64,
    record_rounds: bool,
) -> Result<(CascadeTrajectory, EstimationRun), ExperimentError> {
    let est = estimator_config(config, g)?;
    let source = match config.source {
        SourceSpec::Center => config.center().expect("validated"),
        SourceSpec::Uniform => {
            let u = est.candidates().as_slice();
            u[rng::stream(derive_seed(seed, label::SOURCE)).random_range(0..u.len())]
        }
    };
    let traj = simulate_fpp(g, source, derive_seed(seed, label::CASCADE))?;
    let noise = NoiseParams::new(config.noise.p, config.noise.eps).expect("validated");
    let options = RunOptions { record_rounds, sparse_signals: config.estimator.sparse_signals };
    let run = run_estimation(g, &est, &traj, noise, derive_seed(seed, label::OBSERVATION), options)?;
    Ok((traj, run))
}

fn run_trial(
    config: &ExperimentConfig,
    shared: Option<&Graph>,
    trial: u64,
) -> Result<TrialOutcome, ExperimentError> {
    let seed = derive_seed(config.seed, trial);
    let owned = match shared {
        Some(_) => None,
        None => Some(build_trial_graph(config, seed)?),
    };
    let g = shared.or(owned.as_ref()).expect("graph present");
    let (_, run) = simulate_trial(config, g, seed, false)?;
    Ok(TrialOutcome { row: ResultRow::from_run(trial, seed, &run), run, graph: owned })
}

/// Reruns a single trial of `config` exactly as [`run_experiment`] would,
/// keeping the graph, trajectory and observation rounds.
pub fn trial_artifacts(config: &ExperimentConfig, trial: u64) -> Result<TrialArtifacts, ExperimentError> {
    config.validate()?;
    let seed = derive_seed(config.seed, trial);
    let graph = build_trial_graph(config, if config.shared_graph { config.seed } else { seed })?;
    let (trajectory, run) = simulate_trial(config, &graph, seed, true)?;
    Ok(TrialArtifacts { graph, trajectory, run })
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, ExperimentError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every trial and returns their outcomes in trial order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialOutcome>, ExperimentError> {
    config.validate()?;
    let shared = if config.shared_graph { Some(build_trial_graph(config, config.seed)?) } else { None };
    in_pool(config.threads, || {
        (0..config.trials).into_par_iter().map(|i| run_trial(config, shared.as_ref(), i)).collect()
    })?
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let mut rows: Vec<ResultRow> = run_trials(config)?.into_iter().map(|o| o.row).collect();
    rows.sort_by_key(|r| r.trial);
    let summary = summarize(&rows)?;
    Ok(ExperimentResult { rows, summary, metadata: metadata(config) })
}

pub fn metadata(config: &ExperimentConfig) -> RunMetadata {
    let graph_sampling = if config.shared_graph {
        "one graph shared by all trials, built from the master seed"
    } else if config.graph_is_random() {
        "fresh graph per trial, built from the trial seed"
    } else {
        "deterministic graph, identical in every trial"
    };
    RunMetadata {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        time_discretization: "continuous-time cascade (first passage percolation); tests at integer times t = 0, 1, 2, ...".into(),
        graph_sampling: graph_sampling.into(),
        seed_derivation: "trial seed = splitmix64(master + (trial + 1) * 0x9E3779B97F4A7C15); \
                          sub-streams graph=0 rates=1 source=2 cascade=3 observation=4 derived the same way; ChaCha8"
            .into(),
        config: config.clone(),
    }
}

/// Bound reports for the `[bounds]` section, on the graph built from the
/// master seed.
pub fn verify_bounds(config: &ExperimentConfig) -> Result<Vec<BoundReport>, ExperimentError> {
    config.validate()?;
    let spec = config.bounds.as_ref().ok_or_else(|| ExperimentError::Config {
        field: "bounds".into(),
        message: "verify-bounds needs a [bounds] section".into(),
    })?;
    let g = build_trial_graph(config, config.seed)?;
    let speeds = match (spec.alpha, spec.beta) {
        (Some(a), Some(b)) => RateParams::new(a, b)?,
        _ => default_alpha_beta(&g)?,
    };
    let bounds_seed = derive_seed(config.seed, u64::MAX);
    let mut grid: Vec<u64> = spec.k_inner.iter().chain(&spec.k_outer).copied().collect();
    grid.sort_unstable();
    grid.dedup();
    let mut reports = Vec::new();
    if !grid.is_empty() {
        let (inner, outer) = in_pool(config.threads, || bounds::verify_containment(&g, speeds, &grid, spec.trials, bounds_seed))??;
        let keep = |rs: Vec<BoundReport>, ks: &[u64]| rs.into_iter().zip(&grid).filter(|(_, k)| ks.contains(k)).map(|(r, _)| r).collect::<Vec<_>>();
        reports.extend(keep(inner, &spec.k_inner));
        reports.extend(keep(outer, &spec.k_outer));
    }
    if let Some(e) = &spec.exp_tail {
        reports.push(bounds::verify_exp_sum_tail(e.m, &e.mu, e.eps, e.trials, derive_seed(bounds_seed, 1))?);
    }
    Ok(reports)
}
