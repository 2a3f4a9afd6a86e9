//! TOML experiment configuration. See `docs/config.md` for the schema.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::graph::{lattice, lattice_center, random_regular_graph, regular_tree, Graph, VertexId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub rates: RateSpec,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub source: SourceSpec,
    pub trials: u64,
    pub seed: u64,
    /// One graph for every trial instead of a fresh one per trial.
    #[serde(default)]
    pub shared_graph: bool,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub bounds: Option<BoundsSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    RandomRegular { n: usize, degree: usize },
    RegularTree { degree: usize, depth: usize },
    Lattice { dims: usize, side: usize },
    /// Edge-list file; relative paths resolve against the config's directory.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSpec {
    Homogeneous { value: f64 },
    /// Independent per-edge rates, uniform on `[low, high]`.
    Uniform { low: f64, high: f64 },
    /// Rates taken from the edge-list file.
    FromFile,
}

impl Default for RateSpec {
    fn default() -> Self {
        RateSpec::Homogeneous { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub p: f64,
    pub eps: f64,
    /// The `ε` used in the threshold; defaults to `eps`.
    #[serde(default)]
    pub threshold_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    /// When both are absent the speeds default to the degree/rate formula.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub candidates: Candidates,
    #[serde(default)]
    pub sparse_signals: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Candidates {
    /// Only `"all"` is accepted.
    Keyword(String),
    List(Vec<VertexId>),
}

impl Default for Candidates {
    fn default() -> Self {
        Candidates::Keyword("all".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SourceSpec {
    /// Uniform over the candidate set.
    #[default]
    Uniform,
    /// Tree root or lattice center.
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub k_inner: Vec<u64>,
    pub k_outer: Vec<u64>,
    pub trials: u64,
    /// Containment speeds; default to the degree/rate formula.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub exp_tail: Option<ExpTailSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTailSpec {
    pub m: usize,
    pub mu: Vec<f64>,
    pub eps: f64,
    pub trials: u64,
}

fn blame(field: &str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Config { field: field.to_string(), message: message.into() }
}

fn positive(field: &str, x: f64) -> Result<(), ExperimentError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(blame(field, format!("must be positive and finite (got {x})")))
    }
}

fn speeds(prefix: &str, alpha: Option<f64>, beta: Option<f64>) -> Result<(), ExperimentError> {
    match (alpha, beta) {
        (None, None) => Ok(()),
        (Some(a), Some(b)) => {
            positive(&format!("{prefix}.alpha"), a)?;
            positive(&format!("{prefix}.beta"), b)?;
            if a > b {
                return Err(blame(&format!("{prefix}.beta"), format!("must be >= alpha ({b} < {a})")));
            }
            Ok(())
        }
        (None, Some(_)) => Err(blame(&format!("{prefix}.alpha"), "alpha and beta must be given together")),
        (Some(_), None) => Err(blame(&format!("{prefix}.beta"), "alpha and beta must be given together")),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let config: Self = toml::from_str(text).map_err(|e| ExperimentError::Toml(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every parameter that can be checked without building a graph.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(blame("trials", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(blame("threads", "must be at least 1"));
        }
        match &self.graph {
            GraphSpec::RandomRegular { n, degree } => {
                if *degree < 3 {
                    return Err(blame("graph.degree", format!("must be at least 3 (got {degree})")));
                }
                if n <= degree {
                    return Err(blame("graph.n", format!("must exceed the degree (got {n})")));
                }
                if n % 2 == 1 && degree % 2 == 1 {
                    return Err(blame("graph.n", format!("n * degree must be even (got {n} * {degree})")));
                }
            }
            GraphSpec::RegularTree { degree, depth } => {
                if *degree < 3 {
                    return Err(blame("graph.degree", format!("must be at least 3 (got {degree})")));
                }
                if *depth == 0 {
                    return Err(blame("graph.depth", "must be at least 1"));
                }
            }
            GraphSpec::Lattice { dims, side } => {
                if *dims == 0 {
                    return Err(blame("graph.dims", "must be at least 1"));
                }
                if *side < 3 {
                    return Err(blame("graph.side", format!("must be at least 3 (got {side})")));
                }
            }
            GraphSpec::File { .. } => {}
        }
        match self.rates {
            RateSpec::Homogeneous { value } => positive("rates.value", value)?,
            RateSpec::Uniform { low, high } => {
                positive("rates.low", low)?;
                positive("rates.high", high)?;
                if low > high {
                    return Err(blame("rates.high", format!("must be >= low ({high} < {low})")));
                }
            }
            RateSpec::FromFile => {
                if !matches!(self.graph, GraphSpec::File { .. }) {
                    return Err(blame("rates.kind", "from_file needs graph.kind = \"file\""));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.noise.p) {
            return Err(blame("noise.p", format!("must lie in [0, 1] (got {})", self.noise.p)));
        }
        if !(0.0..0.5).contains(&self.noise.eps) {
            return Err(blame("noise.eps", format!("must lie in [0, 1/2) (got {})", self.noise.eps)));
        }
        let te = self.threshold_eps();
        if !(te > 0.0 && te < 0.5) {
            let field = if self.noise.threshold_eps.is_some() { "noise.threshold_eps" } else { "noise.eps" };
            return Err(blame(field, format!("threshold needs 0 < eps < 1/2 (got {te})")));
        }
        speeds("estimator", self.estimator.alpha, self.estimator.beta)?;
        match &self.estimator.candidates {
            Candidates::Keyword(k) if k == "all" => {}
            Candidates::Keyword(k) => {
                return Err(blame("estimator.candidates", format!("expected \"all\" or a list (got \"{k}\")")));
            }
            Candidates::List(list) => {
                if list.len() < 2 {
                    return Err(blame("estimator.candidates", "need at least two candidates"));
                }
                if let Some(w) = list.windows(2).find(|w| w[0] >= w[1]) {
                    return Err(blame(
                        "estimator.candidates",
                        format!("must be strictly increasing (saw {} then {})", w[0], w[1]),
                    ));
                }
            }
        }
        if self.source == SourceSpec::Center
            && !matches!(self.graph, GraphSpec::RegularTree { .. } | GraphSpec::Lattice { .. })
        {
            return Err(blame("source", "\"center\" needs a regular_tree or lattice graph"));
        }
        if let Some(b) = &self.bounds {
            if b.trials == 0 {
                return Err(blame("bounds.trials", "must be at least 1"));
            }
            speeds("bounds", b.alpha, b.beta)?;
            if let Some(e) = &b.exp_tail {
                if e.m == 0 {
                    return Err(blame("bounds.exp_tail.m", "must be at least 1"));
                }
                if e.trials == 0 {
                    return Err(blame("bounds.exp_tail.trials", "must be at least 1"));
                }
                if e.mu.len() != 1 && e.mu.len() != e.m {
                    return Err(blame("bounds.exp_tail.mu", format!("needs 1 or {} rates", e.m)));
                }
                for &mu in &e.mu {
                    positive("bounds.exp_tail.mu", mu)?;
                }
                let mu = e.mu.iter().copied().fold(0.0, f64::max);
                if !(e.eps > 0.0 && e.eps < 1.0 / mu) {
                    return Err(blame("bounds.exp_tail.eps", format!("must lie in (0, 1/mu) (got {})", e.eps)));
                }
            }
        }
        Ok(())
    }

    pub fn threshold_eps(&self) -> f64 {
        self.noise.threshold_eps.unwrap_or(self.noise.eps)
    }

    /// Resolves a relative edge-list path against `base`.
    pub fn resolve_paths(&mut self, base: &std::path::Path) {
        if let GraphSpec::File { path } = &mut self.graph {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    /// Unweighted topology; file graphs keep their rates.
    pub(crate) fn topology(&self, seed: u64) -> Result<Graph, ExperimentError> {
        let g = match &self.graph {
            GraphSpec::RandomRegular { n, degree } => random_regular_graph(*n, *degree, seed)?,
            GraphSpec::RegularTree { degree, depth } => regular_tree(*degree, *depth)?,
            GraphSpec::Lattice { dims, side } => lattice(*dims, *side)?,
            GraphSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| blame("graph.path", format!("{}: {e}", path.display())))?;
                crate::io::read_edge_list(&text).map_err(|e| blame("graph.path", e.to_string()))?
            }
        };
        Ok(g)
    }

    pub(crate) fn center(&self) -> Option<VertexId> {
        match self.graph {
            GraphSpec::RegularTree { .. } => Some(0),
            GraphSpec::Lattice { dims, side } => Some(lattice_center(dims, side)),
            _ => None,
        }
    }

    /// Whether graphs differ between trials.
    pub fn graph_is_random(&self) -> bool {
        matches!(self.graph, GraphSpec::RandomRegular { .. }) || matches!(self.rates, RateSpec::Uniform { .. })
    }
}
