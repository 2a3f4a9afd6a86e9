//! Sequential source estimation and full-spread estimation.
//!
//! Each candidate `v` keeps a running score
//! `Z_v(t) = Σ_{s<=t} Σ_{w ∈ N_v(α s)} Y_w(s)`. After round `t`, candidate
//! `v` halts when its score beats every candidate at hop distance at least
//! `(α + β) t` by the threshold `τ = 2 log|U| / log((1 - ε) / ε)`. The first
//! halting candidate is the source estimate, and the ball of radius
//! `(α + 2β) T` around it is the spread estimate.

use rand::Rng;
use thiserror::Error;

use crate::cascade::{CascadeError, CascadeTrajectory};
use crate::graph::{radius_floor, BallIndex, Graph, GraphError, VertexId, VertexSet};
use crate::observation::{sample_round_masked, NoiseParams, ObservationRound};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("threshold needs 0 < eps < 1/2 (got {0})")]
    InvalidThresholdEps(f64),
    #[error("threshold needs at least 2 candidates (got {0})")]
    TooFewCandidates(usize),
    #[error("alpha and beta must be positive and finite (got alpha={alpha}, beta={beta})")]
    InvalidSpeeds { alpha: f64, beta: f64 },
    #[error("expected observation round {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error("round has {got} signals but the graph has {expected} vertices")]
    SizeMismatch { got: usize, expected: usize },
    #[error("estimator already halted at t={0}")]
    AlreadyHalted(u64),
    #[error("replay ended after {rounds} rounds without a decision")]
    ReplayExhausted { rounds: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
}

/// `2 log|U| / log((1 - ε) / ε)`; the base of the logarithm cancels.
pub fn threshold(candidate_count: usize, eps: f64) -> Result<f64, EstimatorError> {
    if candidate_count < 2 {
        return Err(EstimatorError::TooFewCandidates(candidate_count));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(EstimatorError::InvalidThresholdEps(eps));
    }
    Ok(2.0 * (candidate_count as f64).ln() / ((1.0 - eps) / eps).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    candidates: VertexSet,
    alpha: f64,
    beta: f64,
    eps: f64,
    tau: f64,
}

impl EstimatorConfig {
    /// `eps` is the test error probability assumed by the threshold; it need
    /// not match the noise that actually generated the signals.
    pub fn new(candidates: VertexSet, alpha: f64, beta: f64, eps: f64) -> Result<Self, EstimatorError> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(EstimatorError::InvalidSpeeds { alpha, beta });
        }
        let tau = threshold(candidates.len(), eps)?;
        Ok(Self { candidates, alpha, beta, eps, tau })
    }

    pub fn candidates(&self) -> &VertexSet {
        &self.candidates
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// A stopping decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Halt {
    pub estimate: VertexId,
    pub stop_time: u64,
    /// No candidate halted before every far set emptied.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimatorState {
    /// Next round expected.
    pub t: u64,
    /// Scores in candidate order.
    pub scores: Vec<i64>,
    pub halted: Option<Halt>,
}

/// Streaming estimator over one graph and candidate set.
#[derive(Debug, Clone)]
pub struct Estimator<'g> {
    graph: &'g Graph,
    config: EstimatorConfig,
    balls: Vec<BallIndex>,
    /// Row-major candidate-by-candidate hop distances.
    cand_dist: Vec<u32>,
    diameter: usize,
    fallback_time: u64,
    state: EstimatorState,
}

impl<'g> Estimator<'g> {
    pub fn new(graph: &'g Graph, config: EstimatorConfig) -> Result<Self, EstimatorError> {
        let cands = config.candidates.as_slice();
        if let Some(&last) = cands.last() {
            graph.check_vertex(last)?;
        }
        let k = cands.len();
        let balls: Vec<BallIndex> = cands.iter().map(|&v| graph.ball_index(v)).collect();
        let mut cand_dist = vec![0u32; k * k];
        let mut diameter = 0;
        for (i, &v) in cands.iter().enumerate() {
            let dist = graph.distances_from(v);
            for (j, &u) in cands.iter().enumerate() {
                cand_dist[i * k + j] = dist[u] as u32;
                diameter = diameter.max(dist[u]);
            }
        }
        let fallback_time = (diameter as f64 / (config.alpha + config.beta)).ceil() as u64;
        Ok(Self {
            graph,
            balls,
            cand_dist,
            diameter,
            fallback_time,
            state: EstimatorState { t: 0, scores: vec![0; k], halted: None },
            config,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn state(&self) -> &EstimatorState {
        &self.state
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// `diam(U)`.
    pub fn candidate_diameter(&self) -> usize {
        self.diameter
    }

    /// `ceil(diam(U) / (α + β))`, the latest possible stopping time.
    pub fn fallback_time(&self) -> u64 {
        self.fallback_time
    }

    pub fn score_of(&self, v: VertexId) -> Option<i64> {
        let i = self.config.candidates.as_slice().binary_search(&v).ok()?;
        Some(self.state.scores[i])
    }

    /// Vertices any score reads at round `t`: the union of `N_v(α t)` over candidates.
    pub fn relevant_mask(&self, t: u64) -> Vec<bool> {
        let r = radius_floor(self.config.alpha * t as f64);
        let mut mask = vec![false; self.graph.vertex_count()];
        for ball in &self.balls {
            for &w in ball.members(r) {
                mask[w as usize] = true;
            }
        }
        mask
    }

    /// Adds round `t`'s signals over `N_v(α t)` to every candidate's score.
    pub fn update_scores(&mut self, round: &ObservationRound) -> Result<(), EstimatorError> {
        if let Some(h) = self.state.halted {
            return Err(EstimatorError::AlreadyHalted(h.stop_time));
        }
        if round.t() != self.state.t {
            return Err(EstimatorError::OutOfOrder { expected: self.state.t, got: round.t() });
        }
        if round.vertex_count() != self.graph.vertex_count() {
            return Err(EstimatorError::SizeMismatch {
                got: round.vertex_count(),
                expected: self.graph.vertex_count(),
            });
        }
        let r = radius_floor(self.config.alpha * round.t() as f64);
        let signals = round.signals();
        for (score, ball) in self.state.scores.iter_mut().zip(&self.balls) {
            *score += ball.members(r).iter().map(|&w| signals[w as usize] as i64).sum::<i64>();
        }
        self.state.t += 1;
        Ok(())
    }

    /// For each candidate index, `Z_v - max{Z_u : u ≠ v, dist(u, v) >= (α+β)t}`
    /// at the last consumed round `t`, or `None` when that far set is empty.
    pub fn margins(&self) -> Vec<Option<i64>> {
        let Some(t) = self.state.t.checked_sub(1) else {
            return vec![None; self.state.scores.len()];
        };
        let far = (self.config.alpha + self.config.beta) * t as f64;
        let k = self.state.scores.len();
        let scores = &self.state.scores;
        let mut by_score: Vec<usize> = (0..k).collect();
        by_score.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
        (0..k)
            .map(|i| {
                let row = &self.cand_dist[i * k..(i + 1) * k];
                by_score
                    .iter()
                    .find(|&&j| j != i && row[j] as f64 >= far)
                    .map(|&j| scores[i] - scores[j])
            })
            .collect()
    }

    /// Stopping decision after the last consumed round, if any. Ties among
    /// candidates halting together go to the largest margin, then the
    /// smallest id. Past the fallback time the smallest-id candidate is
    /// returned with `fallback` set.
    pub fn check_stopping(&self) -> Option<Halt> {
        if let Some(h) = self.state.halted {
            return Some(h);
        }
        let t = self.state.t.checked_sub(1)?;
        let best = self
            .margins()
            .into_iter()
            .enumerate()
            .filter_map(|(i, m)| m.filter(|&m| m as f64 >= self.config.tau).map(|m| (i, m)))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        let cands = self.config.candidates.as_slice();
        match best {
            Some((i, _)) => Some(Halt { estimate: cands[i], stop_time: t, fallback: false }),
            None if t >= self.fallback_time => {
                Some(Halt { estimate: cands[0], stop_time: self.fallback_time, fallback: true })
            }
            None => None,
        }
    }

    /// Consumes one round and records a decision if one is reached.
    pub fn step(&mut self, round: &ObservationRound) -> Result<Option<Halt>, EstimatorError> {
        self.update_scores(round)?;
        let halt = self.check_stopping();
        self.state.halted = halt;
        Ok(halt)
    }

    pub fn spread_estimate(&self, halt: &Halt) -> SpreadEstimate {
        spread_estimate(self.graph, halt.estimate, halt.stop_time, self.config.alpha, self.config.beta)
    }
}

/// `N_v̂((α + 2β) T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadEstimate {
    pub vertices: VertexSet,
    pub radius: usize,
    /// The ball reaches the truncation boundary (or the whole graph).
    pub boundary_contaminated: bool,
}

pub fn spread_estimate(g: &Graph, estimate: VertexId, stop_time: u64, alpha: f64, beta: f64) -> SpreadEstimate {
    let radius = radius_floor((alpha + 2.0 * beta) * stop_time as f64);
    let ball = g.ball_index(estimate);
    let vertices = ball.ball(radius);
    let boundary_contaminated = radius >= ball.eccentricity() || g.touches_boundary(&vertices);
    SpreadEstimate { vertices, radius, boundary_contaminated }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimationResult {
    pub stop_time: u64,
    pub estimate: VertexId,
    pub fallback: bool,
    pub spread: SpreadEstimate,
}

impl EstimationResult {
    fn from_halt(est: &Estimator<'_>, halt: Halt) -> Self {
        Self {
            stop_time: halt.stop_time,
            estimate: halt.estimate,
            fallback: halt.fallback,
            spread: est.spread_estimate(&halt),
        }
    }
}

/// An estimation run against a known cascade, with the ground-truth
/// comparisons used for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationRun {
    pub result: EstimationResult,
    pub source: VertexId,
    pub dist_error: usize,
    /// `|C(T)|`.
    pub infected_at_stop: usize,
    /// `C(T) ⊆ Ĉ(T)`.
    pub containment: bool,
    /// The spread estimate or the cascade itself reached the truncation
    /// boundary (or exhausted the graph).
    pub boundary_contaminated: bool,
    /// Observation log, filled only when requested.
    pub rounds: Vec<ObservationRound>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep every sampled round in [`EstimationRun::rounds`].
    pub record_rounds: bool,
    /// Only sample vertices some score reads.
    pub sparse_signals: bool,
}

/// Observes `traj` at `t = 0, 1, 2, ...` until the stopping rule fires.
pub fn run_estimation(
    g: &Graph,
    config: &EstimatorConfig,
    traj: &CascadeTrajectory,
    noise: NoiseParams,
    seed: u64,
    options: RunOptions,
) -> Result<EstimationRun, EstimatorError> {
    if traj.vertex_count() != g.vertex_count() {
        return Err(EstimatorError::SizeMismatch { got: traj.vertex_count(), expected: g.vertex_count() });
    }
    let mut stream = rng::stream(seed);
    run_with_stream(g, config, traj, noise, &mut stream, options)
}

pub fn run_with_stream<R: Rng + ?Sized>(
    g: &Graph,
    config: &EstimatorConfig,
    traj: &CascadeTrajectory,
    noise: NoiseParams,
    stream: &mut R,
    options: RunOptions,
) -> Result<EstimationRun, EstimatorError> {
    let mut est = Estimator::new(g, config.clone())?;
    let mut rounds = Vec::new();
    let halt = loop {
        let t = est.state().t;
        let snapshot = traj.affected_at(t as f64)?;
        let mask = options.sparse_signals.then(|| est.relevant_mask(t));
        let round = sample_round_masked(&snapshot, g.vertex_count(), t, noise, mask.as_deref(), stream);
        let halt = est.step(&round)?;
        if options.record_rounds {
            rounds.push(round);
        }
        if let Some(h) = halt {
            break h;
        }
    };
    let result = EstimationResult::from_halt(&est, halt);
    let infected = traj.affected_at(result.stop_time as f64)?;
    let containment = infected.is_subset(&result.spread.vertices);
    let boundary_contaminated = result.spread.boundary_contaminated || g.touches_boundary(&infected);
    Ok(EstimationRun {
        dist_error: g.distance(traj.source(), result.estimate),
        source: traj.source(),
        infected_at_stop: infected.len(),
        containment,
        boundary_contaminated,
        rounds,
        result,
    })
}

/// Runs the stopping rule over a recorded observation log.
pub fn replay_estimation<I>(g: &Graph, config: &EstimatorConfig, rounds: I) -> Result<EstimationResult, EstimatorError>
where
    I: IntoIterator<Item = ObservationRound>,
{
    let mut est = Estimator::new(g, config.clone())?;
    for round in rounds {
        if let Some(h) = est.step(&round)? {
            return Ok(EstimationResult::from_halt(&est, h));
        }
    }
    Err(EstimatorError::ReplayExhausted { rounds: est.state().t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, growth_f};

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        build_graph(&edges).unwrap()
    }

    #[test]
    fn threshold_values() {
        assert!((threshold(100, 0.1).unwrap() - 4.191_806_548_578_77).abs() < 1e-9);
        // (1 - eps) / eps = e^2 and |U| = e give exactly 1; use the continuous form.
        let eps = 1.0 / (1.0 + std::f64::consts::E.powi(2));
        let tau = 2.0 * 1.0 / ((1.0 - eps) / eps).ln();
        assert!((tau - 1.0).abs() < 1e-12);
        let base10 = 2.0 * 100f64.log10() / 9f64.log10();
        assert!((threshold(100, 0.1).unwrap() - base10).abs() < 1e-12);
        assert_eq!(threshold(1, 0.1).unwrap_err(), EstimatorError::TooFewCandidates(1));
        assert_eq!(threshold(10, 0.0).unwrap_err(), EstimatorError::InvalidThresholdEps(0.0));
        assert_eq!(threshold(10, 0.5).unwrap_err(), EstimatorError::InvalidThresholdEps(0.5));
    }

    #[test]
    fn threshold_monotone() {
        let mut prev = 0.0;
        for k in 2..200 {
            let t = threshold(k, 0.1).unwrap();
            assert!(t > prev);
            prev = t;
        }
        let mut prev = 0.0;
        for i in 1..50 {
            let t = threshold(50, i as f64 / 100.0).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn silent_round_leaves_scores() {
        let g = path(4);
        let cfg = EstimatorConfig::new(VertexSet::all(4), 1.0, 2.0, 0.1).unwrap();
        let mut est = Estimator::new(&g, cfg).unwrap();
        est.update_scores(&ObservationRound::silent(0, 4)).unwrap();
        assert!(est.state().scores.iter().all(|&z| z == 0));
    }

    #[test]
    fn hand_enumerated_scores() {
        let g = path(3);
        let cfg = EstimatorConfig::new(VertexSet::all(3), 1.0, 2.0, 0.1).unwrap();
        let mut est = Estimator::new(&g, cfg).unwrap();
        // Round 0 reads only the vertex itself.
        est.update_scores(&ObservationRound::new(0, vec![1, 0, -1]).unwrap()).unwrap();
        assert_eq!(est.state().scores, vec![1, 0, -1]);
        est.update_scores(&ObservationRound::new(1, vec![1, 1, -1]).unwrap()).unwrap();
        assert_eq!(est.state().scores, vec![1 + 2, 1, -1]);
        assert_eq!(est.score_of(0), Some(3));
        assert_eq!(est.score_of(7), None);
    }

    #[test]
    fn out_of_order_round_rejected() {
        let g = path(3);
        let cfg = EstimatorConfig::new(VertexSet::all(3), 1.0, 2.0, 0.1).unwrap();
        let mut est = Estimator::new(&g, cfg).unwrap();
        assert_eq!(
            est.update_scores(&ObservationRound::silent(1, 3)).unwrap_err(),
            EstimatorError::OutOfOrder { expected: 0, got: 1 }
        );
        assert!(matches!(
            est.update_scores(&ObservationRound::silent(0, 4)).unwrap_err(),
            EstimatorError::SizeMismatch { .. }
        ));
    }

    #[test]
    fn no_halt_at_time_zero_with_large_threshold() {
        let g = path(20);
        let cfg = EstimatorConfig::new(VertexSet::all(20), 1.0, 2.0, 0.1).unwrap();
        assert!(cfg.tau() > 2.0);
        let mut est = Estimator::new(&g, cfg).unwrap();
        let mut sig = vec![-1i8; 20];
        sig[3] = 1;
        assert_eq!(est.step(&ObservationRound::new(0, sig).unwrap()).unwrap(), None);
        // At t = 0 every other candidate is far.
        assert!(est.margins().iter().all(|m| m.is_some()));
    }

    #[test]
    fn fallback_on_silence() {
        // Two candidates 10 hops apart, alpha + beta = 3: fallback at ceil(10/3) = 4.
        let g = path(11);
        let cfg = EstimatorConfig::new(VertexSet::from_unsorted([0, 10]), 1.0, 2.0, 0.1).unwrap();
        let mut est = Estimator::new(&g, cfg).unwrap();
        assert_eq!(est.candidate_diameter(), 10);
        assert_eq!(est.fallback_time(), 4);
        for t in 0..4 {
            assert_eq!(est.step(&ObservationRound::silent(t, 11)).unwrap(), None);
        }
        let h = est.step(&ObservationRound::silent(4, 11)).unwrap().unwrap();
        assert_eq!(h, Halt { estimate: 0, stop_time: 4, fallback: true });
        assert!(est.margins().iter().all(|m| m.is_none()));
        assert_eq!(
            est.step(&ObservationRound::silent(5, 11)).unwrap_err(),
            EstimatorError::AlreadyHalted(4)
        );
    }

    #[test]
    fn two_candidates_deterministic_signals() {
        // Source 0, other candidate 10; perfect tests with the cascade equal
        // to N_0(t). eps = 0.01 for the threshold gives tau = 2 ln 2 / ln 99 < 1.
        let g = path(11);
        let cfg = EstimatorConfig::new(VertexSet::from_unsorted([0, 10]), 1.0, 2.0, 0.01).unwrap();
        assert!(cfg.tau() < 1.0);
        let mut est = Estimator::new(&g, cfg).unwrap();
        let round = |t: u64| {
            let sig = (0..11).map(|v| if v as u64 <= t { 1 } else { -1 }).collect();
            ObservationRound::new(t, sig).unwrap()
        };
        // Z_0(0) = 1, Z_10(0) = -1: margin 2 >= tau at t = 0.
        let h = est.step(&round(0)).unwrap().unwrap();
        assert_eq!(h, Halt { estimate: 0, stop_time: 0, fallback: false });
        assert_eq!(est.spread_estimate(&h).vertices.as_slice(), &[0]);
    }

    #[test]
    fn far_sets_follow_round_time() {
        // Path of 7, candidates 0, 3, 6, alpha + beta = 3.
        let g = path(7);
        let cfg = EstimatorConfig::new(VertexSet::from_unsorted([0, 3, 6]), 1.0, 2.0, 0.4).unwrap();
        // tau = 2 ln 3 / ln 1.5 ~ 5.42
        let mut est = Estimator::new(&g, cfg).unwrap();
        assert_eq!(est.fallback_time(), 2);
        // After round 1 the far radius is 3: every pair qualifies.
        est.state.t = 2;
        est.state.scores = vec![10, 10, 0];
        assert_eq!(est.margins(), vec![Some(0), Some(0), Some(-10)]);
        assert_eq!(est.check_stopping(), None);
        // After round 2 the far radius is 6: only (0, 6).
        est.state.t = 3;
        est.state.scores = vec![20, 99, 13];
        assert_eq!(est.margins(), vec![Some(7), None, Some(-7)]);
        assert_eq!(est.check_stopping(), Some(Halt { estimate: 0, stop_time: 2, fallback: false }));
        est.state.scores = vec![13, 0, 20];
        assert_eq!(est.check_stopping(), Some(Halt { estimate: 6, stop_time: 2, fallback: false }));
    }

    #[test]
    fn tie_break_prefers_margin_then_id() {
        // Candidates {0, 1} and {8, 9} at the two ends of a path of 10; after
        // round 1 (far radius 3) each pair's far set is the opposite end.
        let g = path(10);
        let cfg = EstimatorConfig::new(VertexSet::from_unsorted([0, 1, 8, 9]), 1.0, 2.0, 0.3).unwrap();
        // tau = 2 ln 4 / ln(7/3) ~ 3.27
        let mut est = Estimator::new(&g, cfg).unwrap();
        est.state.t = 2;
        est.state.scores = vec![10, 10, 0, 0];
        assert_eq!(est.check_stopping(), Some(Halt { estimate: 0, stop_time: 1, fallback: false }));
        est.state.scores = vec![10, 12, 0, 1];
        assert_eq!(est.check_stopping(), Some(Halt { estimate: 1, stop_time: 1, fallback: false }));
        est.state.scores = vec![0, 1, 10, 10];
        assert_eq!(est.check_stopping(), Some(Halt { estimate: 8, stop_time: 1, fallback: false }));
    }

    #[test]
    fn score_bound_holds() {
        let g = path(15);
        let cfg = EstimatorConfig::new(VertexSet::all(15), 0.7, 2.0, 0.1).unwrap();
        let mut est = Estimator::new(&g, cfg).unwrap();
        for t in 0..4 {
            est.update_scores(&ObservationRound::new(t, vec![1; 15]).unwrap()).unwrap();
            for v in 0..15 {
                let bound = growth_f(&g, v, 0.7, t) as i64;
                assert_eq!(est.score_of(v).unwrap(), bound);
            }
        }
    }

    #[test]
    fn spread_estimate_radius() {
        let g = path(40);
        let s = spread_estimate(&g, 20, 0, 1.0, 2.0);
        assert_eq!(s.vertices.as_slice(), &[20]);
        assert!(!s.boundary_contaminated);
        let s = spread_estimate(&g, 20, 3, 1.0, 2.0);
        assert_eq!(s.radius, 15);
        assert_eq!(s.vertices, g.neighborhood(20, 15.0).unwrap());
        assert!(!s.boundary_contaminated);
        let s = spread_estimate(&g, 20, 5, 1.0, 2.0);
        assert_eq!(s.vertices.len(), 40);
        assert!(s.boundary_contaminated);
    }

    #[test]
    fn replay_exhaustion() {
        let g = path(11);
        let cfg = EstimatorConfig::new(VertexSet::from_unsorted([0, 10]), 1.0, 2.0, 0.1).unwrap();
        let rounds = (0..2).map(|t| ObservationRound::silent(t, 11));
        assert_eq!(
            replay_estimation(&g, &cfg, rounds).unwrap_err(),
            EstimatorError::ReplayExhausted { rounds: 2 }
        );
    }
}
