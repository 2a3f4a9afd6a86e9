//! Heterogeneous SI cascades.
//!
//! Two engines produce the same law for the infection times:
//!
//! * [`simulate_fpp`] draws one exponential weight per edge and runs
//!   Dijkstra from the source (first passage percolation);
//! * [`simulate_markovian`] runs the continuous-time exponential race, where
//!   a susceptible vertex is infected at the summed rate of its edges to
//!   infected neighbors.
//!
//! The FPP engine is the default: it produces the whole trajectory in one
//! pass and needs no horizon.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use thiserror::Error;

use crate::graph::{radius_floor, Graph, GraphError, VertexId, VertexSet};
use crate::rng::{self, exp_from_uniform};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CascadeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("maximum degree {0} is below 2; default rates need log(Δ) > 0")]
    DegreeTooSmall(usize),
    #[error("invalid horizon {0}")]
    InvalidHorizon(f64),
    #[error("invalid time {0}")]
    InvalidTime(f64),
    #[error("time {t} lies beyond the simulated horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("invalid containment parameters alpha={alpha}, beta={beta}")]
    InvalidRates { alpha: f64, beta: f64 },
    #[error("trajectory has {got} vertices but the graph has {expected}")]
    SizeMismatch { got: usize, expected: usize },
}

/// Containment speeds: the cascade eventually sandwiches between the balls
/// of radius `alpha * t` and `beta * t` around the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub alpha: f64,
    pub beta: f64,
}

impl RateParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, CascadeError> {
        if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
            Ok(Self { alpha, beta })
        } else {
            Err(CascadeError::InvalidRates { alpha, beta })
        }
    }
}

/// `(λ_min / (12 ln Δ), 3 Δ λ_max)`.
pub fn default_alpha_beta(g: &Graph) -> Result<RateParams, CascadeError> {
    let delta = g.max_degree();
    if delta < 2 {
        return Err(CascadeError::DegreeTooSmall(delta));
    }
    let d = delta as f64;
    Ok(RateParams { alpha: g.rate_min() / (12.0 * d.ln()), beta: 3.0 * d * g.rate_max() })
}

/// Per-vertex infection times of one cascade.
///
/// Vertices not infected within `horizon` carry `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrajectory {
    source: VertexId,
    infection_time: Vec<f64>,
    horizon: f64,
}

impl CascadeTrajectory {
    /// Validates the basic shape: the source at time 0, every other time
    /// positive (or infinite past the horizon), nothing finite beyond the horizon.
    pub fn new(source: VertexId, infection_time: Vec<f64>, horizon: f64) -> Result<Self, CascadeError> {
        if horizon.is_nan() || horizon < 0.0 {
            return Err(CascadeError::InvalidHorizon(horizon));
        }
        let count = infection_time.len();
        if source >= count {
            return Err(GraphError::VertexOutOfRange { vertex: source, count }.into());
        }
        for (v, &t) in infection_time.iter().enumerate() {
            let ok = if v == source {
                t == 0.0
            } else {
                t > 0.0 && (t <= horizon || t == f64::INFINITY)
            };
            if !ok {
                return Err(CascadeError::InvalidTime(t));
            }
        }
        Ok(Self { source, infection_time, horizon })
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn vertex_count(&self) -> usize {
        self.infection_time.len()
    }

    pub fn infection_time(&self, v: VertexId) -> f64 {
        self.infection_time[v]
    }

    pub fn times(&self) -> &[f64] {
        &self.infection_time
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn check_time(&self, t: f64) -> Result<(), CascadeError> {
        if t.is_nan() || t < 0.0 {
            Err(CascadeError::InvalidTime(t))
        } else if t > self.horizon {
            Err(CascadeError::BeyondHorizon { t, horizon: self.horizon })
        } else {
            Ok(())
        }
    }

    /// `C(t) = {v : infection_time[v] <= t}`.
    pub fn affected_at(&self, t: f64) -> Result<VertexSet, CascadeError> {
        self.check_time(t)?;
        Ok(VertexSet::from_unsorted(
            self.infection_time.iter().enumerate().filter(|(_, &x)| x <= t).map(|(v, _)| v),
        ))
    }

    pub fn count_affected_at(&self, t: f64) -> Result<usize, CascadeError> {
        self.check_time(t)?;
        Ok(self.infection_time.iter().filter(|&&x| x <= t).count())
    }

    /// Largest finite infection time.
    pub fn last_infection(&self) -> f64 {
        self.infection_time.iter().copied().filter(|t| t.is_finite()).fold(0.0, f64::max)
    }

    /// Every vertex with a finite positive infection time has a neighbor
    /// infected strictly earlier.
    pub fn is_causal(&self, g: &Graph) -> bool {
        (0..self.vertex_count()).all(|v| {
            let t = self.infection_time[v];
            v == self.source || !t.is_finite() || g.neighbors(v).any(|(u, _)| self.infection_time[u] < t)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Tentative(f64, VertexId);

impl Eq for Tentative {}

impl Ord for Tentative {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Tentative {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First passage percolation with one `Exp(λ_e)` weight per edge, drawn by
/// inverse CDF in edge-index order from the stream seeded by `seed`.
pub fn simulate_fpp(g: &Graph, source: VertexId, seed: u64) -> Result<CascadeTrajectory, CascadeError> {
    let mut stream = rng::stream(seed);
    let uniforms: Vec<f64> = (0..g.edge_count()).map(|_| stream.random::<f64>()).collect();
    fpp_from_uniforms(g, source, &uniforms)
}

/// FPP with edge weights `-ln(1 - u_e) / λ_e` for caller-supplied uniforms.
/// Raising any rate with the same uniforms never delays any infection.
pub fn fpp_from_uniforms(g: &Graph, source: VertexId, uniforms: &[f64]) -> Result<CascadeTrajectory, CascadeError> {
    g.check_vertex(source)?;
    assert_eq!(uniforms.len(), g.edge_count(), "one uniform per edge");
    let weights: Vec<f64> =
        g.edges().iter().zip(uniforms).map(|(e, &u)| exp_from_uniform(u, e.rate)).collect();
    let mut time = vec![f64::INFINITY; g.vertex_count()];
    let mut done = vec![false; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    time[source] = 0.0;
    heap.push(Tentative(0.0, source));
    while let Some(Tentative(t, v)) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for (u, e) in g.incident_edges(v) {
            let cand = t + weights[e];
            if cand < time[u] {
                time[u] = cand;
                heap.push(Tentative(cand, u));
            }
        }
    }
    // Zero-weight edges (u = 0 exactly) would tie the source; nudge to keep
    // infection times of non-sources positive.
    for (v, t) in time.iter_mut().enumerate() {
        if v != source && *t == 0.0 {
            *t = f64::MIN_POSITIVE;
        }
    }
    CascadeTrajectory::new(source, time, f64::INFINITY)
}

struct Race {
    time: Vec<f64>,
    // Summed rate from infected neighbors, for susceptible vertices.
    pressure: Vec<f64>,
    frontier: Vec<VertexId>,
    slot: Vec<usize>,
}

impl Race {
    fn new(n: usize) -> Self {
        Self { time: vec![f64::INFINITY; n], pressure: vec![0.0; n], frontier: Vec::new(), slot: vec![usize::MAX; n] }
    }

    fn infect(&mut self, g: &Graph, v: VertexId, t: f64) {
        self.time[v] = t;
        if self.slot[v] != usize::MAX {
            let i = self.slot[v];
            self.frontier.swap_remove(i);
            if i < self.frontier.len() {
                self.slot[self.frontier[i]] = i;
            }
            self.slot[v] = usize::MAX;
        }
        for (u, rate) in g.neighbors(v) {
            if self.time[u].is_infinite() {
                self.pressure[u] += rate;
                if self.slot[u] == usize::MAX {
                    self.slot[u] = self.frontier.len();
                    self.frontier.push(u);
                }
            }
        }
    }
}

/// Event-driven exponential race up to `t_max` (may be infinite).
pub fn simulate_markovian(
    g: &Graph,
    source: VertexId,
    t_max: f64,
    seed: u64,
) -> Result<CascadeTrajectory, CascadeError> {
    g.check_vertex(source)?;
    if t_max.is_nan() || t_max < 0.0 {
        return Err(CascadeError::InvalidHorizon(t_max));
    }
    let mut stream = rng::stream(seed);
    let mut race = Race::new(g.vertex_count());
    race.infect(g, source, 0.0);

    let mut now = 0.0;
    while !race.frontier.is_empty() {
        // Recomputed each event to avoid drift in a running total.
        let total: f64 = race.frontier.iter().map(|&v| race.pressure[v]).sum();
        now += rng::sample_exp(&mut stream, total);
        if now > t_max {
            break;
        }
        let mut pick = stream.random::<f64>() * total;
        let mut chosen = *race.frontier.last().unwrap();
        for &v in &race.frontier {
            if pick < race.pressure[v] {
                chosen = v;
                break;
            }
            pick -= race.pressure[v];
        }
        race.infect(g, chosen, now);
    }
    let time = race.time;
    CascadeTrajectory::new(source, time, t_max)
}

/// Latest integer times at which each half of the containment sandwich
/// `N(αt) ⊆ C(t) ⊆ N(βt)` fails, scanning `t = 0..=t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContainmentScan {
    pub last_inner_violation: Option<u64>,
    pub last_outer_violation: Option<u64>,
}

impl ContainmentScan {
    /// Whether both inclusions hold at every integer `t` in `[k, t_max]`.
    pub fn holds_from(&self, k: u64) -> bool {
        self.inner_holds_from(k) && self.outer_holds_from(k)
    }

    pub fn inner_holds_from(&self, k: u64) -> bool {
        self.last_inner_violation.is_none_or(|t| t < k)
    }

    pub fn outer_holds_from(&self, k: u64) -> bool {
        self.last_outer_violation.is_none_or(|t| t < k)
    }
}

pub fn scan_containment(
    traj: &CascadeTrajectory,
    g: &Graph,
    params: RateParams,
    t_max: u64,
) -> Result<ContainmentScan, CascadeError> {
    if traj.vertex_count() != g.vertex_count() {
        return Err(CascadeError::SizeMismatch { got: traj.vertex_count(), expected: g.vertex_count() });
    }
    traj.check_time(t_max as f64)?;
    let dist = g.distances_from(traj.source());
    let mut scan = ContainmentScan::default();
    for t in 0..=t_max {
        let tf = t as f64;
        let inner_r = radius_floor(params.alpha * tf);
        let outer_r = radius_floor(params.beta * tf);
        let mut inner_ok = true;
        let mut outer_ok = true;
        for (&d, &x) in dist.iter().zip(traj.times()) {
            let infected = x <= tf;
            inner_ok &= d > inner_r || infected;
            outer_ok &= !infected || d <= outer_r;
        }
        if !inner_ok {
            scan.last_inner_violation = Some(t);
        }
        if !outer_ok {
            scan.last_outer_violation = Some(t);
        }
    }
    Ok(scan)
}

/// True iff `N(αt) ⊆ C(t) ⊆ N(βt)` at every integer `t` in `[k, t_max]`.
pub fn check_containment(
    traj: &CascadeTrajectory,
    g: &Graph,
    params: RateParams,
    k: u64,
    t_max: u64,
) -> Result<bool, CascadeError> {
    Ok(scan_containment(traj, g, params, t_max)?.holds_from(k))
}
