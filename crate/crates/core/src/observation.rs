//! Noisy diagnostic tests.
//!
//! At each integer time every vertex is tested with probability `p`; a test
//! reports the true status with probability `1 - eps` and the opposite
//! status otherwise. Untested vertices read 0.

use rand::Rng;
use thiserror::Error;

use crate::graph::VertexSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservationError {
    #[error("test probability p must lie in [0, 1] (got {0})")]
    InvalidTestProbability(f64),
    #[error("test error probability eps must lie in [0, 1/2) (got {0})")]
    InvalidErrorProbability(f64),
    #[error("signal {0} is outside {{-1, 0, +1}}")]
    InvalidSignal(i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    p: f64,
    eps: f64,
}

impl NoiseParams {
    pub fn new(p: f64, eps: f64) -> Result<Self, ObservationError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ObservationError::InvalidTestProbability(p));
        }
        if !(0.0..0.5).contains(&eps) {
            return Err(ObservationError::InvalidErrorProbability(eps));
        }
        Ok(Self { p, eps })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `E[Y_v(t)]` for an affected vertex; the unaffected mean is its negative.
    pub fn signal_mean(&self) -> f64 {
        self.p * (1.0 - 2.0 * self.eps)
    }
}

/// Probabilities of reading 0, -1 and +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pmf {
    pub zero: f64,
    pub minus: f64,
    pub plus: f64,
}

pub fn pmf(affected: bool, params: NoiseParams) -> Pmf {
    let NoiseParams { p, eps } = params;
    let (right, wrong) = (p * (1.0 - eps), p * eps);
    if affected {
        Pmf { zero: 1.0 - p, minus: wrong, plus: right }
    } else {
        Pmf { zero: 1.0 - p, minus: right, plus: wrong }
    }
}

/// Signals `Y_v(t)` for one integer time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationRound {
    t: u64,
    signals: Vec<i8>,
}

impl ObservationRound {
    pub fn new(t: u64, signals: Vec<i8>) -> Result<Self, ObservationError> {
        if let Some(&bad) = signals.iter().find(|s| !(-1..=1).contains(*s)) {
            return Err(ObservationError::InvalidSignal(bad as i64));
        }
        Ok(Self { t, signals })
    }

    pub fn silent(t: u64, vertex_count: usize) -> Self {
        Self { t, signals: vec![0; vertex_count] }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn signals(&self) -> &[i8] {
        &self.signals
    }

    pub fn signal(&self, v: usize) -> i8 {
        self.signals[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.signals.len()
    }

    pub fn tested_count(&self) -> usize {
        self.signals.iter().filter(|&&s| s != 0).count()
    }
}

fn draw(u: f64, affected: bool, params: NoiseParams) -> i8 {
    let m = pmf(affected, params);
    if u < m.zero {
        0
    } else if u < m.zero + m.minus {
        -1
    } else {
        1
    }
}

/// Samples every vertex independently from `Q+` (in `affected`) or `Q-`.
/// Consumes exactly one uniform per vertex, in id order.
pub fn sample_round<R: Rng + ?Sized>(
    affected: &VertexSet,
    vertex_count: usize,
    t: u64,
    params: NoiseParams,
    rng: &mut R,
) -> ObservationRound {
    sample_round_masked(affected, vertex_count, t, params, None, rng)
}

/// As [`sample_round`], but vertices with `mask[v] == false` are left at 0
/// and consume no randomness.
pub fn sample_round_masked<R: Rng + ?Sized>(
    affected: &VertexSet,
    vertex_count: usize,
    t: u64,
    params: NoiseParams,
    mask: Option<&[bool]>,
    rng: &mut R,
) -> ObservationRound {
    let mut signals = vec![0i8; vertex_count];
    let mut members = affected.iter().peekable();
    for (v, slot) in signals.iter_mut().enumerate() {
        let is_affected = members.next_if_eq(&v).is_some();
        if mask.is_some_and(|m| !m[v]) {
            continue;
        }
        let u = rng.random::<f64>();
        *slot = draw(u, is_affected, params);
    }
    ObservationRound { t, signals }
}
