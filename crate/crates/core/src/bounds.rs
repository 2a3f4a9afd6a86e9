//! Monte-Carlo checks of the containment and exponential-tail bounds, and
//! empirical diagnostics for the estimator's performance guarantees.
//!
//! Every analytic bound is a closed-form function; the empirical side is a
//! violation frequency with its binomial standard error. A report passes
//! when `empirical <= analytic + 3 * se`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cascade::{scan_containment, simulate_fpp, CascadeError, ContainmentScan, RateParams};
use crate::estimator::EstimationRun;
use crate::graph::{growth_f_inverse, lemma11_ratio, Graph, VertexId};
use crate::rng::{self, derive_seed, label};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("exponential tail bound needs 0 < eps < 1/mu (got eps={eps}, mu={mu})")]
    EpsOutOfRange { eps: f64, mu: f64 },
    #[error("rate list must have length 1 or m={m} (got {len})")]
    RateListLength { m: usize, len: usize },
    #[error("rates must be positive and finite")]
    InvalidRate,
    #[error("need at least one trial and m >= 1")]
    Empty,
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bound_name: String,
    pub params: String,
    pub analytic: f64,
    pub empirical: f64,
    pub trials: u64,
    pub se: f64,
    pub pass: bool,
    /// The grid point is in the regime where a failure counts: bound below
    /// 0.5, standard error below a third of the bound, and no trial touched a
    /// truncation boundary.
    pub assertable: bool,
}

impl BoundReport {
    pub fn new(bound_name: &str, params: String, analytic: f64, violations: u64, trials: u64) -> Self {
        assert!(trials > 0, "bound report needs at least one trial");
        let empirical = violations as f64 / trials as f64;
        let se = (empirical * (1.0 - empirical) / trials as f64).sqrt();
        Self {
            bound_name: bound_name.to_string(),
            params,
            analytic,
            empirical,
            trials,
            se,
            pass: empirical <= analytic + 3.0 * se,
            assertable: analytic < 0.5 && se < analytic / 3.0,
        }
    }
}

/// `P(E1k^c) <= (12 / λ_min) exp(-k λ_min / 12)`.
pub fn inner_containment_bound(rate_min: f64, k: u64) -> f64 {
    12.0 / rate_min * (-(k as f64) * rate_min / 12.0).exp()
}

/// `P(E2k^c) <= 900 (2.9 / 3)^(3 Δ λ_max k)`.
pub fn outer_containment_bound(max_degree: usize, rate_max: f64, k: u64) -> f64 {
    900.0 * (2.9f64 / 3.0).powf(3.0 * max_degree as f64 * rate_max * k as f64)
}

/// `P(Σ X_i <= eps m) <= sqrt(m) (2.8 eps mu)^m`.
pub fn exp_sum_tail_bound(m: usize, mu: f64, eps: f64) -> f64 {
    (m as f64).sqrt() * (2.8 * eps * mu).powi(m as i32)
}

#[derive(Debug, Clone, Copy)]
struct ContainmentTrial {
    scan: ContainmentScan,
    /// First time the cascade touches the truncation boundary; `None` on
    /// graphs that are not truncations.
    contact: Option<f64>,
}

fn containment_trials(
    g: &Graph,
    params: RateParams,
    k_max: u64,
    trials: u64,
    seed: u64,
) -> Result<Vec<ContainmentTrial>, CascadeError> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial_seed = derive_seed(seed, i);
            let source = rng::stream(derive_seed(trial_seed, label::SOURCE)).random_range(0..g.vertex_count());
            let traj = simulate_fpp(g, source, derive_seed(trial_seed, label::CASCADE))?;
            let (horizon, contact) = match g.boundary() {
                Some(b) => {
                    let contact = b.iter().map(|v| traj.infection_time(v)).fold(f64::INFINITY, f64::min);
                    ((3.0 * contact).ceil() as u64, Some(contact))
                }
                None => {
                    // Past both saturation and N(αt) = V every inclusion is fixed.
                    let ecc = g.eccentricity(source) as f64;
                    let sat = traj.last_infection();
                    ((3.0 * sat).ceil().max((ecc / params.alpha).ceil()) as u64, None)
                }
            };
            let scan = scan_containment(&traj, g, params, horizon.max(k_max))?;
            Ok(ContainmentTrial { scan, contact })
        })
        .collect()
}

fn tally(
    g: &Graph,
    name: &str,
    params: RateParams,
    k_grid: &[u64],
    results: &[ContainmentTrial],
    holds: impl Fn(&ContainmentScan, u64) -> bool,
    bound: impl Fn(u64) -> f64,
) -> Vec<BoundReport> {
    k_grid
        .iter()
        .map(|&k| {
            let violations = results.iter().filter(|r| !holds(&r.scan, k)).count() as u64;
            let contaminated = results.iter().filter(|r| r.contact.is_some_and(|c| k as f64 >= c)).count();
            let p = format!(
                "k={k};n={};alpha={:.6};beta={:.6};contaminated={contaminated}",
                g.vertex_count(),
                params.alpha,
                params.beta
            );
            let mut report = BoundReport::new(name, p, bound(k), violations, results.len() as u64);
            report.assertable &= contaminated == 0;
            report
        })
        .collect()
}

/// Both containment checks from one set of simulated cascades: reports for
/// the inner event `N(αt) ⊆ C(t)` and the outer event `C(t) ⊆ N(βt)` at each
/// `k` in the grid.
pub fn verify_containment(
    g: &Graph,
    params: RateParams,
    k_grid: &[u64],
    trials: u64,
    seed: u64,
) -> Result<(Vec<BoundReport>, Vec<BoundReport>), BoundsError> {
    if trials == 0 {
        return Err(BoundsError::Empty);
    }
    let k_max = k_grid.iter().copied().max().unwrap_or(0);
    let results = containment_trials(g, params, k_max, trials, seed)?;
    let inner = tally(g, "E1k", params, k_grid, &results, ContainmentScan::inner_holds_from, |k| {
        inner_containment_bound(g.rate_min(), k)
    });
    let outer = tally(g, "E2k", params, k_grid, &results, ContainmentScan::outer_holds_from, |k| {
        outer_containment_bound(g.max_degree(), g.rate_max(), k)
    });
    Ok((inner, outer))
}

pub fn verify_e1k(
    g: &Graph,
    params: RateParams,
    k_grid: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Vec<BoundReport>, BoundsError> {
    Ok(verify_containment(g, params, k_grid, trials, seed)?.0)
}

pub fn verify_e2k(
    g: &Graph,
    params: RateParams,
    k_grid: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Vec<BoundReport>, BoundsError> {
    Ok(verify_containment(g, params, k_grid, trials, seed)?.1)
}

const TAIL_CHUNK: u64 = 1 << 16;

/// Empirical `P(Σ X_i <= eps m)` for independent `X_i ~ Exp(mu_i)`.
/// `mu_list` holds either one rate shared by all `m` terms or `m` rates.
pub fn verify_exp_sum_tail(
    m: usize,
    mu_list: &[f64],
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<BoundReport, BoundsError> {
    if m == 0 || trials == 0 {
        return Err(BoundsError::Empty);
    }
    if mu_list.len() != 1 && mu_list.len() != m {
        return Err(BoundsError::RateListLength { m, len: mu_list.len() });
    }
    if mu_list.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(BoundsError::InvalidRate);
    }
    let rates: Vec<f64> = if mu_list.len() == 1 { vec![mu_list[0]; m] } else { mu_list.to_vec() };
    let mu = rates.iter().copied().fold(0.0, f64::max);
    if !(eps > 0.0 && eps < 1.0 / mu) {
        return Err(BoundsError::EpsOutOfRange { eps, mu });
    }
    let cutoff = eps * m as f64;
    let chunks = trials.div_ceil(TAIL_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = rng::stream(derive_seed(seed, c));
            let len = TAIL_CHUNK.min(trials - c * TAIL_CHUNK);
            (0..len)
                .filter(|_| rates.iter().map(|&r| rng::sample_exp(&mut stream, r)).sum::<f64>() <= cutoff)
                .count() as u64
        })
        .sum();
    let params = format!("m={m};mu={mu};eps={eps}");
    Ok(BoundReport::new("exp_sum_tail", params, exp_sum_tail_bound(m, mu, eps), hits, trials))
}

/// Shared parameters for the performance diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Setup {
    pub p: f64,
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub candidate_count: usize,
    /// Exponent for the `|Ĉ| <= log^c |U|` size check.
    pub size_exponent: Option<f64>,
}

impl Theorem1Setup {
    /// `15 log|U| / (p (1 - 2ε)^2)`.
    pub fn budget(&self) -> f64 {
        15.0 * (self.candidate_count as f64).ln() / (self.p * (1.0 - 2.0 * self.eps).powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theorem1Trial {
    /// `F_{v*}^α(budget)`.
    pub time_bound: u64,
    pub stop_within_bound: bool,
    pub dist_within_bound: bool,
    pub contained: bool,
    pub size_within_bound: Option<bool>,
}

pub fn theorem1_trial(g: &Graph, run: &EstimationRun, setup: &Theorem1Setup) -> Theorem1Trial {
    let z = setup.budget().max(1.0);
    let time_bound = growth_f_inverse(g, run.source, setup.alpha, z).unwrap_or(0);
    let log_u = (setup.candidate_count as f64).ln();
    Theorem1Trial {
        time_bound,
        stop_within_bound: run.result.stop_time <= time_bound,
        dist_within_bound: run.dist_error as f64 <= (setup.alpha + setup.beta) * time_bound as f64,
        contained: run.containment,
        size_within_bound: setup.size_exponent.map(|c| run.result.spread.vertices.len() as f64 <= log_u.powf(c)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub trials: usize,
    pub budget: f64,
    pub stop_fraction: f64,
    pub dist_fraction: f64,
    pub containment_fraction: f64,
    pub containment_se: f64,
    pub size_fraction: Option<f64>,
}

pub fn aggregate_theorem1(setup: &Theorem1Setup, trials: &[Theorem1Trial]) -> Theorem1Report {
    let n = trials.len().max(1) as f64;
    let frac = |f: &dyn Fn(&Theorem1Trial) -> bool| trials.iter().filter(|t| f(t)).count() as f64 / n;
    let containment_fraction = frac(&|t| t.contained);
    Theorem1Report {
        trials: trials.len(),
        budget: setup.budget(),
        stop_fraction: frac(&|t| t.stop_within_bound),
        dist_fraction: frac(&|t| t.dist_within_bound),
        containment_fraction,
        containment_se: (containment_fraction * (1.0 - containment_fraction) / n).sqrt(),
        size_fraction: setup.size_exponent.map(|_| frac(&|t| t.size_within_bound == Some(true))),
    }
}

/// Diagnostics for runs that share one graph.
pub fn theorem1_diagnostics(runs: &[EstimationRun], g: &Graph, setup: &Theorem1Setup) -> Theorem1Report {
    let trials: Vec<_> = runs.iter().map(|r| theorem1_trial(g, r, setup)).collect();
    aggregate_theorem1(setup, &trials)
}

/// `(z, α F_v^α(z) / F_v(α z))` for each `z`; the ratio tends to 1.
pub fn lemma11_table(g: &Graph, v: VertexId, alpha: f64, zs: &[f64]) -> Vec<(f64, Option<f64>)> {
    let ball = g.ball_index(v);
    zs.iter().map(|&z| (z, lemma11_ratio(&ball, alpha, z))).collect()
}

/// CSV with header `bound_name,params,analytic,empirical,trials,se,pass`.
pub fn write_bound_reports<W: Write>(out: W, reports: &[BoundReport]) -> Result<(), BoundsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bound_name", "params", "analytic", "empirical", "trials", "se", "pass"])?;
    for r in reports {
        w.write_record([
            r.bound_name.clone(),
            r.params.clone(),
            format!("{:e}", r.analytic),
            format!("{:e}", r.empirical),
            r.trials.to_string(),
            format!("{:e}", r.se),
            r.pass.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
