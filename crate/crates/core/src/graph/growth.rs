//! Neighborhood growth functions `f_v^α(t) = Σ_{s=0}^{t} |N_v(α s)|`, their
//! generalized inverse, and the polynomial-equivalence check on ball sizes.

use super::{radius_floor, BallIndex, Graph, GraphError, VertexId};

/// `Σ_{s=0}^{t} |N_v(α s)|` with real radii floored to hop counts.
pub fn growth_f(g: &Graph, v: VertexId, alpha: f64, t: u64) -> u64 {
    growth_f_from(&g.ball_index(v), alpha, t)
}

pub fn growth_f_from(ball: &BallIndex, alpha: f64, t: u64) -> u64 {
    (0..=t).map(|s| ball.size(radius_floor(alpha * s as f64)) as u64).sum()
}

/// `min { t >= 0 : f_v^α(t) >= z }`.
///
/// `f` is integer valued and strictly increasing but skips values, so the
/// inverse rounds up to the first step that reaches `z`.
pub fn growth_f_inverse(g: &Graph, v: VertexId, alpha: f64, z: f64) -> Result<u64, GraphError> {
    growth_f_inverse_from(&g.ball_index(v), alpha, z)
}

pub fn growth_f_inverse_from(ball: &BallIndex, alpha: f64, z: f64) -> Result<u64, GraphError> {
    if z.is_nan() || z < 1.0 || z.is_infinite() {
        return Err(GraphError::InverseBelowOne(z));
    }
    let mut t = 0u64;
    let mut f = 1u64;
    while (f as f64) < z {
        t += 1;
        f += ball.size(radius_floor(alpha * t as f64)) as u64;
    }
    Ok(t)
}

/// `α · F_v^α(z) / F_v(α z)`, the quantity that tends to 1 as `z` grows.
/// `None` when `α z < 1` (outside the inverse's domain) or the denominator is 0.
pub fn lemma11_ratio(ball: &BallIndex, alpha: f64, z: f64) -> Option<f64> {
    let scaled = growth_f_inverse_from(ball, 1.0, alpha * z).ok()?;
    let inner = growth_f_inverse_from(ball, alpha, z).ok()?;
    (scaled > 0).then(|| alpha * inner as f64 / scaled as f64)
}

/// True iff `|N_u(t)| <= q |N_v(t)|^r` for every pair of vertices and every
/// integer `0 <= t <= t_max`.
pub fn check_poly_equivalence(g: &Graph, q: f64, r: f64, t_max: usize) -> bool {
    let balls: Vec<BallIndex> = (0..g.vertex_count()).map(|v| g.ball_index(v)).collect();
    (0..=t_max).all(|t| {
        let (lo, hi) = balls.iter().fold((usize::MAX, 0), |(lo, hi), b| {
            let s = b.size(t);
            (lo.min(s), hi.max(s))
        });
        hi as f64 <= q * (lo as f64).powf(r)
    })
}
