use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError, VertexId, VertexSet};

/// Size guard for the finite truncations and random graphs.
pub const MAX_GENERATED_VERTICES: usize = 10_000_000;

const MAX_PAIRING_ATTEMPTS: usize = 10_000;

/// Uniform simple connected `d`-regular graph on `n` vertices via the pairing
/// model: shuffle `n*d` half-edges, pair them up, and reject any outcome with
/// a loop, a repeated edge, or more than one component.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    if (n as u128) * (d as u128) % 2 == 1 {
        return Err(GraphError::OddDegreeSum { n, d });
    }
    if d < 3 || n <= d {
        return Err(GraphError::InvalidParameters(format!(
            "random regular graph needs d >= 3 and n > d (got n={n}, d={d})"
        )));
    }
    if n > MAX_GENERATED_VERTICES {
        return Err(GraphError::TooLarge { requested: n as u128, limit: MAX_GENERATED_VERTICES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<VertexId> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut seen = HashSet::with_capacity(n * d / 2);
    'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
        points.shuffle(&mut rng);
        seen.clear();
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v, 1.0));
        }
        match Graph::from_edges(n, &edges) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::GenerationFailed(MAX_PAIRING_ATTEMPTS))
}

/// Ball of radius `depth` around the root (vertex 0) of the infinite
/// `degree`-regular tree. Leaves at depth `depth` form the boundary.
pub fn regular_tree(degree: usize, depth: usize) -> Result<Graph, GraphError> {
    if degree < 3 || depth == 0 {
        return Err(GraphError::InvalidParameters(format!(
            "regular tree needs degree >= 3 and depth >= 1 (got degree={degree}, depth={depth})"
        )));
    }
    let mut total: u128 = 1;
    let mut layer: u128 = degree as u128;
    for _ in 0..depth {
        total += layer;
        if total > MAX_GENERATED_VERTICES as u128 {
            return Err(GraphError::TooLarge { requested: total, limit: MAX_GENERATED_VERTICES });
        }
        layer *= (degree - 1) as u128;
    }
    let n = total as usize;
    let mut edges = Vec::with_capacity(n - 1);
    let mut frontier = vec![0usize];
    let mut next_id = 1;
    for level in 0..depth {
        let children = if level == 0 { degree } else { degree - 1 };
        let mut next = Vec::with_capacity(frontier.len() * children);
        for &parent in &frontier {
            for _ in 0..children {
                edges.push((parent, next_id, 1.0));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    let g = Graph::from_edges(n, &edges)?;
    Ok(g.with_boundary(VertexSet::from_unsorted(frontier)))
}

/// The `side^dims` grid with nearest-neighbor edges (no wrap-around).
/// Vertices with any coordinate on a face form the boundary; see
/// [`lattice_center`] for the central vertex.
pub fn lattice(dims: usize, side: usize) -> Result<Graph, GraphError> {
    if dims == 0 || side < 2 {
        return Err(GraphError::InvalidParameters(format!(
            "lattice needs dims >= 1 and side >= 2 (got dims={dims}, side={side})"
        )));
    }
    let n = (side as u128).checked_pow(dims as u32).unwrap_or(u128::MAX);
    if n > MAX_GENERATED_VERTICES as u128 {
        return Err(GraphError::TooLarge { requested: n, limit: MAX_GENERATED_VERTICES });
    }
    let n = n as usize;
    let mut edges = Vec::with_capacity(n * dims);
    let mut boundary = Vec::new();
    for v in 0..n {
        let mut rest = v;
        let mut stride = 1;
        let mut on_face = false;
        for _ in 0..dims {
            let coord = rest % side;
            rest /= side;
            if coord + 1 < side {
                edges.push((v, v + stride, 1.0));
            }
            on_face |= coord == 0 || coord + 1 == side;
            stride *= side;
        }
        if on_face {
            boundary.push(v);
        }
    }
    let g = Graph::from_edges(n, &edges)?;
    Ok(g.with_boundary(VertexSet::from_unsorted(boundary)))
}

/// Vertex with every coordinate equal to `side / 2`.
pub fn lattice_center(dims: usize, side: usize) -> VertexId {
    let mut v = 0;
    let mut stride = 1;
    for _ in 0..dims {
        v += (side / 2) * stride;
        stride *= side;
    }
    v
}
