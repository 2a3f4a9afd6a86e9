//! Undirected interaction graphs with per-edge rates.
//!
//! A [`Graph`] is immutable once built: it is always simple, connected and
//! symmetric, and it caches its maximum degree and rate extrema. Hop
//! distances, real-radius neighborhoods and the neighborhood growth
//! functions are all computed from breadth-first layers.

mod generators;
mod growth;

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

pub use generators::{
    lattice, lattice_center, random_regular_graph, regular_tree, MAX_GENERATED_VERTICES,
};
pub use growth::{
    check_poly_equivalence, growth_f, growth_f_from, growth_f_inverse, growth_f_inverse_from,
    lemma11_ratio,
};

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no edges")]
    Empty,
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge ({u}, {v}) has non-positive or non-finite rate {rate}")]
    NonPositiveRate { u: VertexId, v: VertexId, rate: f64 },
    #[error("graph is disconnected: vertex {unreachable} is not reachable from vertex 0")]
    Disconnected { unreachable: VertexId },
    #[error("vertex {vertex} out of range for graph with {count} vertices")]
    VertexOutOfRange { vertex: VertexId, count: usize },
    #[error("vertex ids must be strictly increasing (saw {prev} then {next})")]
    UnsortedVertexSet { prev: VertexId, next: VertexId },
    #[error("negative or NaN radius {0}")]
    NegativeRadius(f64),
    #[error("n*d = {n}*{d} is odd; no {d}-regular graph exists")]
    OddDegreeSum { n: usize, d: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("no simple connected graph found after {0} attempts")]
    GenerationFailed(usize),
    #[error("requested graph with {requested} vertices exceeds the limit of {limit}")]
    TooLarge { requested: u128, limit: usize },
    #[error("growth inverse is only defined for z >= 1 (got {0})")]
    InverseBelowOne(f64),
}

/// Sorted, duplicate-free list of vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(Vec<VertexId>);

impl VertexSet {
    /// Validates that `ids` is strictly increasing and below `vertex_count`.
    pub fn new(ids: Vec<VertexId>, vertex_count: usize) -> Result<Self, GraphError> {
        for w in ids.windows(2) {
            if w[0] >= w[1] {
                return Err(GraphError::UnsortedVertexSet { prev: w[0], next: w[1] });
            }
        }
        if let Some(&last) = ids.last() {
            if last >= vertex_count {
                return Err(GraphError::VertexOutOfRange { vertex: last, count: vertex_count });
            }
        }
        Ok(Self(ids))
    }

    /// Builds a set from arbitrary ids, sorting and removing duplicates.
    pub fn from_unsorted<I: IntoIterator<Item = VertexId>>(ids: I) -> Self {
        let mut ids: Vec<_> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    pub fn all(vertex_count: usize) -> Self {
        Self((0..vertex_count).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        // Both sides sorted: a merge walk suffices.
        let mut theirs = other.0.iter().peekable();
        'outer: for &v in &self.0 {
            while let Some(&&w) = theirs.peek() {
                match w.cmp(&v) {
                    std::cmp::Ordering::Less => {
                        theirs.next();
                    }
                    std::cmp::Ordering::Equal => continue 'outer,
                    std::cmp::Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn into_vec(self) -> Vec<VertexId> {
        self.0
    }
}

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub rate: f64,
}

/// Floors a nonnegative real radius to the largest hop count it admits.
pub fn radius_floor(radius: f64) -> usize {
    if radius >= usize::MAX as f64 {
        usize::MAX
    } else {
        radius.floor() as usize
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    slot_rates: Vec<f64>,
    slot_edges: Vec<usize>,
    edges: Vec<Edge>,
    max_degree: usize,
    rate_min: f64,
    rate_max: f64,
    boundary: Option<VertexSet>,
}

/// Builds a graph from `(u, v, rate)` triples. The vertex count is one more
/// than the largest id mentioned.
pub fn build_graph(edge_list: &[(VertexId, VertexId, f64)]) -> Result<Graph, GraphError> {
    let top = edge_list.iter().map(|&(u, v, _)| u.max(v)).max().ok_or(GraphError::Empty)?;
    let n = top.checked_add(1).ok_or(GraphError::VertexOutOfRange { vertex: top, count: usize::MAX })?;
    Graph::from_edges(n, edge_list)
}

impl Graph {
    pub fn from_edges(
        vertex_count: usize,
        edge_list: &[(VertexId, VertexId, f64)],
    ) -> Result<Self, GraphError> {
        if edge_list.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut seen = HashSet::with_capacity(edge_list.len());
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(a, b, rate) in edge_list {
            for x in [a, b] {
                if x >= vertex_count {
                    return Err(GraphError::VertexOutOfRange { vertex: x, count: vertex_count });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(GraphError::NonPositiveRate { u: a, v: b, rate });
            }
            let (u, v) = (a.min(b), a.max(b));
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            edges.push(Edge { u, v, rate });
        }
        edges.sort_by_key(|e| (e.u, e.v));
        let mut ends: Vec<VertexId> = edges.iter().flat_map(|e| [e.u, e.v]).collect();
        ends.sort_unstable();
        ends.dedup();
        if vertex_count > ends.len() {
            // An id no edge touches; found without allocating per-vertex storage.
            let unreachable = ends.iter().enumerate().find(|&(i, &v)| i != v).map_or(ends.len(), |(i, _)| i);
            return Err(GraphError::Disconnected { unreachable });
        }
        Self::assemble(vertex_count, edges, None)
    }

    fn assemble(
        vertex_count: usize,
        edges: Vec<Edge>,
        boundary: Option<VertexSet>,
    ) -> Result<Self, GraphError> {
        let mut degree = vec![0usize; vertex_count];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let slots = *offsets.last().unwrap();
        let mut fill = offsets[..vertex_count].to_vec();
        let mut targets = vec![0; slots];
        let mut slot_rates = vec![0.0; slots];
        let mut slot_edges = vec![0; slots];
        for (idx, e) in edges.iter().enumerate() {
            for (from, to) in [(e.u, e.v), (e.v, e.u)] {
                let s = fill[from];
                targets[s] = to;
                slot_rates[s] = e.rate;
                slot_edges[s] = idx;
                fill[from] += 1;
            }
        }
        let (rate_min, rate_max) = edges
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.rate), hi.max(e.rate)));
        let graph = Graph {
            offsets,
            targets,
            slot_rates,
            slot_edges,
            edges,
            max_degree: degree.iter().copied().max().unwrap_or(0),
            rate_min,
            rate_max,
            boundary,
        };
        let dist = graph.distances_from(0);
        if let Some(unreachable) = dist.iter().position(|&d| d == usize::MAX) {
            return Err(GraphError::Disconnected { unreachable });
        }
        Ok(graph)
    }

    /// Same topology with every edge rate replaced by `rate_of(edge_index, edge)`.
    pub fn with_rates<F>(&self, mut rate_of: F) -> Result<Self, GraphError>
    where
        F: FnMut(usize, &Edge) -> f64,
    {
        let mut edges = self.edges.clone();
        for (i, e) in edges.iter_mut().enumerate() {
            let rate = rate_of(i, e);
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(GraphError::NonPositiveRate { u: e.u, v: e.v, rate });
            }
            e.rate = rate;
        }
        Self::assemble(self.vertex_count(), edges, self.boundary.clone())
    }

    /// Marks the vertices where a finite truncation of an infinite graph was cut.
    pub(crate) fn with_boundary(mut self, boundary: VertexSet) -> Self {
        self.boundary = Some(boundary);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn rate_min(&self) -> f64 {
        self.rate_min
    }

    pub fn rate_max(&self) -> f64 {
        self.rate_max
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// `(neighbor, rate)` pairs of `v`.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()].iter().copied().zip(self.slot_rates[range].iter().copied())
    }

    /// `(neighbor, edge index)` pairs of `v`; edge indices address [`Graph::edges`].
    pub fn incident_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()].iter().copied().zip(self.slot_edges[range].iter().copied())
    }

    /// Truncation boundary, present only for finite stand-ins of infinite graphs.
    pub fn boundary(&self) -> Option<&VertexSet> {
        self.boundary.as_ref()
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, count: self.vertex_count() })
        }
    }

    /// Hop distances from `v`; unreachable entries are `usize::MAX` (never the
    /// case for a constructed graph).
    pub fn distances_from(&self, v: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[v] = 0;
        queue.push_back(v);
        while let Some(x) = queue.pop_front() {
            for &y in &self.targets[self.offsets[x]..self.offsets[x + 1]] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: VertexId, v: VertexId) -> usize {
        if u == v {
            return 0;
        }
        self.distances_from(u)[v]
    }

    pub fn ball_index(&self, v: VertexId) -> BallIndex {
        BallIndex::new(self, v)
    }

    /// `{u : dist(u, v) <= radius}`.
    pub fn neighborhood(&self, v: VertexId, radius: f64) -> Result<VertexSet, GraphError> {
        if radius.is_nan() || radius < 0.0 {
            return Err(GraphError::NegativeRadius(radius));
        }
        Ok(self.ball_index(v).ball(radius_floor(radius)))
    }

    pub fn eccentricity(&self, v: VertexId) -> usize {
        self.distances_from(v).into_iter().max().unwrap_or(0)
    }

    pub fn diameter(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.eccentricity(v)).max().unwrap_or(0)
    }

    /// Largest pairwise distance between members of `set`.
    pub fn diameter_of(&self, set: &VertexSet) -> usize {
        set.iter()
            .map(|v| {
                let dist = self.distances_from(v);
                set.iter().map(|u| dist[u]).max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Whether `set` reaches the truncation boundary or, on a graph with no
    /// boundary, exhausts the graph.
    pub fn touches_boundary(&self, set: &VertexSet) -> bool {
        match &self.boundary {
            Some(b) => set.iter().any(|v| b.contains(v)),
            None => set.len() == self.vertex_count(),
        }
    }
}

/// Breadth-first order from a center vertex, grouped into distance layers.
///
/// `ball(r)` is the prefix of `order` of length `layer_end[min(r, ecc)]`.
#[derive(Debug, Clone)]
pub struct BallIndex {
    center: VertexId,
    order: Vec<u32>,
    layer_end: Vec<usize>,
}

impl BallIndex {
    pub fn new(g: &Graph, center: VertexId) -> Self {
        let dist = g.distances_from(center);
        let ecc = dist.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0usize; ecc + 1];
        for &d in &dist {
            counts[d] += 1;
        }
        let mut layer_end = Vec::with_capacity(ecc + 1);
        let mut acc = 0;
        for c in counts {
            acc += c;
            layer_end.push(acc);
        }
        let mut order: Vec<u32> = (0..g.vertex_count() as u32).collect();
        order.sort_by_key(|&u| (dist[u as usize], u));
        Self { center, order, layer_end }
    }

    pub fn center(&self) -> VertexId {
        self.center
    }

    pub fn eccentricity(&self) -> usize {
        self.layer_end.len() - 1
    }

    /// `|N_center(radius)|` for an integer radius.
    pub fn size(&self, radius: usize) -> usize {
        self.layer_end[radius.min(self.eccentricity())]
    }

    /// Members of the ball of integer radius, in breadth-first order.
    pub fn members(&self, radius: usize) -> &[u32] {
        &self.order[..self.size(radius)]
    }

    pub fn ball(&self, radius: usize) -> VertexSet {
        VertexSet::from_unsorted(self.members(radius).iter().map(|&u| u as usize))
    }

    /// Vertices at exactly `radius` hops.
    pub fn sphere(&self, radius: usize) -> &[u32] {
        if radius > self.eccentricity() {
            return &[];
        }
        let start = if radius == 0 { 0 } else { self.layer_end[radius - 1] };
        &self.order[start..self.layer_end[radius]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        build_graph(&[(0, 1, 1.0), (1, 2, 3.0)]).unwrap()
    }

    #[test]
    fn huge_ids_fail_without_allocating() {
        assert_eq!(build_graph(&[(0, usize::MAX - 1, 1.0)]).unwrap_err(), GraphError::Disconnected { unreachable: 1 });
        assert!(matches!(build_graph(&[(0, usize::MAX, 1.0)]).unwrap_err(), GraphError::VertexOutOfRange { .. }));
        assert_eq!(build_graph(&[(1, 2, 1.0)]).unwrap_err(), GraphError::Disconnected { unreachable: 0 });
    }

    #[test]
    fn single_edge() {
        let g = build_graph(&[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.max_degree(), 1);
        assert_eq!((g.rate_min(), g.rate_max()), (1.0, 1.0));
    }

    #[test]
    fn triangle_is_symmetric() {
        let g = build_graph(&[(0, 1, 2.0), (1, 2, 2.0), (2, 0, 2.0)]).unwrap();
        assert_eq!(g.max_degree(), 2);
        assert_eq!((g.rate_min(), g.rate_max()), (2.0, 2.0));
        for u in 0..3 {
            for (v, rate) in g.neighbors(u) {
                assert!(g.neighbors(v).any(|(w, r)| w == u && r == rate));
            }
        }
    }

    #[test]
    fn path_rate_extrema() {
        let g = path3();
        assert_eq!((g.rate_min(), g.rate_max(), g.max_degree()), (1.0, 3.0, 2));
    }

    #[test]
    fn construction_errors_are_distinct() {
        assert_eq!(
            build_graph(&[(0, 1, 1.0), (2, 3, 1.0)]).unwrap_err(),
            GraphError::Disconnected { unreachable: 2 }
        );
        assert_eq!(
            build_graph(&[(0, 1, 1.0), (1, 0, 1.0)]).unwrap_err(),
            GraphError::DuplicateEdge(0, 1)
        );
        assert!(matches!(
            build_graph(&[(0, 1, 0.0)]).unwrap_err(),
            GraphError::NonPositiveRate { .. }
        ));
        assert!(matches!(
            build_graph(&[(0, 1, f64::NAN)]).unwrap_err(),
            GraphError::NonPositiveRate { .. }
        ));
        assert_eq!(build_graph(&[(1, 1, 1.0)]).unwrap_err(), GraphError::SelfLoop(1));
        assert_eq!(build_graph(&[]).unwrap_err(), GraphError::Empty);
        assert!(matches!(
            Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap_err(),
            GraphError::Disconnected { unreachable: 3 }
        ));
    }

    #[test]
    fn distances() {
        let g = path3();
        assert_eq!(g.distance(1, 1), 0);
        assert_eq!(g.distance(0, 2), 2);
        assert_eq!(g.diameter(), 2);
        assert_eq!(g.diameter_of(&VertexSet::from_unsorted([0, 1])), 1);
    }

    #[test]
    fn k4_distances_match_floyd_warshall() {
        let g = build_graph(&[
            (0, 1, 1.0),
            (0, 2, 1.0),
            (0, 3, 1.0),
            (1, 2, 1.0),
            (1, 3, 1.0),
            (2, 3, 1.0),
        ])
        .unwrap();
        let n = g.vertex_count();
        let mut fw = vec![vec![usize::MAX / 4; n]; n];
        for (i, row) in fw.iter_mut().enumerate() {
            row[i] = 0;
        }
        for e in g.edges() {
            fw[e.u][e.v] = 1;
            fw[e.v][e.u] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    fw[i][j] = fw[i][j].min(fw[i][k] + fw[k][j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(g.distance(i, j), fw[i][j]);
                if i != j {
                    assert_eq!(fw[i][j], 1);
                }
            }
        }
    }

    #[test]
    fn neighborhood_radius_floors() {
        let g = path3();
        assert_eq!(g.neighborhood(1, 0.0).unwrap().as_slice(), &[1]);
        assert_eq!(g.neighborhood(1, 0.5).unwrap().as_slice(), &[1]);
        assert_eq!(g.neighborhood(0, 1.99).unwrap().as_slice(), &[0, 1]);
        assert_eq!(g.neighborhood(0, 50.0).unwrap().len(), 3);
        assert_eq!(g.neighborhood(0, -0.1).unwrap_err(), GraphError::NegativeRadius(-0.1));
        let t = regular_tree(3, 2).unwrap();
        assert_eq!(t.neighborhood(0, 2.0).unwrap().len(), 10);
    }

    #[test]
    fn vertex_set_validation() {
        assert!(VertexSet::new(vec![0, 2, 5], 6).is_ok());
        assert!(matches!(
            VertexSet::new(vec![0, 2, 2], 6),
            Err(GraphError::UnsortedVertexSet { .. })
        ));
        assert!(matches!(
            VertexSet::new(vec![0, 6], 6),
            Err(GraphError::VertexOutOfRange { .. })
        ));
        let a = VertexSet::from_unsorted([3, 1, 1]);
        assert_eq!(a.as_slice(), &[1, 3]);
        assert!(a.is_subset(&VertexSet::from_unsorted([0, 1, 2, 3])));
        assert!(!a.is_subset(&VertexSet::from_unsorted([1, 2])));
        assert!(VertexSet::default().is_subset(&a));
    }

    #[test]
    fn ball_index_layers() {
        let t = regular_tree(3, 3).unwrap();
        let b = t.ball_index(0);
        assert_eq!((0..=4).map(|r| b.size(r)).collect::<Vec<_>>(), vec![1, 4, 10, 22, 22]);
        assert_eq!(b.sphere(2).len(), 6);
        assert!(b.sphere(9).is_empty());
    }

    #[test]
    fn with_rates_rejects_bad_rates() {
        let g = path3();
        let h = g.with_rates(|i, _| 1.0 + i as f64).unwrap();
        assert_eq!((h.rate_min(), h.rate_max()), (1.0, 2.0));
        assert!(g.with_rates(|_, _| -1.0).is_err());
    }
}
