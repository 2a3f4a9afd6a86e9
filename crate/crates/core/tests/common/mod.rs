//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sicascade::graph::{build_graph, lattice, random_regular_graph, regular_tree, Graph};

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Undirected simple graph on at most 8 vertices as adjacency bitmasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SmallGraph {
    pub n: usize,
    pub adj: [u8; 8],
}

impl SmallGraph {
    pub fn empty(n: usize) -> Self {
        Self { n, adj: [0; 8] }
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u] >> v & 1 == 1 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Ball of radius `t` around `v` as a bitmask.
    pub fn ball(&self, v: usize, t: usize) -> u8 {
        let mut ball = 1u8 << v;
        for _ in 0..t {
            let mut next = ball;
            for u in 0..self.n {
                if ball >> u & 1 == 1 {
                    next |= self.adj[u];
                }
            }
            ball = next;
        }
        ball
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.ball(0, self.n).count_ones() as usize == self.n
    }

    /// Adds a new vertex adjacent to the vertices in `mask`.
    pub fn extend(&self, mask: u8) -> Self {
        let mut g = *self;
        let v = self.n;
        g.n += 1;
        g.adj[v] = mask;
        for u in 0..self.n {
            if mask >> u & 1 == 1 {
                g.adj[u] |= 1 << v;
            }
        }
        g
    }

    fn encode(&self, perm: &[usize]) -> u64 {
        // Bit for each pair (i < j) of new labels.
        let mut code = 0u64;
        let mut bit = 0;
        let mut inv = [0usize; 8];
        for (old, &new) in perm.iter().enumerate() {
            inv[new] = old;
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adj[inv[i]] >> inv[j] & 1 == 1 {
                    code |= 1 << bit;
                }
                bit += 1;
            }
        }
        code
    }

    /// Isomorphism invariant code: minimum encoding over relabelings that
    /// list vertices by nonincreasing degree.
    pub fn canonical(&self) -> u64 {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.degree(v)));
        // Blocks of equal degree, permuted independently.
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            match blocks.last_mut() {
                Some(b) if self.degree(b[0]) == self.degree(v) => b.push(v),
                _ => blocks.push(vec![v]),
            }
        }
        let mut best = u64::MAX;
        let mut perm = vec![0usize; self.n];
        self.search(&blocks, 0, 0, &mut perm, &mut best);
        best
    }

    fn search(&self, blocks: &[Vec<usize>], b: usize, pos: usize, perm: &mut [usize], best: &mut u64) {
        if b == blocks.len() {
            *best = (*best).min(self.encode(perm));
            return;
        }
        let mut items = blocks[b].clone();
        permute(&mut items, 0, &mut |p: &[usize]| {
            for (i, &v) in p.iter().enumerate() {
                perm[v] = pos + i;
            }
            self.search(blocks, b + 1, pos + p.len(), perm, best);
        });
    }

    pub fn to_graph(&self) -> Graph {
        let edges: Vec<_> = self.edges().into_iter().map(|(u, v)| (u, v, 1.0)).collect();
        build_graph(&edges).expect("connected small graph")
    }
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

/// One representative per isomorphism class for every `n <= max_n`
/// (index `n` of the result), connected or not.
pub fn isomorphism_classes(max_n: usize) -> Vec<Vec<SmallGraph>> {
    let mut levels = vec![vec![SmallGraph::empty(0)]];
    for n in 1..=max_n {
        let mut seen = HashSet::new();
        let mut reps = Vec::new();
        for g in &levels[n - 1] {
            for mask in 0..(1u16 << (n - 1)) {
                let h = g.extend(mask as u8);
                if seen.insert(h.canonical()) {
                    reps.push(h);
                }
            }
        }
        levels.push(reps);
    }
    levels
}

/// Every connected graph on `n + 1` vertices up to isomorphism appears among
/// the one-vertex extensions of the `n`-vertex classes (duplicates included).
pub fn connected_extensions(reps: &[SmallGraph]) -> Vec<SmallGraph> {
    let mut out = Vec::new();
    for g in reps {
        for mask in 1..(1u16 << g.n) {
            let h = g.extend(mask as u8);
            if h.is_connected() {
                out.push(h);
            }
        }
    }
    out
}

/// Direct pairwise check of `|N_u(t)| <= q |N_v(t)|^r`.
pub fn brute_poly_equivalence(g: &SmallGraph, q: f64, r: f64, t_max: usize) -> bool {
    for t in 0..=t_max {
        for u in 0..g.n {
            for v in 0..g.n {
                let bu = g.ball(u, t).count_ones() as f64;
                let bv = g.ball(v, t).count_ones() as f64;
                if bu > q * bv.powf(r) {
                    return false;
                }
            }
        }
    }
    true
}

/// A connected test graph drawn from a mix of families.
pub fn random_test_graph(rng: &mut ChaCha8Rng) -> Graph {
    match rng.random_range(0..5) {
        0 => {
            let d = rng.random_range(3..6);
            let mut n = rng.random_range(d + 1..60);
            if n * d % 2 == 1 {
                n += 1;
            }
            random_regular_graph(n, d, rng.random()).unwrap()
        }
        1 => regular_tree(rng.random_range(3..5), rng.random_range(1..5)).unwrap(),
        2 => lattice(rng.random_range(1..4), rng.random_range(3..7)).unwrap(),
        3 => {
            // Random tree plus extra edges.
            let n = rng.random_range(2..50);
            let mut edges = HashSet::new();
            for v in 1..n {
                edges.insert((rng.random_range(0..v), v));
            }
            for _ in 0..rng.random_range(0..n) {
                let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
                if a != b {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
            let mut list: Vec<_> = edges.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
            list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            build_graph(&list).unwrap()
        }
        _ => {
            // Cycle with shuffled labels.
            let n = rng.random_range(3..40);
            let mut labels: Vec<usize> = (0..n).collect();
            labels.shuffle(rng);
            let edges: Vec<_> = (0..n).map(|i| (labels[i], labels[(i + 1) % n], 1.0)).collect();
            build_graph(&edges).unwrap()
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
