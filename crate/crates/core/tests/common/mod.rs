#![allow(dead_code)]

use std::collections::HashSet;

use gknn::{Graph, LabelSet};
use rand::seq::index::sample;
use rand::Rng;

/// Random simple graph: `v` vertices, up to `e` edges, weights uniform in
/// `[0, 1)` with roughly `zero_frac` of them exactly zero.
pub fn random_graph<R: Rng>(rng: &mut R, v: usize, e: usize, zero_frac: f64) -> Graph {
    let max_edges = v * (v - 1) / 2;
    let target = e.min(max_edges);
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(target);
    while edges.len() < target {
        let a = rng.random_range(0..v);
        let b = rng.random_range(0..v);
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        let w = if rng.random::<f64>() < zero_frac {
            0.0
        } else {
            rng.random::<f64>()
        };
        edges.push((a, b, w));
    }
    Graph::from_edges(v, &edges).unwrap()
}

/// `n` distinct labeled vertices drawn uniformly, responses uniform in
/// `[-1, 1)`.
pub fn random_labels<R: Rng>(rng: &mut R, v: usize, n: usize) -> LabelSet {
    let ids = sample(rng, v, n);
    LabelSet::new(ids.iter().map(|id| (id, rng.random_range(-1.0..1.0)))).unwrap()
}

/// Labels restricted to vertices with at least one edge.
pub fn random_connected_labels<R: Rng>(rng: &mut R, g: &Graph, n: usize) -> LabelSet {
    let candidates: Vec<usize> = (0..g.num_vertices()).filter(|&u| g.degree(u) > 0).collect();
    let n = n.min(candidates.len()).max(1);
    let picks = sample(rng, candidates.len(), n);
    LabelSet::new(
        picks
            .iter()
            .map(|i| (candidates[i], rng.random_range(-1.0..1.0))),
    )
    .unwrap()
}
