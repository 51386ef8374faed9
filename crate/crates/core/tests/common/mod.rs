#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sagnn::graph::ConflictGraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi conflict graph with `k` links and edge probability `p`.
pub fn random_graph(k: usize, p: f64, rng: &mut impl Rng) -> ConflictGraph {
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    ConflictGraph::from_edges(k, edges, 0).unwrap()
}

/// Success of each link by scanning the dense adjacency rows: a link
/// succeeds when it transmits and no row entry marks a transmitting
/// neighbour.
pub fn oracle_successes(adj: &[Vec<u8>], on: &[bool]) -> Vec<f64> {
    (0..on.len())
        .map(|i| {
            let blocked = (0..on.len()).any(|j| adj[i][j] == 1 && on[j]);
            if on[i] && !blocked {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

pub fn bits(mask: u32, k: usize) -> Vec<bool> {
    (0..k).map(|i| mask >> i & 1 == 1).collect()
}

pub fn random_permutation(k: usize, rng: &mut impl Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..k).collect();
    p.shuffle(rng);
    p
}
