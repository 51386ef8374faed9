//! Heuristic schedulers: degree-based p-persistent transmission and random
//! subsets sized like a maximal independent set, each with an optional
//! collision-avoidance pass.

use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    PPersistent,
    MisRandom,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::PPersistent => "p_persistent",
            BaselineKind::MisRandom => "mis_random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub collision_avoidance: bool,
    #[serde(rename = "T")]
    pub steps: usize,
    pub seed: u64,
    /// Persistence exponent α in `p_i = (1 + d_i)^{−α}`.
    #[serde(default = "default_exponent")]
    pub p_exponent: f64,
}

fn default_exponent() -> f64 {
    1.0
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, collision_avoidance: bool, steps: usize, seed: u64) -> Self {
        Self {
            kind,
            collision_avoidance,
            steps,
            seed,
            p_exponent: 1.0,
        }
    }

    /// All four variants in legend order.
    pub fn all_variants(steps: usize, seed: u64) -> Vec<Self> {
        [BaselineKind::PPersistent, BaselineKind::MisRandom]
            .into_iter()
            .flat_map(|k| [false, true].map(move |ca| Self::new(k, ca, steps, seed)))
            .collect()
    }

    pub fn label(&self) -> String {
        format!("{}_{}", self.kind.name(), if self.collision_avoidance { "ca" } else { "naive" })
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Config("baseline T must be >= 1".into()));
        }
        if !(self.p_exponent >= 0.0 && self.p_exponent.is_finite()) {
            return Err(Error::Config(format!("p_exponent must be >= 0, got {}", self.p_exponent)));
        }
        Ok(())
    }
}

impl fmt::Display for BaselineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Turns off one link of each scheduled conflicting pair, chosen uniformly,
/// sweeping pairs in a random order until none remain.
pub fn resolve_collisions<R: Rng + ?Sized>(graph: &ConflictGraph, s: &Schedule, rng: &mut R) -> Schedule {
    let mut on: Vec<bool> = (0..s.len()).map(|i| s.is_on(i)).collect();
    loop {
        let mut pairs: Vec<(usize, usize)> = graph.edges().filter(|&(i, j)| on[i] && on[j]).collect();
        if pairs.is_empty() {
            break;
        }
        pairs.shuffle(rng);
        for (i, j) in pairs {
            if on[i] && on[j] {
                if rng.random_bool(0.5) {
                    on[i] = false;
                } else {
                    on[j] = false;
                }
            }
        }
    }
    Schedule::from_bools(on)
}

pub fn transmit_probabilities(graph: &ConflictGraph, exponent: f64) -> Vec<f64> {
    graph
        .degrees()
        .into_iter()
        .map(|d| (1.0 + d as f64).powf(-exponent))
        .collect()
}

pub fn p_persistent_schedule(graph: &ConflictGraph, cfg: &BaselineConfig) -> Result<Vec<Schedule>> {
    cfg.validate()?;
    let p = transmit_probabilities(graph, cfg.p_exponent);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((0..cfg.steps)
        .map(|_| {
            let s = Schedule::from_bools(p.iter().map(|&pi| rng.random_bool(pi)));
            if cfg.collision_avoidance {
                resolve_collisions(graph, &s, &mut rng)
            } else {
                s
            }
        })
        .collect())
}

/// Maximal independent set: links in ascending (degree, index) order, each
/// kept unless a neighbor was already kept.
pub fn greedy_mis(graph: &ConflictGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.n_links()).collect();
    order.sort_by_key(|&i| (graph.degree(i), i));
    let mut blocked = vec![false; graph.n_links()];
    let mut set = Vec::new();
    for i in order {
        if !blocked[i] {
            set.push(i);
            blocked[i] = true;
            for &j in graph.neighbors(i) {
                blocked[j] = true;
            }
        }
    }
    set.sort_unstable();
    set
}

pub const EXACT_MIS_MAX_LINKS: usize = 30;

/// Maximum independent set by branch and bound over bitmasks.
pub fn exact_mis(graph: &ConflictGraph) -> Result<Vec<usize>> {
    let k = graph.n_links();
    if k > EXACT_MIS_MAX_LINKS {
        return Err(Error::InvalidArgument(format!(
            "exact MIS supports at most {EXACT_MIS_MAX_LINKS} links, got {k}"
        )));
    }
    let closed: Vec<u64> = (0..k)
        .map(|i| graph.neighbors(i).iter().fold(1u64 << i, |m, &j| m | (1 << j)))
        .collect();
    let mut best = 0u64;
    branch(&closed, (1u64 << k) - 1, 0, &mut best);
    Ok((0..k).filter(|&i| best >> i & 1 == 1).collect())
}

fn branch(closed: &[u64], candidates: u64, chosen: u64, best: &mut u64) {
    if candidates == 0 {
        if chosen.count_ones() > best.count_ones() {
            *best = chosen;
        }
        return;
    }
    if chosen.count_ones() + candidates.count_ones() <= best.count_ones() {
        return;
    }
    // Branch on the candidate with most remaining neighbors.
    let v = (0..closed.len())
        .filter(|&i| candidates >> i & 1 == 1)
        .max_by_key(|&i| ((closed[i] & candidates).count_ones(), std::cmp::Reverse(i)))
        .expect("nonempty candidates");
    let bit = 1u64 << v;
    if (closed[v] & candidates) == bit {
        // Isolated among candidates: always take it.
        branch(closed, candidates & !bit, chosen | bit, best);
        return;
    }
    branch(closed, candidates & !closed[v], chosen | bit, best);
    branch(closed, candidates & !bit, chosen, best);
}

pub fn is_independent(graph: &ConflictGraph, set: &[usize]) -> bool {
    set.iter()
        .enumerate()
        .all(|(a, &i)| set[a + 1..].iter().all(|&j| !graph.has_edge(i, j)))
}

/// At each step, a uniformly random subset of `M = |greedy MIS|` links.
pub fn mis_random_schedule(graph: &ConflictGraph, cfg: &BaselineConfig) -> Result<Vec<Schedule>> {
    cfg.validate()?;
    let k = graph.n_links();
    let m = greedy_mis(graph).len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((0..cfg.steps)
        .map(|_| {
            let mut on = vec![false; k];
            for i in index::sample(&mut rng, k, m) {
                on[i] = true;
            }
            let s = Schedule::from_bools(on);
            if cfg.collision_avoidance {
                resolve_collisions(graph, &s, &mut rng)
            } else {
                s
            }
        })
        .collect())
}

pub fn baseline_schedule(graph: &ConflictGraph, cfg: &BaselineConfig) -> Result<Vec<Schedule>> {
    match cfg.kind {
        BaselineKind::PPersistent => p_persistent_schedule(graph, cfg),
        BaselineKind::MisRandom => mis_random_schedule(graph, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::objective;

    fn cycle(n: usize) -> ConflictGraph {
        ConflictGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)), 0).unwrap()
    }

    #[test]
    fn mis_small_cases() {
        let edgeless = ConflictGraph::from_edges(4, [], 0).unwrap();
        assert_eq!(greedy_mis(&edgeless), vec![0, 1, 2, 3]);
        assert_eq!(exact_mis(&edgeless).unwrap().len(), 4);
        let tri = cycle(3);
        assert_eq!(greedy_mis(&tri).len(), 1);
        assert_eq!(exact_mis(&tri).unwrap().len(), 1);
        let path = ConflictGraph::from_edges(3, [(0, 1), (1, 2)], 0).unwrap();
        assert_eq!(greedy_mis(&path), vec![0, 2]);
        assert_eq!(exact_mis(&cycle(5)).unwrap().len(), 2);
        let big = ConflictGraph::from_edges(31, [], 0).unwrap();
        assert!(exact_mis(&big).is_err());
    }

    #[test]
    fn isolated_link_always_transmits() {
        let g = ConflictGraph::from_edges(1, [], 0).unwrap();
        let cfg = BaselineConfig::new(BaselineKind::PPersistent, false, 50, 3);
        let s = p_persistent_schedule(&g, &cfg).unwrap();
        assert!(s.iter().all(|x| objective(&g, x).unwrap() == 1.0));
    }

    #[test]
    fn conflict_free_input_unchanged() {
        let g = cycle(6);
        let s = Schedule::from_bools([true, false, true, false, true, false]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(resolve_collisions(&g, &s, &mut rng), s);
    }

    #[test]
    fn single_edge_collision_is_fair() {
        let g = ConflictGraph::from_edges(2, [(0, 1)], 0).unwrap();
        let s = Schedule::from_bools([true, true]);
        let n = 2000;
        let mut first = 0;
        for seed in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = resolve_collisions(&g, &s, &mut rng);
            assert_eq!(out.count(), 1.0);
            first += out.is_on(0) as usize;
        }
        // 4 binomial standard deviations.
        let sd = (n as f64 * 0.25).sqrt();
        assert!((first as f64 - n as f64 / 2.0).abs() < 4.0 * sd, "{first}");
    }

    #[test]
    fn mis_random_schedules_m_links() {
        let g = cycle(9);
        let m = greedy_mis(&g).len();
        let cfg = BaselineConfig::new(BaselineKind::MisRandom, false, 20, 1);
        for s in mis_random_schedule(&g, &cfg).unwrap() {
            assert_eq!(s.count() as usize, m);
        }
        let edgeless = ConflictGraph::from_edges(5, [], 0).unwrap();
        for s in mis_random_schedule(&edgeless, &cfg).unwrap() {
            assert_eq!(objective(&edgeless, &s).unwrap(), 5.0);
        }
    }

    #[test]
    fn four_labeled_variants() {
        let labels: Vec<_> = BaselineConfig::all_variants(10, 0).iter().map(|c| c.label()).collect();
        assert_eq!(labels, ["p_persistent_naive", "p_persistent_ca", "mis_random_naive", "mis_random_ca"]);
    }
}
