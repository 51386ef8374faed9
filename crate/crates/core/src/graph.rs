//! Communication graphs, their conflict (line) graphs, and graph shifts.
//!
//! A communication graph places agents on the cells of a square lattice and
//! connects every pair within a communication radius. Each communication edge
//! is a *link*; two links conflict when they share an agent, so the conflict
//! graph is the line graph of the communication graph.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Absolute slack on the radius comparison so lattice distances that equal the
/// radius up to rounding are treated consistently.
const RADIUS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    pub n_nodes: usize,
    pub positions: Vec<[f64; 2]>,
    /// Undirected edges stored once as `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub seed: u64,
}

impl CommGraph {
    /// Builds a graph from explicit edges, normalizing orientation and order.
    pub fn from_edges(
        n_nodes: usize,
        positions: Vec<[f64; 2]>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        seed: u64,
    ) -> Result<Self> {
        if !positions.is_empty() {
            check_len(n_nodes, positions.len())?;
        }
        let edges = normalize_edges(n_nodes, edges)?;
        Ok(Self {
            n_nodes,
            positions,
            edges,
            seed,
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n_nodes as f64
    }
}

/// Side length of one lattice cell for an `n_nodes` workspace.
pub fn cell_side(n_nodes: usize) -> f64 {
    let side = (n_nodes as f64).sqrt();
    side / side.ceil()
}

/// Places `n_nodes` agents on distinct cell centers of a `⌈√N⌉ × ⌈√N⌉` lattice
/// covering a square of side `√N`, connecting pairs within
/// `radius_factor × l_cell`.
pub fn generate_comm_graph(n_nodes: usize, radius_factor: f64, seed: u64) -> Result<CommGraph> {
    if n_nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_nodes must be at least 2, got {n_nodes}"
        )));
    }
    if !(radius_factor > 0.0 && radius_factor.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radius_factor must be positive, got {radius_factor}"
        )));
    }
    let per_side = (n_nodes as f64).sqrt().ceil() as usize;
    let l_cell = cell_side(n_nodes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = index::sample(&mut rng, per_side * per_side, n_nodes).into_vec();
    cells.sort_unstable();

    let positions: Vec<[f64; 2]> = cells
        .iter()
        .map(|&c| {
            let (row, col) = (c / per_side, c % per_side);
            [(col as f64 + 0.5) * l_cell, (row as f64 + 0.5) * l_cell]
        })
        .collect();

    let radius = radius_factor * l_cell + RADIUS_EPS;
    let mut edges = Vec::new();
    for u in 0..n_nodes {
        for v in (u + 1)..n_nodes {
            let dx = positions[u][0] - positions[v][0];
            let dy = positions[u][1] - positions[v][1];
            if dx.hypot(dy) <= radius {
                edges.push((u, v));
            }
        }
    }
    Ok(CommGraph {
        n_nodes,
        positions,
        edges,
        seed,
    })
}

/// Shift operator used to diffuse signals over a conflict graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShiftOperator {
    /// The binary adjacency matrix `A`.
    Adjacency,
    /// `D^{-1/2} A D^{-1/2}`; isolated links map to zero rows.
    #[default]
    SymmetricNormalized,
}

impl ShiftOperator {
    pub fn name(self) -> &'static str {
        match self {
            ShiftOperator::Adjacency => "adjacency",
            ShiftOperator::SymmetricNormalized => "symmetric_normalized",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    n_links: usize,
    /// Sorted neighbor lists; symmetric, no self entries.
    neighbors: Vec<Vec<usize>>,
    /// Communication endpoints of each link, if known.
    pub link_endpoints: Vec<(usize, usize)>,
    pub source_seed: u64,
}

impl ConflictGraph {
    /// Builds a conflict graph from an undirected edge list.
    pub fn from_edges(
        n_links: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        source_seed: u64,
    ) -> Result<Self> {
        if n_links == 0 {
            return Err(Error::InvalidGraph("conflict graph must have at least one link".into()));
        }
        let edges = normalize_edges(n_links, edges)?;
        let mut neighbors = vec![Vec::new(); n_links];
        for (i, j) in edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n_links,
            neighbors,
            link_endpoints: Vec::new(),
            source_seed,
        })
    }

    /// Builds a conflict graph from a dense 0/1 adjacency matrix, rejecting
    /// asymmetric matrices and nonzero diagonals.
    pub fn from_adjacency(rows: &[Vec<u8>], source_seed: u64) -> Result<Self> {
        let k = rows.len();
        let mut edges = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            check_len(k, row.len()).map_err(|_| {
                Error::InvalidGraph(format!("adjacency row {i} has {} entries, expected {k}", row.len()))
            })?;
            for (j, &a) in row.iter().enumerate() {
                if a > 1 {
                    return Err(Error::InvalidGraph(format!("adjacency[{i}][{j}] = {a} is not binary")));
                }
                if i == j && a != 0 {
                    return Err(Error::InvalidGraph(format!("nonzero diagonal at adjacency[{i}][{i}]")));
                }
                if a != rows[j][i] {
                    return Err(Error::InvalidGraph(format!(
                        "asymmetric adjacency: [{i}][{j}] = {a} but [{j}][{i}] = {}",
                        rows[j][i]
                    )));
                }
                if a == 1 && i < j {
                    edges.push((i, j));
                }
            }
        }
        Self::from_edges(k, edges, source_seed)
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn neighbors(&self, link: usize) -> &[usize] {
        &self.neighbors[link]
    }

    pub fn degree(&self, link: usize) -> usize {
        self.neighbors[link].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn n_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; self.n_links]; self.n_links];
        for (i, j) in self.edges() {
            a[i][j] = 1;
            a[j][i] = 1;
        }
        a
    }

    /// Relabels links so that old link `i` becomes `perm[i]`; the result has
    /// adjacency `P A Pᵀ`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_len(self.n_links, perm.len())?;
        let mut seen = vec![false; self.n_links];
        for &p in perm {
            if p >= self.n_links || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let mut g = Self::from_edges(
            self.n_links,
            self.edges().map(|(i, j)| (perm[i], perm[j])),
            self.source_seed,
        )?;
        if !self.link_endpoints.is_empty() {
            let mut ends = vec![(0, 0); self.n_links];
            for (i, &e) in self.link_endpoints.iter().enumerate() {
                ends[perm[i]] = e;
            }
            g.link_endpoints = ends;
        }
        Ok(g)
    }

    /// `A · signal`.
    pub fn shift(&self, signal: &[f64]) -> Result<Vec<f64>> {
        self.shift_by(ShiftOperator::Adjacency, signal)
    }

    /// Applies the chosen shift operator to a signal.
    pub fn shift_by(&self, op: ShiftOperator, signal: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_links, signal.len())?;
        let out = match op {
            ShiftOperator::Adjacency => self
                .neighbors
                .iter()
                .map(|ns| ns.iter().map(|&j| signal[j]).sum())
                .collect(),
            ShiftOperator::SymmetricNormalized => {
                let scale = self.inv_sqrt_degrees();
                self.neighbors
                    .iter()
                    .enumerate()
                    .map(|(i, ns)| scale[i] * ns.iter().map(|&j| scale[j] * signal[j]).sum::<f64>())
                    .collect()
            }
        };
        Ok(out)
    }

    /// `1/√d_i`, or 0 for isolated links.
    pub fn inv_sqrt_degrees(&self) -> Vec<f64> {
        self.neighbors
            .iter()
            .map(|ns| if ns.is_empty() { 0.0 } else { 1.0 / (ns.len() as f64).sqrt() })
            .collect()
    }
}

/// Line graph: one link per communication edge, ordered lexicographically by
/// endpoint pair; two links conflict iff they share an endpoint.
pub fn line_graph(comm: &CommGraph) -> Result<ConflictGraph> {
    if comm.edges.is_empty() {
        return Err(Error::NoLinks);
    }
    let mut links = comm.edges.clone();
    links.sort_unstable();

    let mut incident = vec![Vec::new(); comm.n_nodes];
    for (idx, &(u, v)) in links.iter().enumerate() {
        incident[u].push(idx);
        incident[v].push(idx);
    }
    let mut edges = Vec::new();
    for inc in &incident {
        for (a, &i) in inc.iter().enumerate() {
            for &j in &inc[a + 1..] {
                edges.push((i.min(j), i.max(j)));
            }
        }
    }
    let mut g = ConflictGraph::from_edges(links.len(), edges, comm.seed)?;
    g.link_endpoints = links;
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n_links: usize,
    pub mean_degree: f64,
    /// `degree_histogram[d]` = number of links with conflict degree `d`.
    pub degree_histogram: Vec<usize>,
}

pub fn graph_stats(graph: &ConflictGraph) -> GraphStats {
    let degrees = graph.degrees();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut degree_histogram = vec![0; max + 1];
    for &d in &degrees {
        degree_histogram[d] += 1;
    }
    GraphStats {
        n_links: graph.n_links(),
        mean_degree: degrees.iter().sum::<usize>() as f64 / graph.n_links() as f64,
        degree_histogram,
    }
}

fn normalize_edges(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for {n} nodes")));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
        }
        out.push((u.min(v), u.max(v)));
    }
    out.sort_unstable();
    let before = out.len();
    out.dedup();
    if out.len() != before {
        return Err(Error::InvalidGraph("duplicate edge".into()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON graph files

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Comm,
    Conflict,
}

/// On-disk graph representation. `edges` are stored once with `i < j`;
/// readers also accept a dense `adjacency` matrix in place of `edges`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(rename = "type")]
    pub kind: GraphKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_endpoints: Option<Vec<[usize; 2]>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyGraph {
    Comm(CommGraph),
    Conflict(ConflictGraph),
}

impl From<&CommGraph> for GraphFile {
    fn from(g: &CommGraph) -> Self {
        GraphFile {
            kind: GraphKind::Comm,
            n: g.n_nodes,
            edges: Some(g.edges.iter().map(|&(u, v)| [u, v]).collect()),
            adjacency: None,
            positions: (!g.positions.is_empty()).then(|| g.positions.clone()),
            link_endpoints: None,
            seed: g.seed,
        }
    }
}

impl From<&ConflictGraph> for GraphFile {
    fn from(g: &ConflictGraph) -> Self {
        GraphFile {
            kind: GraphKind::Conflict,
            n: g.n_links,
            edges: Some(g.edges().map(|(i, j)| [i, j]).collect()),
            adjacency: None,
            positions: None,
            link_endpoints: (!g.link_endpoints.is_empty())
                .then(|| g.link_endpoints.iter().map(|&(u, v)| [u, v]).collect()),
            seed: g.source_seed,
        }
    }
}

impl GraphFile {
    fn edge_pairs(&self) -> Result<Vec<(usize, usize)>> {
        match (&self.edges, &self.adjacency) {
            (Some(_), Some(_)) => Err(Error::InvalidGraph(
                "both \"edges\" and \"adjacency\" given".into(),
            )),
            (None, None) => Err(Error::InvalidGraph("missing field \"edges\"".into())),
            (Some(edges), None) => {
                for (idx, &[i, j]) in edges.iter().enumerate() {
                    if i == j {
                        return Err(Error::InvalidGraph(format!(
                            "edges[{idx}]: self-loop [{i}, {i}] (nonzero diagonal)"
                        )));
                    }
                    if i > j {
                        return Err(Error::InvalidGraph(format!(
                            "edges[{idx}]: [{i}, {j}] must be stored once with i < j"
                        )));
                    }
                }
                Ok(edges.iter().map(|&[i, j]| (i, j)).collect())
            }
            (None, Some(rows)) => {
                check_len(self.n, rows.len()).map_err(|_| {
                    Error::InvalidGraph(format!("adjacency has {} rows, expected n = {}", rows.len(), self.n))
                })?;
                Ok(ConflictGraph::from_adjacency(rows, self.seed)?.edges().collect())
            }
        }
    }

    pub fn into_graph(self) -> Result<AnyGraph> {
        let pairs = self.edge_pairs()?;
        match self.kind {
            GraphKind::Comm => {
                let positions = self.positions.unwrap_or_default();
                Ok(AnyGraph::Comm(CommGraph::from_edges(self.n, positions, pairs, self.seed)?))
            }
            GraphKind::Conflict => {
                let mut g = ConflictGraph::from_edges(self.n, pairs, self.seed)?;
                if let Some(ends) = self.link_endpoints {
                    check_len(self.n, ends.len()).map_err(|_| {
                        Error::InvalidGraph(format!(
                            "link_endpoints has {} entries, expected n = {}",
                            ends.len(),
                            self.n
                        ))
                    })?;
                    g.link_endpoints = ends.iter().map(|&[u, v]| (u, v)).collect();
                    check_shared_endpoints(&g)?;
                }
                Ok(AnyGraph::Conflict(g))
            }
        }
    }
}

/// Verifies that conflicts coincide exactly with shared endpoints.
fn check_shared_endpoints(g: &ConflictGraph) -> Result<()> {
    let mut by_node: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &(u, v)) in g.link_endpoints.iter().enumerate() {
        by_node.entry(u).or_default().push(i);
        by_node.entry(v).or_default().push(i);
    }
    let mut expected = Vec::new();
    for links in by_node.values() {
        for (a, &i) in links.iter().enumerate() {
            for &j in &links[a + 1..] {
                expected.push((i.min(j), i.max(j)));
            }
        }
    }
    expected.sort_unstable();
    expected.dedup();
    let actual: Vec<_> = g.edges().collect();
    if expected != actual {
        return Err(Error::InvalidGraph(
            "edges do not match links sharing an endpoint in link_endpoints".into(),
        ));
    }
    Ok(())
}

pub fn save_graph_file(path: impl AsRef<Path>, file: &GraphFile) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(file).expect("graph file serializes");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_graph_file(path: impl AsRef<Path>) -> Result<AnyGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: GraphFile = serde_json::from_str(&text).map_err(|e| {
        Error::parse(path, format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    file.into_graph()
        .map_err(|e| Error::parse(path, e.to_string()))
}

pub fn save_comm_graph(path: impl AsRef<Path>, g: &CommGraph) -> Result<()> {
    save_graph_file(path, &GraphFile::from(g))
}

pub fn save_conflict_graph(path: impl AsRef<Path>, g: &ConflictGraph) -> Result<()> {
    save_graph_file(path, &GraphFile::from(g))
}

pub fn load_comm_graph(path: impl AsRef<Path>) -> Result<CommGraph> {
    let path = path.as_ref();
    match load_graph_file(path)? {
        AnyGraph::Comm(g) => Ok(g),
        AnyGraph::Conflict(_) => Err(Error::parse(path, "field \"type\": expected \"comm\", found \"conflict\"")),
    }
}

pub fn load_conflict_graph(path: impl AsRef<Path>) -> Result<ConflictGraph> {
    let path = path.as_ref();
    match load_graph_file(path)? {
        AnyGraph::Conflict(g) => Ok(g),
        AnyGraph::Comm(_) => Err(Error::parse(path, "field \"type\": expected \"conflict\", found \"comm\"")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle() -> ConflictGraph {
        ConflictGraph::from_edges(3, [(0, 1), (0, 2), (1, 2)], 0).unwrap()
    }

    #[test]
    fn four_nodes_form_a_four_cycle() {
        for seed in 0..5 {
            let g = generate_comm_graph(4, 1.2, seed).unwrap();
            assert_eq!(g.edges, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
            assert!(g.degrees().iter().all(|&d| d == 2));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_comm_graph(250, 1.2, 7).unwrap();
        let b = generate_comm_graph(250, 1.2, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_comm_graph(250, 1.2, 8).unwrap();
        assert_ne!(a.edges, c.edges);
    }

    #[test]
    fn rejects_tiny_graphs() {
        assert!(generate_comm_graph(1, 1.2, 0).is_err());
        assert!(generate_comm_graph(10, 0.0, 0).is_err());
    }

    #[test]
    fn positions_are_distinct_and_edges_within_radius() {
        let g = generate_comm_graph(137, 1.2, 3).unwrap();
        let l = cell_side(137);
        let side = (137f64).sqrt();
        for (i, p) in g.positions.iter().enumerate() {
            assert!(p[0] > 0.0 && p[0] < side && p[1] > 0.0 && p[1] < side);
            for q in &g.positions[i + 1..] {
                assert!(p != q);
            }
        }
        for &(u, v) in &g.edges {
            let (p, q) = (g.positions[u], g.positions[v]);
            assert!((p[0] - q[0]).hypot(p[1] - q[1]) <= 1.2 * l + 1e-9);
        }
    }

    #[test]
    fn line_graph_small_cases() {
        let single = CommGraph::from_edges(2, vec![], [(0, 1)], 0).unwrap();
        let g = line_graph(&single).unwrap();
        assert_eq!((g.n_links(), g.n_edges()), (1, 0));

        let path = CommGraph::from_edges(3, vec![], [(0, 1), (1, 2)], 0).unwrap();
        let g = line_graph(&path).unwrap();
        assert_eq!(g.n_links(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let stats = graph_stats(&g);
        assert_eq!((stats.n_links, stats.mean_degree), (2, 1.0));

        let star = CommGraph::from_edges(4, vec![], [(0, 1), (0, 2), (0, 3)], 0).unwrap();
        let g = line_graph(&star).unwrap();
        assert_eq!(g, {
            let mut t = triangle();
            t.link_endpoints = vec![(0, 1), (0, 2), (0, 3)];
            t
        });
    }

    #[test]
    fn line_graph_without_edges_fails() {
        let empty = CommGraph::from_edges(3, vec![], [], 0).unwrap();
        assert!(matches!(line_graph(&empty), Err(Error::NoLinks)));
    }

    #[test]
    fn shift_examples() {
        let t = triangle();
        assert_eq!(t.shift(&[1.0, 1.0, 0.0]).unwrap(), vec![1.0, 1.0, 2.0]);
        assert_eq!(t.shift(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        let edgeless = ConflictGraph::from_edges(3, [], 0).unwrap();
        assert_eq!(edgeless.shift(&[4.0, -1.0, 2.0]).unwrap(), vec![0.0; 3]);
        assert!(matches!(
            t.shift(&[1.0]),
            Err(Error::LengthMismatch { expected: 3, got: 1 })
        ));
        // Normalized triangle: every degree is 2 so Ã = A / 2.
        let n = t.shift_by(ShiftOperator::SymmetricNormalized, &[1.0, 1.0, 0.0]).unwrap();
        for (a, b) in n.iter().zip([0.5, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_stats() {
        let s = graph_stats(&triangle());
        assert_eq!(s.n_links, 3);
        assert_eq!(s.mean_degree, 2.0);
        assert_eq!(s.degree_histogram, vec![0, 0, 3]);
    }

    #[test]
    fn adjacency_validation() {
        assert!(ConflictGraph::from_adjacency(&[vec![0, 1], vec![0, 0]], 0).is_err());
        assert!(ConflictGraph::from_adjacency(&[vec![1, 0], vec![0, 0]], 0).is_err());
        let g = ConflictGraph::from_adjacency(&[vec![0, 1], vec![1, 0]], 0).unwrap();
        assert_eq!(g.adjacency_matrix(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn permutation_relabels_edges() {
        let path = ConflictGraph::from_edges(3, [(0, 1), (1, 2)], 0).unwrap();
        let p = path.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        assert!(path.permuted(&[0, 0, 1]).is_err());
    }
}
