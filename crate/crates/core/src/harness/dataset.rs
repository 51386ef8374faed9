//! On-disk datasets of communication and conflict graphs.
//!
//! Layout:
//!
//! ```text
//! <dir>/manifest.json
//! <dir>/train/comm_000.json   <dir>/train/conflict_000.json   ...
//! <dir>/test/comm_000.json    <dir>/test/conflict_000.json    ...
//! ```

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::DatasetSpec;
use crate::error::{Error, Result};
use crate::graph::{
    generate_comm_graph, graph_stats, line_graph, load_conflict_graph, save_comm_graph,
    save_conflict_graph, CommGraph, ConflictGraph,
};
use crate::trainer::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEntry {
    pub id: String,
    pub split: String,
    pub seed: u64,
    pub n_nodes: usize,
    pub n_comm_edges: usize,
    pub n_links: usize,
    pub comm_mean_degree: f64,
    pub conflict_mean_degree: f64,
    pub greedy_mis_size: usize,
    pub comm_file: String,
    pub conflict_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSummary {
    pub n_graphs: usize,
    pub mean_n_links: f64,
    pub mean_comm_degree: f64,
    pub mean_conflict_degree: f64,
    pub mean_mis_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: DatasetSpec,
    pub graphs: Vec<GraphEntry>,
    pub summary: ManifestSummary,
}

impl Manifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.to_string()))
    }
}

pub struct GeneratedGraph {
    pub id: String,
    pub split: &'static str,
    pub comm: CommGraph,
    pub conflict: ConflictGraph,
}

/// Draws every graph of a dataset. Graph `i` (train first, then test) uses
/// `N ~ U{n_min..=n_max}` from the dataset stream and its own derived seed.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<Vec<GeneratedGraph>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let splits = std::iter::repeat_n("train", spec.count_train).chain(std::iter::repeat_n("test", spec.count_test));
    let mut out = Vec::new();
    let mut index_in_split = [0usize; 2];
    for (i, split) in splits.enumerate() {
        let n = rng.random_range(spec.n_min..=spec.n_max);
        let slot = &mut index_in_split[(split == "test") as usize];
        let id = format!("{split}_{:03}", *slot);
        *slot += 1;
        let seed = derive_seed(spec.seed, 1000 + i as u64);
        let comm = generate_comm_graph(n, spec.radius_factor, seed)?;
        let conflict = line_graph(&comm).map_err(|e| Error::InvalidGraph(format!("{id}: {e}")))?;
        out.push(GeneratedGraph {
            id,
            split,
            comm,
            conflict,
        });
    }
    Ok(out)
}

fn entry(g: &GeneratedGraph) -> GraphEntry {
    let stats = graph_stats(&g.conflict);
    let suffix = &g.id[g.split.len() + 1..];
    GraphEntry {
        id: g.id.clone(),
        split: g.split.to_string(),
        seed: g.comm.seed,
        n_nodes: g.comm.n_nodes,
        n_comm_edges: g.comm.edges.len(),
        n_links: stats.n_links,
        comm_mean_degree: g.comm.mean_degree(),
        conflict_mean_degree: stats.mean_degree,
        greedy_mis_size: crate::baselines::greedy_mis(&g.conflict).len(),
        comm_file: format!("{}/comm_{suffix}.json", g.split),
        conflict_file: format!("{}/conflict_{suffix}.json", g.split),
    }
}

fn summarize(entries: &[GraphEntry]) -> ManifestSummary {
    let n = entries.len() as f64;
    let mean = |f: fn(&GraphEntry) -> f64| entries.iter().map(f).sum::<f64>() / n;
    ManifestSummary {
        n_graphs: entries.len(),
        mean_n_links: mean(|e| e.n_links as f64),
        mean_comm_degree: mean(|e| e.comm_mean_degree),
        mean_conflict_degree: mean(|e| e.conflict_mean_degree),
        mean_mis_fraction: mean(|e| e.greedy_mis_size as f64 / e.n_links as f64),
    }
}

/// Generates the dataset described by `spec` and writes it under `out_dir`.
pub fn cmd_gen_data(spec: &DatasetSpec, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    let graphs = generate_dataset(spec)?;
    for split in ["train", "test"] {
        let d = out_dir.join(split);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let mut entries = Vec::with_capacity(graphs.len());
    for g in &graphs {
        let e = entry(g);
        save_comm_graph(out_dir.join(&e.comm_file), &g.comm)?;
        save_conflict_graph(out_dir.join(&e.conflict_file), &g.conflict)?;
        entries.push(e);
    }
    let manifest = Manifest {
        spec: spec.clone(),
        summary: summarize(&entries),
        graphs: entries,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Conflict graphs of one split, in manifest order.
pub fn load_split(dir: impl AsRef<Path>, split: &str) -> Result<Vec<(String, ConflictGraph)>> {
    let dir = dir.as_ref();
    let manifest = Manifest::load(dir)?;
    let graphs: Vec<_> = manifest
        .graphs
        .iter()
        .filter(|e| e.split == split)
        .map(|e| Ok((e.id.clone(), load_conflict_graph(dir.join(&e.conflict_file))?)))
        .collect::<Result<_>>()?;
    if graphs.is_empty() {
        return Err(Error::MissingInput(format!("no {split} graphs in {}", dir.display())));
    }
    Ok(graphs)
}
