//! Generates a small train/test dataset and prints per-graph statistics.
//!
//! `cargo run --example generate_dataset [out_dir]`

use sagnn::graph::{generate_comm_graph, graph_stats, line_graph};
use sagnn::harness::{cmd_gen_data, DatasetSpec};

fn main() -> sagnn::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/example-out/dataset".into());

    let comm = generate_comm_graph(9, 1.2, 7)?;
    let conflict = line_graph(&comm)?;
    println!("9 agents: {} links, edges {:?}", conflict.n_links(), comm.edges);

    let spec = DatasetSpec {
        count_train: 3,
        count_test: 5,
        n_min: 60,
        n_max: 100,
        ..DatasetSpec::default()
    };
    let manifest = cmd_gen_data(&spec, &out)?;
    for e in &manifest.graphs {
        println!(
            "{}  N={:3}  K={:3}  comm degree {:.2}  conflict degree {:.2}  greedy MIS {}",
            e.id, e.n_nodes, e.n_links, e.comm_mean_degree, e.conflict_mean_degree, e.greedy_mis_size
        );
    }
    let s = &manifest.summary;
    println!(
        "mean K {:.1}, mean MIS fraction {:.3}, written to {out}",
        s.mean_n_links, s.mean_mis_fraction
    );

    let stats = graph_stats(&conflict);
    println!("degree histogram of the 9-agent conflict graph: {:?}", stats.degree_histogram);
    Ok(())
}
