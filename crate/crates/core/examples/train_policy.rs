//! Trains a narrow policy on a few small graphs and saves the checkpoint.
//!
//! `cargo run --release --example train_policy [epochs]`

use sagnn::graph::{generate_comm_graph, line_graph};
use sagnn::policy::{save_params, ArchConfig};
use sagnn::trainer::{train_with, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let graphs = (0..3)
        .map(|i| line_graph(&generate_comm_graph(40 + 10 * i, 1.2, i as u64)?))
        .collect::<sagnn::Result<Vec<_>>>()?;

    let arch = ArchConfig {
        features: 32,
        ..ArchConfig::default()
    };
    let cfg = TrainConfig {
        epochs,
        primal_lr: 1e-3,
        ..TrainConfig::default()
    };
    let (params, log) = train_with(&graphs, &cfg, &arch, None, |rec, _| {
        println!("epoch {:3}  mean lagrangian {:.3}", rec.epoch, rec.mean_lagrangian);
        Ok(())
    })?;
    let path = "target/example-out/policy.json";
    std::fs::create_dir_all("target/example-out")?;
    save_params(path, &params)?;
    println!("{} updates, {} parameters -> {path}", log.total_updates(), params.n_learnable());
    Ok(())
}
