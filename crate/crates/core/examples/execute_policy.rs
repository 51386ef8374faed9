//! Closed-loop execution: the policy reacts to dual variables that grow for
//! links falling short of their requirement.
//!
//! Uses `target/example-out/policy.json` when present (see `train_policy`),
//! otherwise the exact per-step maximizer on a small graph.

use sagnn::executor::{execute, execute_network, ExecConfig, LagrangianMaximizer};
use sagnn::graph::{generate_comm_graph, line_graph, ConflictGraph};
use sagnn::policy::load_params;
use sagnn::schedule::Requirements;

fn main() -> sagnn::Result<()> {
    let cfg = ExecConfig {
        resilience: 0.0,
        ..ExecConfig::default()
    };

    let toy = ConflictGraph::from_edges(2, [(0, 1)], 0)?;
    let req = Requirements::uniform(2, 0.4)?;
    let trace = execute("toy", &toy, &LagrangianMaximizer, &req, 0.4, &cfg)?;
    println!("two conflicting links, delta 0.4:");
    for t in 0..6 {
        println!("  t={t}  lambda {:?}  schedule {:?}", trace.lambda_trajectory[t], trace.schedules[t].values());
    }
    println!("  time-averaged success {:?}", trace.metrics.avg_success);

    let graph = line_graph(&generate_comm_graph(12, 1.2, 3)?)?;
    let req = Requirements::uniform(graph.n_links(), 0.2)?;
    let path = "target/example-out/policy.json";
    let trace = if std::path::Path::new(path).exists() {
        println!("trained policy on {} links:", graph.n_links());
        execute_network("g", &graph, &load_params(path)?, &req, 0.2, &cfg)?
    } else {
        println!("exact maximizer on {} links:", graph.n_links());
        execute("g", &graph, &LagrangianMaximizer, &req, 0.2, &cfg)?
    };
    let m = &trace.metrics;
    println!(
        "  objective fraction {:.3}, mean violation {:.3}, {} violating links",
        m.objective_fraction,
        m.mean_violation,
        m.violation_fractions.len()
    );
    Ok(())
}
