//! The four heuristic baselines on one graph, against the exact MIS size.

use sagnn::baselines::{baseline_schedule, exact_mis, greedy_mis, BaselineConfig};
use sagnn::graph::{generate_comm_graph, line_graph};
use sagnn::metrics::MetricsRecord;
use sagnn::schedule::Requirements;

fn main() -> sagnn::Result<()> {
    let small = line_graph(&generate_comm_graph(16, 1.2, 4)?)?;
    println!(
        "{} links: greedy MIS {}, maximum independent set {}",
        small.n_links(),
        greedy_mis(&small).len(),
        exact_mis(&small)?.len()
    );

    let graph = line_graph(&generate_comm_graph(80, 1.2, 5)?)?;
    let req = Requirements::uniform(graph.n_links(), 0.1)?;
    println!("{} links, delta 0.1, T 200:", graph.n_links());
    for cfg in BaselineConfig::all_variants(200, 11) {
        let schedules = baseline_schedule(&graph, &cfg)?;
        let m = MetricsRecord::from_schedules("g", &graph, &schedules, &req, 0.1)?;
        println!(
            "  {:20} objective {:.4}  tx/step {:6.2}  successful/step {:6.2}  mean violation {:.3}",
            cfg.label(),
            m.objective_fraction,
            m.total_transmissions,
            m.successful_transmissions,
            m.mean_violation
        );
    }
    Ok(())
}
