//! Success, objective, Lagrangian and violation on a four-link path.

use sagnn::graph::ConflictGraph;
use sagnn::schedule::{
    objective, per_step_lagrangian, success_indicator, time_avg_success, violation_level, Requirements, Schedule,
};

fn main() -> sagnn::Result<()> {
    // 0 - 1 - 2 - 3
    let g = ConflictGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)], 0)?;

    let s = Schedule::from_bools([true, false, true, true]);
    println!("schedule   {:?}", s.values());
    println!("successes  {:?}", success_indicator(&g, &s)?);
    println!("objective  {}", objective(&g, &s)?);

    let lambda = [0.5, 1.0, 0.0, 2.0];
    let req = Requirements::uniform(4, 0.25)?;
    println!("lagrangian {}", per_step_lagrangian(&g, &s, &lambda, &req)?);

    // Alternate the two independent sets {0, 2} and {1, 3}, except that link 3
    // never transmits.
    let schedules: Vec<Schedule> = (0..8)
        .map(|t| {
            if t % 2 == 0 {
                Schedule::from_bools([true, false, true, false])
            } else {
                Schedule::from_bools([false, true, false, false])
            }
        })
        .collect();
    let avg = time_avg_success(&g, &schedules)?;
    println!("avg success {avg:?}");
    for (i, v) in violation_level(&avg, &req)?.iter().enumerate() {
        println!("link {i}: violation level {v:.2}");
    }
    Ok(())
}
