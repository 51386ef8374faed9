//! Aggregate metrics of a schedule sequence, shared by the executor, the
//! baselines and the experiment harness.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::graph::ConflictGraph;
use crate::schedule::{successes_raw, time_avg_success, violation_level, Requirements, Schedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub graph_id: String,
    pub delta: f64,
    pub n_links: usize,
    /// Mean over links of the time-averaged success rate.
    pub avg_success_fraction: f64,
    /// Time-averaged successful transmissions per step divided by K.
    pub objective_fraction: f64,
    /// Mean scheduled links per step.
    pub total_transmissions: f64,
    /// Mean successful links per step.
    pub successful_transmissions: f64,
    /// `(link, violation level)` for every link with level > 0.
    pub violation_fractions: Vec<(usize, f64)>,
    /// Mean over all links of `max(violation level, 0)`.
    pub mean_violation: f64,
    /// Per-link time-averaged success.
    pub avg_success: Vec<f64>,
}

impl MetricsRecord {
    /// Computes metrics from binary schedules.
    pub fn from_schedules(
        graph_id: impl Into<String>,
        graph: &ConflictGraph,
        schedules: &[Schedule],
        req: &Requirements,
        delta: f64,
    ) -> Result<Self> {
        let k = graph.n_links();
        check_len(k, req.len())?;
        let avg_success = time_avg_success(graph, schedules)?;
        let t = schedules.len() as f64;
        // Both per-step means come from integer counts so that
        // successful <= total holds exactly.
        let total_transmissions = schedules.iter().map(Schedule::count).sum::<f64>() / t;
        let successful_transmissions = schedules
            .iter()
            .map(|s| successes_raw(graph, s.values()).iter().sum::<f64>())
            .sum::<f64>()
            / t;
        let levels = violation_level(&avg_success, req)?;
        let violation_fractions: Vec<(usize, f64)> = levels
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        let mean_violation = levels.iter().map(|v| v.max(0.0)).sum::<f64>() / k as f64;
        let avg_success_fraction = avg_success.iter().sum::<f64>() / k as f64;
        Ok(Self {
            graph_id: graph_id.into(),
            delta,
            n_links: k,
            avg_success_fraction,
            objective_fraction: successful_transmissions / k as f64,
            total_transmissions,
            successful_transmissions,
            violation_fractions,
            mean_violation,
            avg_success,
        })
    }
}

/// Means over several per-graph records (one Δ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub delta: f64,
    pub n_graphs: usize,
    pub objective_fraction: f64,
    pub mean_violation: f64,
    pub total_transmissions: f64,
    pub successful_transmissions: f64,
}

impl Aggregate {
    pub fn of(delta: f64, records: &[&MetricsRecord]) -> Self {
        let n = records.len().max(1) as f64;
        let mean = |f: fn(&MetricsRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / n;
        Self {
            delta,
            n_graphs: records.len(),
            objective_fraction: mean(|r| r.objective_fraction),
            mean_violation: mean(|r| r.mean_violation),
            total_transmissions: mean(|r| r.total_transmissions),
            successful_transmissions: mean(|r| r.successful_transmissions),
        }
    }

    /// Successful over total transmissions.
    pub fn efficiency(&self) -> f64 {
        if self.total_transmissions > 0.0 {
            self.successful_transmissions / self.total_transmissions
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_edge_metrics() {
        let g = ConflictGraph::from_edges(2, [(0, 1)], 0).unwrap();
        let s = [
            Schedule::from_bools([true, false]),
            Schedule::from_bools([true, true]),
            Schedule::from_bools([false, true]),
            Schedule::from_bools([false, false]),
        ];
        let req = Requirements::uniform(2, 0.5).unwrap();
        let m = MetricsRecord::from_schedules("g", &g, &s, &req, 0.5).unwrap();
        assert_eq!(m.avg_success, vec![0.25, 0.25]);
        assert_eq!(m.total_transmissions, 1.0);
        assert_eq!(m.successful_transmissions, 0.5);
        assert_eq!(m.objective_fraction, 0.25);
        assert_eq!(m.violation_fractions, vec![(0, 0.5), (1, 0.5)]);
        assert_eq!(m.mean_violation, 0.5);
        let agg = Aggregate::of(0.5, &[&m, &m]);
        assert_eq!(agg.efficiency(), 0.5);
    }
}
