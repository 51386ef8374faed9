//! The state-augmented scheduling policy: a graph-convolutional network that
//! maps dual variables to per-link transmission probabilities.

mod adam;
mod io;
mod network;
mod params;

pub use adam::{adam_step, AdamState, Direction};
pub use io::{check_arch, load_params, load_params_expecting, params_from_json, params_to_json, save_params};
pub use network::{
    backward, forward, lagrangian_and_output_grad, lagrangian_value_and_grad, threshold,
    update_running_stats, ForwardCache, Phase, ShiftMatrix,
};
pub use params::{group_names, ArchConfig, LayerGrads, LayerParams, ParamGrads, PolicyParameters};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::ConflictGraph;

/// Normalization statistics used by a network at decision time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormStats {
    /// Running statistics accumulated during training.
    Running,
    /// Statistics of the current graph's nodes, as in training.
    #[default]
    Batch,
}

/// Anything that maps dual variables on a graph to transmission
/// probabilities in `[0, 1]`.
pub trait SchedulingPolicy: Sync {
    fn decide(&self, graph: &ConflictGraph, lambda: &[f64]) -> Result<Vec<f64>>;
}

impl SchedulingPolicy for PolicyParameters {
    fn decide(&self, graph: &ConflictGraph, lambda: &[f64]) -> Result<Vec<f64>> {
        forward(graph, lambda, self, Phase::Eval).map(|(out, _)| out)
    }
}

/// A network that normalizes with the chosen statistics.
#[derive(Debug, Clone, Copy)]
pub struct Normalized<'a> {
    pub params: &'a PolicyParameters,
    pub stats: NormStats,
}

impl SchedulingPolicy for Normalized<'_> {
    fn decide(&self, graph: &ConflictGraph, lambda: &[f64]) -> Result<Vec<f64>> {
        let phase = match self.stats {
            NormStats::Running => Phase::Eval,
            NormStats::Batch => Phase::Train,
        };
        forward(graph, lambda, self.params, phase).map(|(out, _)| out)
    }
}
