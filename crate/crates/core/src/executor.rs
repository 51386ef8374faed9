//! Online execution: the policy schedules links from the current dual
//! variables, and the duals are updated after every step from the observed
//! successes.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::ConflictGraph;
use crate::metrics::MetricsRecord;
use crate::policy::{threshold, NormStats, Normalized, PolicyParameters, SchedulingPolicy};
use crate::schedule::{lagrangian_from_successes, successes_raw, Requirements, Schedule};

/// Which success signal drives the dual update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DualSignal {
    /// Successes of the thresholded (actually transmitted) schedule.
    #[default]
    Binary,
    /// Successes of the continuous policy output.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecConfig {
    #[serde(rename = "T")]
    pub steps: usize,
    pub eta_dual: f64,
    /// Slack `r`: the dual update targets `Δ − r`.
    pub resilience: f64,
    pub dual_signal: DualSignal,
    /// Normalization statistics a trained network uses during execution.
    pub norm_stats: NormStats,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self {
            steps: 200,
            eta_dual: 2.0,
            resilience: 0.05,
            dual_signal: DualSignal::Binary,
            norm_stats: NormStats::default(),
        }
    }
}

impl ExecConfig {
    pub fn validate(&self, req: &Requirements) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Config("exec.T must be >= 1".into()));
        }
        if !(self.eta_dual >= 0.0 && self.eta_dual.is_finite()) {
            return Err(Error::Config(format!("exec.eta_dual must be >= 0, got {}", self.eta_dual)));
        }
        if !(self.resilience >= 0.0) {
            return Err(Error::Config(format!("exec.resilience must be >= 0, got {}", self.resilience)));
        }
        if self.resilience > 0.0 && !req.is_empty() && self.resilience >= req.min() {
            return Err(Error::Config(format!(
                "resilience {} must be below the smallest requirement {}",
                self.resilience,
                req.min()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub eta: f64,
}

impl DualState {
    pub fn zeros(k: usize, eta: f64) -> Self {
        Self {
            lambda: vec![0.0; k],
            eta,
        }
    }
}

/// `λ' = [λ − η (success − (Δ − r))]_+`.
pub fn dual_update(state: &DualState, success: &[f64], req: &Requirements, r: f64) -> Result<DualState> {
    check_len(state.lambda.len(), success.len())?;
    check_len(state.lambda.len(), req.len())?;
    let lambda = state
        .lambda
        .iter()
        .zip(success)
        .zip(req.delta())
        .map(|((&l, &s), &d)| (l - state.eta * (s - (d - r))).max(0.0))
        .collect();
    Ok(DualState {
        lambda,
        eta: state.eta,
    })
}

#[derive(Debug, Clone)]
pub struct ExecTrace {
    pub schedules: Vec<Schedule>,
    /// `λ_0 … λ_T`.
    pub lambda_trajectory: Vec<Vec<f64>>,
    /// Per-step Lagrangian of the binary schedule at the current duals.
    pub lagrangian: Vec<f64>,
    pub metrics: MetricsRecord,
}

/// Rolls `policy` forward for `cfg.steps` steps starting from `λ_0 = 0`.
pub fn execute<P: SchedulingPolicy + ?Sized>(
    graph_id: &str,
    graph: &ConflictGraph,
    policy: &P,
    req: &Requirements,
    delta: f64,
    cfg: &ExecConfig,
) -> Result<ExecTrace> {
    let k = graph.n_links();
    check_len(k, req.len())?;
    cfg.validate(req)?;
    let mut state = DualState::zeros(k, cfg.eta_dual);
    let mut schedules = Vec::with_capacity(cfg.steps);
    let mut lambda_trajectory = Vec::with_capacity(cfg.steps + 1);
    let mut lagrangian = Vec::with_capacity(cfg.steps);
    lambda_trajectory.push(state.lambda.clone());
    for _ in 0..cfg.steps {
        let outputs = policy.decide(graph, &state.lambda)?;
        check_len(k, outputs.len())?;
        let s = threshold(&outputs);
        let binary_success = successes_raw(graph, s.values());
        lagrangian.push(lagrangian_from_successes(&binary_success, &state.lambda, req.delta()));
        let signal = match cfg.dual_signal {
            DualSignal::Binary => binary_success,
            DualSignal::Relaxed => successes_raw(graph, &outputs),
        };
        state = dual_update(&state, &signal, req, cfg.resilience)?;
        schedules.push(s);
        lambda_trajectory.push(state.lambda.clone());
    }
    let metrics = MetricsRecord::from_schedules(graph_id, graph, &schedules, req, delta)?;
    Ok(ExecTrace {
        schedules,
        lambda_trajectory,
        lagrangian,
        metrics,
    })
}

/// Executes a trained network, normalizing with `cfg.norm_stats`.
pub fn execute_network(
    graph_id: &str,
    graph: &ConflictGraph,
    params: &PolicyParameters,
    req: &Requirements,
    delta: f64,
    cfg: &ExecConfig,
) -> Result<ExecTrace> {
    let policy = Normalized {
        params,
        stats: cfg.norm_stats,
    };
    execute(graph_id, graph, &policy, req, delta, cfg)
}

/// Exact per-step Lagrangian maximizer by enumeration of all binary
/// schedules; ties go to the lowest bitmask (link 0 first).
#[derive(Debug, Clone, Copy, Default)]
pub struct LagrangianMaximizer;

pub const MAX_ENUMERATED_LINKS: usize = 20;

impl SchedulingPolicy for LagrangianMaximizer {
    fn decide(&self, graph: &ConflictGraph, lambda: &[f64]) -> Result<Vec<f64>> {
        let k = graph.n_links();
        check_len(k, lambda.len())?;
        if k > MAX_ENUMERATED_LINKS {
            return Err(Error::InvalidArgument(format!(
                "exact maximizer supports at most {MAX_ENUMERATED_LINKS} links, got {k}"
            )));
        }
        let mut best = (f64::NEG_INFINITY, 0u32);
        let mut s = vec![0.0; k];
        for mask in 0u32..(1 << k) {
            for (i, v) in s.iter_mut().enumerate() {
                *v = f64::from((mask >> i) & 1);
            }
            // Δ only shifts the value by a constant.
            let value: f64 = successes_raw(graph, &s)
                .iter()
                .zip(lambda)
                .map(|(x, l)| (1.0 + l) * x)
                .sum();
            if value > best.0 {
                best = (value, mask);
            }
        }
        Ok((0..k).map(|i| f64::from((best.1 >> i) & 1)).collect())
    }
}
