//! Scheduling semantics over a conflict graph: success vectors, the
//! throughput objective, the per-step Lagrangian and violation levels.
//!
//! All operations accept relaxed schedules with entries in `[0, 1]`; for
//! binary schedules the formulas reduce to counting links that transmit while
//! none of their conflicting neighbors do.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::ConflictGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    Binary,
    Relaxed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    values: Vec<f64>,
    mode: ScheduleMode,
}

impl Schedule {
    pub fn binary(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidArgument(format!("binary schedule entry {v} not in {{0, 1}}")));
        }
        Ok(Self {
            values,
            mode: ScheduleMode::Binary,
        })
    }

    pub fn from_bools(on: impl IntoIterator<Item = bool>) -> Self {
        Self {
            values: on.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect(),
            mode: ScheduleMode::Binary,
        }
    }

    pub fn relaxed(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidArgument(format!("relaxed schedule entry {v} not in [0, 1]")));
        }
        Ok(Self {
            values,
            mode: ScheduleMode::Relaxed,
        })
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            values: vec![0.0; k],
            mode: ScheduleMode::Binary,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_on(&self, link: usize) -> bool {
        self.values[link] >= 0.5
    }

    /// Number of scheduled links (sum of entries).
    pub fn count(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Per-link minimum transmission requirement Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct Requirements {
    delta: Vec<f64>,
}

impl Requirements {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if let Some(d) = delta.iter().find(|&&d| !(d >= 0.0 && d.is_finite())) {
            return Err(Error::InvalidArgument(format!("requirement {d} must be finite and >= 0")));
        }
        Ok(Self { delta })
    }

    pub fn uniform(k: usize, delta: f64) -> Result<Self> {
        Self::new(vec![delta; k])
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.delta.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `[1 − A·s]_+` for raw values.
pub(crate) fn success_indicator_raw(graph: &ConflictGraph, s: &[f64]) -> Vec<f64> {
    (0..graph.n_links())
        .map(|i| {
            let load: f64 = graph.neighbors(i).iter().map(|&j| s[j]).sum();
            (1.0 - load).max(0.0)
        })
        .collect()
}

/// `s ⊙ [1 − A·s]_+` for raw values.
pub(crate) fn successes_raw(graph: &ConflictGraph, s: &[f64]) -> Vec<f64> {
    success_indicator_raw(graph, s)
        .into_iter()
        .zip(s)
        .map(|(g, &v)| v * g)
        .collect()
}

pub fn success_indicator(graph: &ConflictGraph, s: &Schedule) -> Result<Vec<f64>> {
    check_len(graph.n_links(), s.len())?;
    Ok(success_indicator_raw(graph, s.values()))
}

pub fn successful_transmissions(graph: &ConflictGraph, s: &Schedule) -> Result<Vec<f64>> {
    check_len(graph.n_links(), s.len())?;
    Ok(successes_raw(graph, s.values()))
}

/// `sᵀ [1 − A·s]_+`.
pub fn objective(graph: &ConflictGraph, s: &Schedule) -> Result<f64> {
    Ok(successful_transmissions(graph, s)?.iter().sum())
}

/// Time average of the success vectors of a schedule sequence.
pub fn time_avg_success(graph: &ConflictGraph, schedules: &[Schedule]) -> Result<Vec<f64>> {
    if schedules.is_empty() {
        return Err(Error::InvalidArgument("empty schedule list".into()));
    }
    let mut acc = vec![0.0; graph.n_links()];
    for s in schedules {
        for (a, x) in acc.iter_mut().zip(successful_transmissions(graph, s)?) {
            *a += x;
        }
    }
    let t = schedules.len() as f64;
    acc.iter_mut().for_each(|a| *a /= t);
    Ok(acc)
}

/// `sᵀ[1−As]_+ + λᵀ(s ⊙ [1−As]_+ − Δ)`.
pub fn per_step_lagrangian(
    graph: &ConflictGraph,
    s: &Schedule,
    lambda: &[f64],
    req: &Requirements,
) -> Result<f64> {
    let k = graph.n_links();
    check_len(k, lambda.len())?;
    check_len(k, req.len())?;
    if let Some(l) = lambda.iter().find(|&&l| !(l >= 0.0)) {
        return Err(Error::InvalidArgument(format!("dual variable {l} is negative")));
    }
    let succ = successful_transmissions(graph, s)?;
    Ok(lagrangian_from_successes(&succ, lambda, req.delta()))
}

pub(crate) fn lagrangian_from_successes(succ: &[f64], lambda: &[f64], delta: &[f64]) -> f64 {
    let obj: f64 = succ.iter().sum();
    let penalty: f64 = succ
        .iter()
        .zip(lambda)
        .zip(delta)
        .map(|((x, l), d)| l * (x - d))
        .sum();
    obj + penalty
}

/// `(Δ − avg)/Δ` per link; links with `Δ_i = 0` report 0.
pub fn violation_level(avg_success: &[f64], req: &Requirements) -> Result<Vec<f64>> {
    check_len(req.len(), avg_success.len())?;
    Ok(avg_success
        .iter()
        .zip(req.delta())
        .map(|(&a, &d)| if d > 0.0 { (d - a) / d } else { 0.0 })
        .collect())
}
