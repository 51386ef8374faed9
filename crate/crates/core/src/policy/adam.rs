use super::params::{ParamGrads, PolicyParameters};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascent,
    Descent,
}

/// Adam moment estimates, one buffer per learnable group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &PolicyParameters) -> Self {
        let mut p = params.clone();
        let shapes: Vec<usize> = p.learnable_mut().iter().map(|g| g.len()).collect();
        Self {
            first_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    params: &mut PolicyParameters,
    grads: &ParamGrads,
    state: &mut AdamState,
    lr: f64,
    direction: Direction,
) -> Result<()> {
    if !grads.all_finite() {
        return Err(Error::NonFinite("gradients".into()));
    }
    let groups = grads.groups();
    let mut targets = params.learnable_mut();
    if groups.len() != targets.len() || groups.len() != state.first_moment.len() {
        return Err(Error::ArchMismatch("gradient groups do not match parameters".into()));
    }
    for ((g, p), m) in groups.iter().zip(&targets).zip(&state.first_moment) {
        if g.len() != p.len() || g.len() != m.len() {
            return Err(Error::ArchMismatch("gradient shape does not match parameters".into()));
        }
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let bc1 = 1.0 - b1.powi(t);
    let bc2 = 1.0 - b2.powi(t);
    let sign = match direction {
        Direction::Ascent => 1.0,
        Direction::Descent => -1.0,
    };
    for (gi, target) in targets.iter_mut().enumerate() {
        let g = groups[gi];
        let m = &mut state.first_moment[gi];
        let v = &mut state.second_moment[gi];
        for j in 0..g.len() {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            target[j] += sign * lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}
