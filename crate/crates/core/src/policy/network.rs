//! Forward and reverse-mode passes of the graph-convolutional policy.
//!
//! Layer `l` computes `y = Σ_k S^k x W_k` (a polynomial filter in the shift
//! operator `S`), normalizes each feature over the link dimension, applies
//! `γ·ŷ + β` and a leaky rectifier. A per-link linear map and sigmoid produce
//! transmission probabilities.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};

use super::params::{LayerGrads, ParamGrads, PolicyParameters};
use crate::error::{check_len, Error, Result};
use crate::graph::{ConflictGraph, ShiftOperator};
use crate::schedule::{Requirements, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Normalize with statistics of the current graph.
    Train,
    /// Normalize with running statistics.
    Eval,
}

/// Sparse row-compressed shift operator.
#[derive(Debug, Clone)]
pub struct ShiftMatrix {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl ShiftMatrix {
    pub fn new(graph: &ConflictGraph, op: ShiftOperator) -> Self {
        let scale = match op {
            ShiftOperator::Adjacency => vec![1.0; graph.n_links()],
            ShiftOperator::SymmetricNormalized => graph.inv_sqrt_degrees(),
        };
        let mut indptr = Vec::with_capacity(graph.n_links() + 1);
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        indptr.push(0);
        for i in 0..graph.n_links() {
            for &j in graph.neighbors(i) {
                indices.push(j);
                weights.push(scale[i] * scale[j]);
            }
            indptr.push(indices.len());
        }
        Self {
            indptr,
            indices,
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.indptr.len() - 1
    }

    /// `S · x` for a signal matrix with one row per link.
    pub fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(x.raw_dim());
        for i in 0..self.n() {
            let mut row = out.row_mut(i);
            for p in self.indptr[i]..self.indptr[i + 1] {
                row.scaled_add(self.weights[p], &x.row(self.indices[p]));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct LayerCache {
    /// `[x, Sx, …, S^order x]` stacked along features.
    stacked: Array2<f64>,
    normalized: Array2<f64>,
    inv_std: Array1<f64>,
    pre_activation: Array2<f64>,
    batch_stats: bool,
    batch_mean: Array1<f64>,
    batch_var: Array1<f64>,
}

/// Intermediates of a forward pass, consumed by [`backward`] and by the
/// running-statistics update.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    shift: ShiftMatrix,
    layers: Vec<LayerCache>,
    last_hidden: Array2<f64>,
    outputs: Array1<f64>,
}

impl ForwardCache {
    pub fn outputs(&self) -> &Array1<f64> {
        &self.outputs
    }
}

fn leaky(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_lambda(k: usize, lambda: &[f64]) -> Result<()> {
    check_len(k, lambda.len())?;
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite("dual variables".into()));
    }
    if let Some(l) = lambda.iter().find(|&&l| l < 0.0) {
        return Err(Error::InvalidArgument(format!("dual variable {l} is negative")));
    }
    Ok(())
}

/// Runs the policy on `graph` with the dual variables as the input signal.
pub fn forward(
    graph: &ConflictGraph,
    lambda: &[f64],
    params: &PolicyParameters,
    phase: Phase,
) -> Result<(Vec<f64>, ForwardCache)> {
    check_lambda(graph.n_links(), lambda)?;
    if !params.all_finite() {
        return Err(Error::NonFinite("policy parameters".into()));
    }
    let cfg = &params.config;
    let k = graph.n_links();
    let shift = ShiftMatrix::new(graph, cfg.operator);
    // A single link has no spread to normalize over.
    let batch_stats = phase == Phase::Train && k >= 2;

    let mut x = Array2::from_shape_vec((k, 1), lambda.to_vec()).expect("k x 1");
    let mut layers = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let (taps, fin, fout) = layer.taps.dim();
        let mut powers = Vec::with_capacity(taps);
        powers.push(x);
        for p in 1..taps {
            let next = shift.apply(powers[p - 1].view());
            powers.push(next);
        }
        let views: Vec<_> = powers.iter().map(|p| p.view()).collect();
        let stacked = concatenate(Axis(1), &views).expect("equal rows");
        let w = layer
            .taps
            .view()
            .into_shape_with_order((taps * fin, fout))
            .expect("contiguous taps");
        let y = stacked.dot(&w);

        let batch_mean = y.mean_axis(Axis(0)).expect("k >= 1");
        let batch_var = (&y - &batch_mean).mapv(|d| d * d).mean_axis(Axis(0)).expect("k >= 1");
        let (mean, var) = if batch_stats {
            (&batch_mean, &batch_var)
        } else {
            (&layer.running_mean, &layer.running_var)
        };
        let inv_std = var.mapv(|v| 1.0 / (v + cfg.norm_epsilon).sqrt());
        let normalized = (&y - mean) * &inv_std;
        let pre_activation = &normalized * &layer.gamma + &layer.beta;
        x = pre_activation.mapv(|v| leaky(v, cfg.leaky_slope));

        layers.push(LayerCache {
            stacked,
            normalized,
            inv_std,
            pre_activation,
            batch_stats,
            batch_mean,
            batch_var,
        });
    }
    let logits = x.dot(&params.output_weight) + params.output_bias;
    let outputs = logits.mapv(sigmoid);
    let out_vec = outputs.to_vec();
    Ok((
        out_vec,
        ForwardCache {
            shift,
            layers,
            last_hidden: x,
            outputs,
        },
    ))
}

/// Reverse-mode gradient of a scalar loss with respect to all learnable
/// parameters, given `∂loss/∂outputs`.
pub fn backward(params: &PolicyParameters, cache: &ForwardCache, d_outputs: &[f64]) -> Result<ParamGrads> {
    check_len(cache.outputs.len(), d_outputs.len())?;
    let cfg = &params.config;
    let phi = &cache.outputs;
    let d_logits: Array1<f64> = phi
        .iter()
        .zip(d_outputs)
        .map(|(&p, &d)| d * p * (1.0 - p))
        .collect();

    let mut grads = ParamGrads::zeros_like(params);
    grads.output_weight = cache.last_hidden.t().dot(&d_logits);
    grads.output_bias = d_logits.sum();

    // d(hidden) = d_logits ⊗ w
    let mut dx = d_logits
        .view()
        .insert_axis(Axis(1))
        .dot(&params.output_weight.view().insert_axis(Axis(0)));

    for (l, (layer, lc)) in params.layers.iter().zip(&cache.layers).enumerate().rev() {
        let (taps, fin, fout) = layer.taps.dim();
        let slope = cfg.leaky_slope;
        let mut dn = dx;
        dn.zip_mut_with(&lc.pre_activation, |d, &z| {
            if z <= 0.0 {
                *d *= slope
            }
        });
        let d_gamma = (&dn * &lc.normalized).sum_axis(Axis(0));
        let d_beta = dn.sum_axis(Axis(0));
        let d_norm = &dn * &layer.gamma;
        let dy = if lc.batch_stats {
            let mean_d = d_norm.mean_axis(Axis(0)).expect("k >= 1");
            let mean_dn = (&d_norm * &lc.normalized).mean_axis(Axis(0)).expect("k >= 1");
            (&d_norm - &mean_d - &(&lc.normalized * &mean_dn)) * &lc.inv_std
        } else {
            &d_norm * &lc.inv_std
        };
        let d_w = lc.stacked.t().dot(&dy);
        grads.layers[l] = LayerGrads {
            taps: d_w.into_shape_with_order((taps, fin, fout)).expect("taps shape"),
            gamma: d_gamma,
            beta: d_beta,
        };
        if l == 0 {
            break;
        }
        let w = layer
            .taps
            .view()
            .into_shape_with_order((taps * fin, fout))
            .expect("contiguous taps");
        let d_stacked = dy.dot(&w.t());
        // S is symmetric, so Σ_k (Sᵀ)^k d_k folds by Horner's rule.
        let mut acc = d_stacked.slice(s![.., (taps - 1) * fin..]).to_owned();
        for p in (0..taps - 1).rev() {
            acc = cache.shift.apply(acc.view());
            acc += &d_stacked.slice(s![.., p * fin..(p + 1) * fin]);
        }
        dx = acc;
    }
    Ok(grads)
}

/// Folds the batch statistics of a train-phase pass into the running
/// statistics (`momentum`-weighted, unbiased variance).
pub fn update_running_stats(params: &mut PolicyParameters, cache: &ForwardCache) {
    let m = params.config.norm_momentum;
    let k = cache.outputs.len() as f64;
    for (layer, lc) in params.layers.iter_mut().zip(&cache.layers) {
        if !lc.batch_stats {
            continue;
        }
        let unbiased = &lc.batch_var * (k / (k - 1.0));
        layer.running_mean.zip_mut_with(&lc.batch_mean, |r, &b| *r = (1.0 - m) * *r + m * b);
        layer.running_var.zip_mut_with(&unbiased, |r, &b| *r = (1.0 - m) * *r + m * b);
    }
}

/// Value of `Φᵀ[1−AΦ]_+ + λᵀ(Φ ⊙ [1−AΦ]_+ − Δ)` and its gradient with
/// respect to `Φ`. The ramp uses subgradient 0 at its kink.
pub fn lagrangian_and_output_grad(
    graph: &ConflictGraph,
    phi: &[f64],
    lambda: &[f64],
    delta: &[f64],
) -> (f64, Vec<f64>) {
    let k = graph.n_links();
    let mut slack = vec![0.0; k];
    let mut value = 0.0;
    for i in 0..k {
        let u = 1.0 - graph.neighbors(i).iter().map(|&j| phi[j]).sum::<f64>();
        slack[i] = u;
        let g = u.max(0.0);
        value += (1.0 + lambda[i]) * phi[i] * g - lambda[i] * delta[i];
    }
    let mut grad = vec![0.0; k];
    for i in 0..k {
        let mut d = (1.0 + lambda[i]) * slack[i].max(0.0);
        for &j in graph.neighbors(i) {
            if slack[j] > 0.0 {
                d -= (1.0 + lambda[j]) * phi[j];
            }
        }
        grad[i] = d;
    }
    (value, grad)
}

/// Train-phase augmented Lagrangian and its exact gradient. Also returns the
/// forward cache so callers can update running statistics.
pub fn lagrangian_value_and_grad(
    graph: &ConflictGraph,
    lambda: &[f64],
    req: &Requirements,
    params: &PolicyParameters,
) -> Result<(f64, ParamGrads, ForwardCache)> {
    check_len(graph.n_links(), req.len())?;
    let (phi, cache) = forward(graph, lambda, params, Phase::Train)?;
    let (value, d_phi) = lagrangian_and_output_grad(graph, &phi, lambda, req.delta());
    let grads = backward(params, &cache, &d_phi)?;
    Ok((value, grads, cache))
}

/// Maps probabilities to a binary schedule; exactly 0.5 schedules the link.
pub fn threshold(outputs: &[f64]) -> Schedule {
    Schedule::from_bools(outputs.iter().map(|&p| p >= 0.5))
}
