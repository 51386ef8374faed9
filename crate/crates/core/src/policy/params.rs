use ndarray::{Array1, Array3};
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ShiftOperator;

/// Shape and fixed hyperparameters of the graph-convolutional policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchConfig {
    pub layers: usize,
    pub features: usize,
    /// Highest shift power in each filter; taps run over `0..=order`.
    pub order: usize,
    pub leaky_slope: f64,
    pub operator: ShiftOperator,
    pub norm_momentum: f64,
    pub norm_epsilon: f64,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            layers: 3,
            features: 256,
            order: 3,
            leaky_slope: 0.01,
            operator: ShiftOperator::SymmetricNormalized,
            norm_momentum: 0.1,
            norm_epsilon: 1e-5,
        }
    }
}

impl ArchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.layers < 1 {
            return bad("arch.layers must be >= 1".into());
        }
        if self.features < 1 {
            return bad("arch.features must be >= 1".into());
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return bad(format!("arch.leaky_slope must be in (0, 1), got {}", self.leaky_slope));
        }
        if !(self.norm_momentum > 0.0 && self.norm_momentum <= 1.0) {
            return bad(format!("arch.norm_momentum must be in (0, 1], got {}", self.norm_momentum));
        }
        if !(self.norm_epsilon > 0.0) {
            return bad(format!("arch.norm_epsilon must be > 0, got {}", self.norm_epsilon));
        }
        Ok(())
    }

    /// Input width of layer `l` (the first layer sees the scalar dual variable).
    pub fn in_features(&self, l: usize) -> usize {
        if l == 0 {
            1
        } else {
            self.features
        }
    }

    pub fn taps(&self) -> usize {
        self.order + 1
    }
}

/// One filter layer: taps of shape `(order + 1, in, out)` plus the per-feature
/// normalization affine map and running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub taps: Array3<f64>,
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl LayerParams {
    pub fn in_features(&self) -> usize {
        self.taps.dim().1
    }

    pub fn out_features(&self) -> usize {
        self.taps.dim().2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParameters {
    pub config: ArchConfig,
    pub layers: Vec<LayerParams>,
    pub output_weight: Array1<f64>,
    pub output_bias: f64,
}

impl PolicyParameters {
    /// Random initialization: taps ~ U(−b, b) with `b = 1/√(in·(order+1))`,
    /// γ = 1, β = 0, running statistics (0, 1); output weights ~ U(−1/√F, 1/√F).
    pub fn init(config: &ArchConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = config.features;
        let layers = (0..config.layers)
            .map(|l| {
                let fin = config.in_features(l);
                let bound = 1.0 / ((fin * config.taps()) as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
                LayerParams {
                    taps: Array3::from_shape_simple_fn((config.taps(), fin, f), || dist.sample(&mut rng)),
                    gamma: Array1::ones(f),
                    beta: Array1::zeros(f),
                    running_mean: Array1::zeros(f),
                    running_var: Array1::ones(f),
                }
            })
            .collect();
        let bound = 1.0 / (f as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        let output_weight = Array1::from_shape_simple_fn(f, || dist.sample(&mut rng));
        Ok(Self {
            config: config.clone(),
            layers,
            output_weight,
            output_bias: 0.0,
        })
    }

    /// All-zero network: every output equals `sigmoid(0) = 0.5`.
    pub fn zeros(config: &ArchConfig) -> Result<Self> {
        let mut p = Self::init(config, 0)?;
        for layer in &mut p.layers {
            layer.taps.fill(0.0);
            layer.gamma.fill(0.0);
        }
        p.output_weight.fill(0.0);
        Ok(p)
    }

    /// Checks layer count, shapes and finiteness against `config`.
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        c.validate()?;
        if self.layers.len() != c.layers {
            return Err(Error::ArchMismatch(format!(
                "{} layers stored, config says {}",
                self.layers.len(),
                c.layers
            )));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let want = (c.taps(), c.in_features(l), c.features);
            if layer.taps.dim() != want {
                return Err(Error::ArchMismatch(format!(
                    "layer {l} taps have shape {:?}, expected {want:?}",
                    layer.taps.dim()
                )));
            }
            for (name, v) in [
                ("gamma", &layer.gamma),
                ("beta", &layer.beta),
                ("running_mean", &layer.running_mean),
                ("running_var", &layer.running_var),
            ] {
                if v.len() != c.features {
                    return Err(Error::ArchMismatch(format!(
                        "layer {l} {name} has {} features, expected {}",
                        v.len(),
                        c.features
                    )));
                }
            }
            if layer.running_var.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidArgument(format!("layer {l} running_var is negative")));
            }
        }
        if self.output_weight.len() != c.features {
            return Err(Error::ArchMismatch(format!(
                "output map has {} weights, expected {}",
                self.output_weight.len(),
                c.features
            )));
        }
        if !self.all_finite() {
            return Err(Error::NonFinite("policy parameters".into()));
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.taps.iter().all(|v| v.is_finite())
                && l.gamma.iter().all(|v| v.is_finite())
                && l.beta.iter().all(|v| v.is_finite())
                && l.running_mean.iter().all(|v| v.is_finite())
                && l.running_var.iter().all(|v| v.is_finite())
        }) && self.output_weight.iter().all(|v| v.is_finite())
            && self.output_bias.is_finite()
    }

    /// Learnable arrays in canonical order: per layer (taps, γ, β), then the
    /// output weights and bias.
    pub fn learnable_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(3 * self.layers.len() + 2);
        for layer in &mut self.layers {
            out.push(layer.taps.as_slice_mut().expect("standard layout"));
            out.push(layer.gamma.as_slice_mut().expect("standard layout"));
            out.push(layer.beta.as_slice_mut().expect("standard layout"));
        }
        out.push(self.output_weight.as_slice_mut().expect("standard layout"));
        out.push(std::slice::from_mut(&mut self.output_bias));
        out
    }

    pub fn n_learnable(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.taps.len() + l.gamma.len() + l.beta.len())
            .sum::<usize>()
            + self.output_weight.len()
            + 1
    }
}

/// Gradient with respect to every learnable parameter, same layout as
/// [`PolicyParameters::learnable_mut`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub layers: Vec<LayerGrads>,
    pub output_weight: Array1<f64>,
    pub output_bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub taps: Array3<f64>,
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
}

impl ParamGrads {
    pub fn zeros_like(params: &PolicyParameters) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrads {
                    taps: Array3::zeros(l.taps.dim()),
                    gamma: Array1::zeros(l.gamma.len()),
                    beta: Array1::zeros(l.beta.len()),
                })
                .collect(),
            output_weight: Array1::zeros(params.output_weight.len()),
            output_bias: 0.0,
        }
    }

    pub fn groups(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(3 * self.layers.len() + 2);
        for layer in &self.layers {
            out.push(layer.taps.as_slice().expect("standard layout"));
            out.push(layer.gamma.as_slice().expect("standard layout"));
            out.push(layer.beta.as_slice().expect("standard layout"));
        }
        out.push(self.output_weight.as_slice().expect("standard layout"));
        out.push(std::slice::from_ref(&self.output_bias));
        out
    }

    pub fn all_finite(&self) -> bool {
        self.groups().iter().all(|g| g.iter().all(|v| v.is_finite()))
    }
}

/// Human-readable names for the learnable groups, aligned with
/// [`ParamGrads::groups`].
pub fn group_names(config: &ArchConfig) -> Vec<String> {
    let mut names = Vec::new();
    for l in 0..config.layers {
        names.push(format!("layer{l}.taps"));
        names.push(format!("layer{l}.gamma"));
        names.push(format!("layer{l}.beta"));
    }
    names.push("output.weight".into());
    names.push("output.bias".into());
    names
}
