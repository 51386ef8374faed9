//! Policy checkpoint files.
//!
//! A checkpoint is a JSON object with fields in this order:
//!
//! ```text
//! format        "sagnn-policy"
//! version       1
//! arch          ArchConfig (layers, features, order, leaky_slope, operator,
//!               norm_momentum, norm_epsilon)
//! layers[]      per layer: in_features, out_features,
//!               taps (flat, row-major over (tap, in, out)),
//!               gamma, beta, running_mean, running_var
//! output_weight flat, length = features
//! output_bias   scalar
//! ```
//!
//! Floats are written in shortest round-trip form, so load(save(p)) == p bitwise.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array3};
use serde::{Deserialize, Serialize};

use super::params::{ArchConfig, LayerParams, PolicyParameters};
use crate::error::{Error, Result};

const FORMAT: &str = "sagnn-policy";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    arch: ArchConfig,
    layers: Vec<LayerFile>,
    output_weight: Vec<f64>,
    output_bias: f64,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    in_features: usize,
    out_features: usize,
    taps: Vec<f64>,
    gamma: Vec<f64>,
    beta: Vec<f64>,
    running_mean: Vec<f64>,
    running_var: Vec<f64>,
}

pub fn params_to_json(params: &PolicyParameters) -> String {
    let file = CheckpointFile {
        format: FORMAT.into(),
        version: VERSION,
        arch: params.config.clone(),
        layers: params
            .layers
            .iter()
            .map(|l| LayerFile {
                in_features: l.in_features(),
                out_features: l.out_features(),
                taps: l.taps.iter().copied().collect(),
                gamma: l.gamma.to_vec(),
                beta: l.beta.to_vec(),
                running_mean: l.running_mean.to_vec(),
                running_var: l.running_var.to_vec(),
            })
            .collect(),
        output_weight: params.output_weight.to_vec(),
        output_bias: params.output_bias,
    };
    serde_json::to_string(&file).expect("checkpoint serializes")
}

pub fn params_from_json(text: &str) -> Result<PolicyParameters> {
    let file: CheckpointFile = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if file.format != FORMAT {
        return Err(Error::Config(format!("format is {:?}, expected {FORMAT:?}", file.format)));
    }
    if file.version != VERSION {
        return Err(Error::Config(format!("unsupported checkpoint version {}", file.version)));
    }
    let arch = file.arch;
    let mut layers = Vec::with_capacity(file.layers.len());
    for (l, lf) in file.layers.into_iter().enumerate() {
        if lf.in_features != arch.in_features(l) || lf.out_features != arch.features {
            return Err(Error::ArchMismatch(format!(
                "layer {l} is {}x{}, arch expects {}x{} (features = {})",
                lf.in_features,
                lf.out_features,
                arch.in_features(l),
                arch.features,
                arch.features
            )));
        }
        let shape = (arch.taps(), lf.in_features, lf.out_features);
        let taps = Array3::from_shape_vec(shape, lf.taps).map_err(|_| {
            Error::ArchMismatch(format!("layer {l} taps do not have shape {shape:?}"))
        })?;
        layers.push(LayerParams {
            taps,
            gamma: Array1::from(lf.gamma),
            beta: Array1::from(lf.beta),
            running_mean: Array1::from(lf.running_mean),
            running_var: Array1::from(lf.running_var),
        });
    }
    let params = PolicyParameters {
        config: arch,
        layers,
        output_weight: Array1::from(file.output_weight),
        output_bias: file.output_bias,
    };
    params.validate()?;
    Ok(params)
}

pub fn save_params(path: impl AsRef<Path>, params: &PolicyParameters) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, params_to_json(params)).map_err(|e| Error::io(path, e))
}

pub fn load_params(path: impl AsRef<Path>) -> Result<PolicyParameters> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    params_from_json(&text).map_err(|e| match e {
        Error::Config(m) => Error::parse(path, m),
        other => other,
    })
}

/// Loads a checkpoint and requires its architecture to equal `expected`,
/// naming every differing field.
pub fn load_params_expecting(path: impl AsRef<Path>, expected: &ArchConfig) -> Result<PolicyParameters> {
    let params = load_params(path)?;
    check_arch(&params.config, expected)?;
    Ok(params)
}

pub fn check_arch(found: &ArchConfig, expected: &ArchConfig) -> Result<()> {
    let mut diffs = Vec::new();
    if found.layers != expected.layers {
        diffs.push(format!("layers: file has {}, expected {}", found.layers, expected.layers));
    }
    if found.features != expected.features {
        diffs.push(format!("features: file has {}, expected {}", found.features, expected.features));
    }
    if found.order != expected.order {
        diffs.push(format!("order: file has {}, expected {}", found.order, expected.order));
    }
    if found.operator != expected.operator {
        diffs.push(format!(
            "operator: file has {}, expected {}",
            found.operator.name(),
            expected.operator.name()
        ));
    }
    if found.leaky_slope != expected.leaky_slope {
        diffs.push(format!(
            "leaky_slope: file has {}, expected {}",
            found.leaky_slope, expected.leaky_slope
        ));
    }
    if found.norm_epsilon != expected.norm_epsilon {
        diffs.push(format!(
            "norm_epsilon: file has {}, expected {}",
            found.norm_epsilon, expected.norm_epsilon
        ));
    }
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(Error::ArchMismatch(diffs.join("; ")))
    }
}
