//! Training over randomly sampled dual variables.
//!
//! Each epoch visits every training graph (shuffled), draws
//! `dual_samples_per_graph` dual vectors per graph and takes one Adam ascent
//! step on the augmented Lagrangian for each.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::{execute_network, ExecConfig};
use crate::graph::ConflictGraph;
use crate::metrics::{Aggregate, MetricsRecord};
use crate::policy::{
    adam_step, lagrangian_value_and_grad, update_running_stats, AdamState, ArchConfig, Direction,
    PolicyParameters,
};
use crate::schedule::Requirements;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub primal_lr: f64,
    pub dual_samples_per_graph: usize,
    pub lambda_max: f64,
    pub zero_mask_fraction: f64,
    pub max_mask_fraction: f64,
    pub seed: u64,
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            primal_lr: 5e-5,
            dual_samples_per_graph: 10,
            lambda_max: 2.0,
            zero_mask_fraction: 0.0,
            max_mask_fraction: 0.0,
            seed: 0,
            eval_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.primal_lr > 0.0 && self.primal_lr.is_finite()) {
            return Err(Error::Config(format!("train.primal_lr must be > 0, got {}", self.primal_lr)));
        }
        if !(self.lambda_max >= 0.0 && self.lambda_max.is_finite()) {
            return Err(Error::Config(format!("train.lambda_max must be >= 0, got {}", self.lambda_max)));
        }
        for (name, f) in [
            ("zero_mask_fraction", self.zero_mask_fraction),
            ("max_mask_fraction", self.max_mask_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("train.{name} must be in [0, 1], got {f}")));
            }
        }
        if self.zero_mask_fraction + self.max_mask_fraction > 1.0 {
            return Err(Error::Config("train.zero_mask_fraction + max_mask_fraction must be <= 1".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Config("train.eval_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Whether held-out evaluation runs after `epoch` (1-based): the first
    /// epoch, every `eval_every`-th epoch and the last epoch.
    pub fn evaluates_after(&self, epoch: usize) -> bool {
        epoch == 1 || epoch % self.eval_every == 0 || epoch == self.epochs
    }

    pub fn updates_per_epoch(&self, n_graphs: usize) -> usize {
        n_graphs * self.dual_samples_per_graph
    }
}

/// Independent sub-seed for one purpose of a run.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.random()
}

const INIT_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;

/// Seed used to initialize the parameters of a run seeded with `seed`.
pub fn init_seed(seed: u64) -> u64 {
    derive_seed(seed, INIT_STREAM)
}

/// Dual sample: i.i.d. `U[0, λ_max]`, then a random `zero_mask_fraction` of
/// entries set to 0 and a disjoint `max_mask_fraction` set to `λ_max`.
pub fn sample_dual<R: Rng + ?Sized>(k: usize, cfg: &TrainConfig, rng: &mut R) -> Vec<f64> {
    let mut lambda: Vec<f64> = (0..k)
        .map(|_| {
            if cfg.lambda_max > 0.0 {
                rng.random_range(0.0..=cfg.lambda_max)
            } else {
                0.0
            }
        })
        .collect();
    let n_zero = (cfg.zero_mask_fraction * k as f64).round() as usize;
    let n_max = ((cfg.max_mask_fraction * k as f64).round() as usize).min(k - n_zero.min(k));
    let n_zero = n_zero.min(k);
    if n_zero + n_max > 0 {
        let picked = index::sample(rng, k, n_zero + n_max);
        for (pos, i) in picked.iter().enumerate() {
            lambda[i] = if pos < n_zero { 0.0 } else { cfg.lambda_max };
        }
    }
    lambda
}

/// Held-out graphs plus the (Δ, execution) settings to evaluate them under.
#[derive(Debug, Clone)]
pub struct EvalBundle {
    pub graphs: Vec<(String, ConflictGraph)>,
    pub settings: Vec<EvalSetting>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSetting {
    pub delta: f64,
    pub exec: ExecConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub setting: EvalSetting,
    pub records: Vec<MetricsRecord>,
    pub aggregate: Aggregate,
}

/// Executes `params` on every held-out graph under every setting.
/// Graphs are evaluated in parallel; results keep graph order.
pub fn evaluate(params: &PolicyParameters, bundle: &EvalBundle) -> Result<Vec<EvalResult>> {
    bundle
        .settings
        .iter()
        .map(|setting| {
            let records = bundle
                .graphs
                .par_iter()
                .map(|(id, g)| {
                    let req = Requirements::uniform(g.n_links(), setting.delta)?;
                    execute_network(id, g, params, &req, setting.delta, &setting.exec).map(|t| t.metrics)
                })
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&MetricsRecord> = records.iter().collect();
            let aggregate = Aggregate::of(setting.delta, &refs);
            Ok(EvalResult {
                setting: setting.clone(),
                records,
                aggregate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub mean_lagrangian: f64,
    pub updates: usize,
    pub eval: Option<Vec<EvalResult>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn total_updates(&self) -> usize {
        self.epochs.iter().map(|e| e.updates).sum()
    }
}

/// Trains a fresh policy. `on_epoch` sees the parameters after each epoch
/// (e.g. to write checkpoints).
pub fn train_with(
    train_graphs: &[ConflictGraph],
    cfg: &TrainConfig,
    arch: &ArchConfig,
    eval_bundle: Option<&EvalBundle>,
    mut on_epoch: impl FnMut(&EpochRecord, &PolicyParameters) -> Result<()>,
) -> Result<(PolicyParameters, TrainLog)> {
    if train_graphs.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    cfg.validate()?;
    let mut params = PolicyParameters::init(arch, init_seed(cfg.seed))?;
    let mut adam = AdamState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, TRAIN_STREAM));
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..train_graphs.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut updates = 0;
        for &gi in &order {
            let graph = &train_graphs[gi];
            // Δ is a constant in the parameters; train with Δ = 0.
            let req = Requirements::uniform(graph.n_links(), 0.0)?;
            for _ in 0..cfg.dual_samples_per_graph {
                let lambda = sample_dual(graph.n_links(), cfg, &mut rng);
                let (value, grads, cache) = lagrangian_value_and_grad(graph, &lambda, &req, &params)?;
                if !value.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "training loss at epoch {epoch}, graph {gi}, update {updates}"
                    )));
                }
                update_running_stats(&mut params, &cache);
                adam_step(&mut params, &grads, &mut adam, cfg.primal_lr, Direction::Ascent)?;
                total += value;
                updates += 1;
            }
        }
        let eval = match eval_bundle {
            Some(b) if cfg.evaluates_after(epoch) => Some(evaluate(&params, b)?),
            _ => None,
        };
        let record = EpochRecord {
            epoch,
            mean_lagrangian: if updates > 0 { total / updates as f64 } else { 0.0 },
            updates,
            eval,
        };
        on_epoch(&record, &params)?;
        log.epochs.push(record);
    }
    Ok((params, log))
}

pub fn train(
    train_graphs: &[ConflictGraph],
    cfg: &TrainConfig,
    arch: &ArchConfig,
    eval_bundle: Option<&EvalBundle>,
) -> Result<(PolicyParameters, TrainLog)> {
    train_with(train_graphs, cfg, arch, eval_bundle, |_, _| Ok(()))
}
