//! Train, evaluate and baseline commands. Each writes fixed-schema files
//! under an output directory (see [`super::export`]).
//!
//! Training directory layout:
//!
//! ```text
//! <out>/config.toml            resolved configuration
//! <out>/training.csv           one row per epoch
//! <out>/epoch_metrics.csv      one row per evaluated (epoch, Δ)
//! <out>/checkpoints/epoch_NNN.json
//! <out>/policy.json            final parameters
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{EvalSpec, RunConfig};
use super::dataset::load_split;
use super::export::{write_eval_results, write_metric_sets, write_trace, TrainingCsv};
use crate::baselines::{baseline_schedule, BaselineConfig};
use crate::error::{Error, Result};
use crate::executor::execute_network;
use crate::graph::ConflictGraph;
use crate::metrics::{Aggregate, MetricsRecord};
use crate::policy::{load_params_expecting, save_params, PolicyParameters};
use crate::schedule::Requirements;
use crate::trainer::{derive_seed, init_seed, train_with, EvalBundle, EvalResult, TrainLog};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn checkpoint_path(out_dir: &Path, epoch: usize) -> PathBuf {
    out_dir.join("checkpoints").join(format!("epoch_{epoch:03}.json"))
}

/// Trains on the dataset's train split, evaluating on its test split under
/// every configured Δ after the epochs selected by `train.eval_every`.
pub fn cmd_train(cfg: &RunConfig, data_dir: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<(PolicyParameters, TrainLog)> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref();
    create_dir(&out_dir.join("checkpoints"))?;
    cfg.save(out_dir.join("config.toml"))?;

    let train_graphs: Vec<ConflictGraph> = load_split(&data_dir, "train")?.into_iter().map(|(_, g)| g).collect();
    let bundle = EvalBundle {
        graphs: load_split(&data_dir, "test")?,
        settings: cfg.eval.settings(),
    };

    let initial = PolicyParameters::init(&cfg.arch, init_seed(cfg.train.seed))?;
    save_params(checkpoint_path(out_dir, 0), &initial)?;

    let mut csv = TrainingCsv::create(out_dir, &cfg.eval.deltas)?;
    let (params, log) = train_with(&train_graphs, &cfg.train, &cfg.arch, Some(&bundle), |rec, params| {
        csv.push(rec)?;
        if rec.eval.is_some() {
            save_params(checkpoint_path(out_dir, rec.epoch), params)?;
        }
        Ok(())
    })?;
    save_params(out_dir.join("policy.json"), &params)?;
    Ok((params, log))
}

/// Executes a checkpoint on the test split for every Δ in `eval`. With
/// `traces`, per-(graph, Δ) schedules, duals and metrics are written under
/// `<out>/traces/<graph>_d<Δ>/`.
pub fn cmd_eval(
    cfg: &RunConfig,
    checkpoint: impl AsRef<Path>,
    data_dir: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    traces: bool,
) -> Result<Vec<EvalResult>> {
    cfg.eval.validate()?;
    let out_dir = out_dir.as_ref();
    create_dir(out_dir)?;
    let params = load_params_expecting(checkpoint, &cfg.arch)?;
    let graphs = load_split(&data_dir, "test")?;
    let results = evaluate_with_traces(&params, &graphs, &cfg.eval, traces.then_some(out_dir))?;
    write_eval_results(out_dir, &results)?;
    Ok(results)
}

fn evaluate_with_traces(
    params: &PolicyParameters,
    graphs: &[(String, ConflictGraph)],
    spec: &EvalSpec,
    trace_dir: Option<&Path>,
) -> Result<Vec<EvalResult>> {
    spec.settings()
        .into_iter()
        .map(|setting| {
            let records = graphs
                .par_iter()
                .map(|(id, g)| {
                    let req = Requirements::uniform(g.n_links(), setting.delta)?;
                    let trace = execute_network(id, g, params, &req, setting.delta, &setting.exec)?;
                    if let Some(dir) = trace_dir {
                        let d = dir.join("traces").join(format!("{id}_d{}", setting.delta));
                        write_trace(&d, g, &trace.schedules, &trace.lambda_trajectory, &trace.metrics)?;
                    }
                    Ok(trace.metrics)
                })
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&MetricsRecord> = records.iter().collect();
            let aggregate = Aggregate::of(setting.delta, &refs);
            Ok(EvalResult {
                setting,
                records,
                aggregate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub config: BaselineConfig,
    /// One `(records, aggregate)` per Δ.
    pub per_delta: Vec<(Vec<MetricsRecord>, Aggregate)>,
}

/// Runs baseline variants on `graphs`. Graph `i` uses schedule seed
/// `derive_seed(config.seed, i)`; schedules do not depend on Δ.
pub fn run_baselines(
    variants: &[BaselineConfig],
    graphs: &[(String, ConflictGraph)],
    deltas: &[f64],
) -> Result<Vec<BaselineResult>> {
    variants
        .iter()
        .map(|variant| {
            let schedules = graphs
                .par_iter()
                .enumerate()
                .map(|(i, (_, g))| {
                    let cfg = BaselineConfig {
                        seed: derive_seed(variant.seed, i as u64),
                        ..variant.clone()
                    };
                    baseline_schedule(g, &cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            let per_delta = deltas
                .iter()
                .map(|&delta| {
                    let records = graphs
                        .iter()
                        .zip(&schedules)
                        .map(|((id, g), s)| {
                            let req = Requirements::uniform(g.n_links(), delta)?;
                            MetricsRecord::from_schedules(id.as_str(), g, s, &req, delta)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let refs: Vec<&MetricsRecord> = records.iter().collect();
                    let agg = Aggregate::of(delta, &refs);
                    Ok((records, agg))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BaselineResult {
                config: variant.clone(),
                per_delta,
            })
        })
        .collect()
}

/// Runs the selected baseline variants on the test split and writes
/// `<out>/<label>/{metrics,violations,summary}.csv` for each.
pub fn cmd_baseline(
    variants: &[BaselineConfig],
    data_dir: impl AsRef<Path>,
    deltas: &[f64],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<BaselineResult>> {
    if variants.is_empty() {
        return Err(Error::Config("no baseline variants selected".into()));
    }
    let graphs = load_split(&data_dir, "test")?;
    let results = run_baselines(variants, &graphs, deltas)?;
    for r in &results {
        let sets: Vec<_> = r.per_delta.iter().map(|(recs, a)| (recs.as_slice(), a)).collect();
        write_metric_sets(out_dir.as_ref().join(r.config.label()), &sets)?;
    }
    Ok(results)
}
