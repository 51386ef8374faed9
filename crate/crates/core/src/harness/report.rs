//! Figure-feed CSVs consolidated from training runs, an evaluation and
//! optional baselines.
//!
//! | file                   | columns                                            |
//! |------------------------|----------------------------------------------------|
//! | `fig2_violation.csv`   | epoch, delta, mean, std, n_runs                    |
//! | `fig3_objective.csv`   | series, delta, epoch, mean, std, n_runs            |
//! | `fig4_transmissions.csv` | delta, total_tx, successful_tx, efficiency       |
//! | `fig5_violations.csv`  | delta, graph_id, link_id, violation_level          |
//!
//! Curves are smoothed per run with a trailing running average over the last
//! [`SMOOTHING_WINDOW`] evaluated epochs, then averaged across runs; `std` is
//! the population standard deviation across runs. Baseline rows in
//! `fig3_objective.csv` have an empty `epoch` (horizontal lines).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::export::{read_rows, read_training_csv, write_rows, SummaryRow, TrainingRow, ViolationRow};
use crate::error::{Error, Result};

pub const SMOOTHING_WINDOW: usize = 5;

pub const FIG2_HEADER: [&str; 5] = ["epoch", "delta", "mean", "std", "n_runs"];
pub const FIG3_HEADER: [&str; 6] = ["series", "delta", "epoch", "mean", "std", "n_runs"];
pub const FIG4_HEADER: [&str; 4] = ["delta", "total_tx", "successful_tx", "efficiency"];
pub const FIG5_HEADER: [&str; 4] = ["delta", "graph_id", "link_id", "violation_level"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub epoch: usize,
    pub delta: f64,
    pub mean: f64,
    pub std: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub series: String,
    pub delta: f64,
    pub epoch: Option<usize>,
    pub mean: f64,
    pub std: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionRow {
    pub delta: f64,
    pub total_tx: f64,
    pub successful_tx: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub delta: f64,
    pub graph_id: String,
    pub link_id: usize,
    pub violation_level: f64,
}

/// Where `cmd_report` reads from.
#[derive(Debug, Clone, Default)]
pub struct ReportInputs {
    /// Training directories, each holding a `training.csv`.
    pub runs: Vec<PathBuf>,
    /// Evaluation directory holding `summary.csv` and `violations.csv`.
    pub eval: Option<PathBuf>,
    /// Baseline directory with one `<label>/summary.csv` per variant.
    pub baselines: Option<PathBuf>,
}

/// Trailing running average: entry `i` is the mean of the last `window`
/// values up to and including `i` (fewer at the start).
pub fn running_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let w = &values[lo..=i];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect()
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

type Pick = fn(&TrainingRow) -> &Vec<Option<f64>>;

/// Smoothed curves of one training column across runs.
fn curves(runs: &[(Vec<f64>, Vec<TrainingRow>)], deltas: &[f64], pick: Pick) -> Vec<CurveRow> {
    let mut out = Vec::new();
    for &delta in deltas {
        // epoch -> smoothed value per run
        let mut by_epoch: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (run_deltas, rows) in runs {
            let Some(col) = run_deltas.iter().position(|&d| d == delta) else {
                continue;
            };
            let points: Vec<(usize, f64)> = rows.iter().filter_map(|r| pick(r)[col].map(|v| (r.epoch, v))).collect();
            let values: Vec<f64> = points.iter().map(|p| p.1).collect();
            for ((epoch, _), v) in points.iter().zip(running_average(&values, SMOOTHING_WINDOW)) {
                by_epoch.entry(*epoch).or_default().push(v);
            }
        }
        for (epoch, vals) in by_epoch {
            let (mean, std) = mean_std(&vals);
            out.push(CurveRow {
                epoch,
                delta,
                mean,
                std,
                n_runs: vals.len(),
            });
        }
    }
    out
}

/// Writes the four figure-feed files into `out_dir`.
pub fn cmd_report(inputs: &ReportInputs, out_dir: impl AsRef<Path>) -> Result<()> {
    let out_dir = out_dir.as_ref();
    if inputs.runs.is_empty() {
        return Err(Error::MissingInput("at least one training run directory".into()));
    }
    let Some(eval_dir) = &inputs.eval else {
        return Err(Error::MissingInput("evaluation directory (summary.csv, violations.csv)".into()));
    };

    let runs = inputs
        .runs
        .iter()
        .map(|dir| read_training_csv(dir.join("training.csv")))
        .collect::<Result<Vec<_>>>()?;
    let mut deltas: Vec<f64> = Vec::new();
    for (ds, _) in &runs {
        for &d in ds {
            if !deltas.contains(&d) {
                deltas.push(d);
            }
        }
    }

    let violation = curves(&runs, &deltas, |r| &r.mean_violation);
    write_rows(out_dir.join("fig2_violation.csv"), &FIG2_HEADER, &violation)?;

    let mut objective: Vec<SeriesRow> = curves(&runs, &deltas, |r| &r.objective_fraction)
        .into_iter()
        .map(|c| SeriesRow {
            series: "sagnn".into(),
            delta: c.delta,
            epoch: Some(c.epoch),
            mean: c.mean,
            std: c.std,
            n_runs: c.n_runs,
        })
        .collect();
    if let Some(dir) = &inputs.baselines {
        objective.extend(baseline_rows(dir)?);
    }
    write_rows(out_dir.join("fig3_objective.csv"), &FIG3_HEADER, &objective)?;

    let summary: Vec<SummaryRow> = read_rows(eval_dir.join("summary.csv"))?;
    let tx: Vec<TransmissionRow> = summary
        .iter()
        .map(|s| TransmissionRow {
            delta: s.delta,
            total_tx: s.total_tx,
            successful_tx: s.successful_tx,
            efficiency: s.efficiency,
        })
        .collect();
    write_rows(out_dir.join("fig4_transmissions.csv"), &FIG4_HEADER, &tx)?;

    let violations: Vec<ViolationRow> = read_rows(eval_dir.join("violations.csv"))?;
    let dist: Vec<DistributionRow> = violations
        .into_iter()
        .map(|v| DistributionRow {
            delta: v.delta,
            graph_id: v.graph_id,
            link_id: v.link_id,
            violation_level: v.violation_level,
        })
        .collect();
    write_rows(out_dir.join("fig5_violations.csv"), &FIG5_HEADER, &dist)
}

/// One horizontal per (variant, Δ), variants in directory-name order.
fn baseline_rows(dir: &Path) -> Result<Vec<SeriesRow>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut labels: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("summary.csv").is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    labels.sort();
    if labels.is_empty() {
        return Err(Error::MissingInput(format!("{}/<variant>/summary.csv", dir.display())));
    }
    let mut rows = Vec::new();
    for label in labels {
        let summary: Vec<SummaryRow> = read_rows(dir.join(&label).join("summary.csv"))?;
        rows.extend(summary.into_iter().map(|s| SeriesRow {
            series: label.clone(),
            delta: s.delta,
            epoch: None,
            mean: s.objective_fraction,
            std: 0.0,
            n_runs: 1,
        }));
    }
    Ok(rows)
}
