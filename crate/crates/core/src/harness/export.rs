//! Fixed-schema CSV files.
//!
//! | file             | columns                                                                 |
//! |------------------|-------------------------------------------------------------------------|
//! | `training.csv`   | epoch, mean_lagrangian, mean_violation@Δ…, objective_fraction@Δ…        |
//! | `epoch_metrics.csv` | epoch, delta, objective_fraction, mean_violation, total_tx, successful_tx |
//! | `metrics.csv`    | graph_id, delta, objective_fraction, mean_violation, total_tx, successful_tx |
//! | `summary.csv`    | delta, n_graphs, objective_fraction, mean_violation, total_tx, successful_tx, efficiency |
//! | `violations.csv` | graph_id, delta, link_id, violation_level                               |
//! | `schedules.csv`  | t, link, scheduled, successful                                          |
//! | `lambda.csv`     | t, link, value                                                          |
//!
//! `total_tx` and `successful_tx` are mean transmissions per time step. Epoch
//! columns in `training.csv` are empty for epochs without evaluation.
//! Floats use the shortest representation that parses back to the same value.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::metrics::{Aggregate, MetricsRecord};
use crate::schedule::successes_raw;
use crate::trainer::{EpochRecord, EvalResult};

pub const METRICS_HEADER: [&str; 6] = [
    "graph_id",
    "delta",
    "objective_fraction",
    "mean_violation",
    "total_tx",
    "successful_tx",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub graph_id: String,
    pub delta: f64,
    pub objective_fraction: f64,
    pub mean_violation: f64,
    pub total_tx: f64,
    pub successful_tx: f64,
}

impl From<&MetricsRecord> for MetricsRow {
    fn from(m: &MetricsRecord) -> Self {
        Self {
            graph_id: m.graph_id.clone(),
            delta: m.delta,
            objective_fraction: m.objective_fraction,
            mean_violation: m.mean_violation,
            total_tx: m.total_transmissions,
            successful_tx: m.successful_transmissions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub delta: f64,
    pub n_graphs: usize,
    pub objective_fraction: f64,
    pub mean_violation: f64,
    pub total_tx: f64,
    pub successful_tx: f64,
    pub efficiency: f64,
}

impl From<&Aggregate> for SummaryRow {
    fn from(a: &Aggregate) -> Self {
        Self {
            delta: a.delta,
            n_graphs: a.n_graphs,
            objective_fraction: a.objective_fraction,
            mean_violation: a.mean_violation,
            total_tx: a.total_transmissions,
            successful_tx: a.successful_transmissions,
            efficiency: a.efficiency(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRow {
    pub graph_id: String,
    pub delta: f64,
    pub link_id: usize,
    pub violation_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetricsRow {
    pub epoch: usize,
    pub delta: f64,
    pub objective_fraction: f64,
    pub mean_violation: f64,
    pub total_tx: f64,
    pub successful_tx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub t: usize,
    pub link: usize,
    pub scheduled: u8,
    pub successful: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub t: usize,
    pub link: usize,
    pub value: f64,
}

pub fn write_rows<T: Serialize>(path: impl AsRef<Path>, header: &[&str], rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingInput(path.display().to_string()));
    }
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::parse(path, e.to_string())))
        .collect()
}

pub fn metrics_rows(records: &[MetricsRecord]) -> Vec<MetricsRow> {
    records.iter().map(MetricsRow::from).collect()
}

pub fn violation_rows(records: &[MetricsRecord]) -> Vec<ViolationRow> {
    records
        .iter()
        .flat_map(|m| {
            m.violation_fractions.iter().map(|&(link_id, violation_level)| ViolationRow {
                graph_id: m.graph_id.clone(),
                delta: m.delta,
                link_id,
                violation_level,
            })
        })
        .collect()
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "delta",
    "n_graphs",
    "objective_fraction",
    "mean_violation",
    "total_tx",
    "successful_tx",
    "efficiency",
];
pub const VIOLATIONS_HEADER: [&str; 4] = ["graph_id", "delta", "link_id", "violation_level"];
pub const EPOCH_METRICS_HEADER: [&str; 6] = [
    "epoch",
    "delta",
    "objective_fraction",
    "mean_violation",
    "total_tx",
    "successful_tx",
];

/// Writes `metrics.csv`, `violations.csv` and `summary.csv` into `dir`, one
/// `(records, aggregate)` set per requirement level.
pub fn write_metric_sets(dir: impl AsRef<Path>, sets: &[(&[MetricsRecord], &Aggregate)]) -> Result<()> {
    let dir = dir.as_ref();
    let records: Vec<MetricsRecord> = sets.iter().flat_map(|(r, _)| r.iter().cloned()).collect();
    write_rows(dir.join("metrics.csv"), &METRICS_HEADER, &metrics_rows(&records))?;
    write_rows(dir.join("violations.csv"), &VIOLATIONS_HEADER, &violation_rows(&records))?;
    let summary: Vec<SummaryRow> = sets.iter().map(|(_, a)| SummaryRow::from(*a)).collect();
    write_rows(dir.join("summary.csv"), &SUMMARY_HEADER, &summary)
}

pub fn write_eval_results(dir: impl AsRef<Path>, results: &[EvalResult]) -> Result<()> {
    let sets: Vec<_> = results.iter().map(|r| (r.records.as_slice(), &r.aggregate)).collect();
    write_metric_sets(dir, &sets)
}

pub fn training_header(deltas: &[f64]) -> Vec<String> {
    let mut h = vec!["epoch".to_string(), "mean_lagrangian".to_string()];
    h.extend(deltas.iter().map(|d| format!("mean_violation@{d}")));
    h.extend(deltas.iter().map(|d| format!("objective_fraction@{d}")));
    h
}

/// Streams `training.csv` and `epoch_metrics.csv` one epoch at a time.
pub struct TrainingCsv {
    training: csv::Writer<File>,
    epochs: csv::Writer<File>,
    deltas: Vec<f64>,
}

impl TrainingCsv {
    pub fn create(dir: impl AsRef<Path>, deltas: &[f64]) -> Result<Self> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut training = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(dir.join("training.csv"))?;
        training.write_record(training_header(deltas))?;
        training.flush().map_err(|e| Error::io(dir, e))?;
        let mut epochs = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(dir.join("epoch_metrics.csv"))?;
        epochs.write_record(EPOCH_METRICS_HEADER)?;
        epochs.flush().map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            training,
            epochs,
            deltas: deltas.to_vec(),
        })
    }

    pub fn push(&mut self, rec: &EpochRecord) -> Result<()> {
        let mut row = vec![rec.epoch.to_string(), rec.mean_lagrangian.to_string()];
        let find = |d: f64| {
            rec.eval
                .as_ref()
                .and_then(|ev| ev.iter().find(|r| r.setting.delta == d))
                .map(|r| &r.aggregate)
        };
        row.extend(self.deltas.iter().map(|&d| find(d).map_or(String::new(), |a| a.mean_violation.to_string())));
        row.extend(
            self.deltas
                .iter()
                .map(|&d| find(d).map_or(String::new(), |a| a.objective_fraction.to_string())),
        );
        self.training.write_record(&row)?;
        for r in rec.eval.iter().flatten() {
            let a = &r.aggregate;
            self.epochs.serialize(EpochMetricsRow {
                epoch: rec.epoch,
                delta: a.delta,
                objective_fraction: a.objective_fraction,
                mean_violation: a.mean_violation,
                total_tx: a.total_transmissions,
                successful_tx: a.successful_transmissions,
            })?;
        }
        self.training.flush().map_err(|e| Error::io("training.csv", e))?;
        self.epochs.flush().map_err(|e| Error::io("epoch_metrics.csv", e))
    }
}

/// One parsed `training.csv` row; `None` where no evaluation ran.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub epoch: usize,
    pub mean_lagrangian: f64,
    pub mean_violation: Vec<Option<f64>>,
    pub objective_fraction: Vec<Option<f64>>,
}

pub fn read_training_csv(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<TrainingRow>)> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingInput(path.display().to_string()));
    }
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let bad = |m: String| Error::parse(path, m);
    if header.get(0) != Some("epoch") || header.get(1) != Some("mean_lagrangian") {
        return Err(bad("header must start with epoch,mean_lagrangian".into()));
    }
    let n = (header.len() - 2) / 2;
    let deltas = (0..n)
        .map(|i| {
            header[2 + i]
                .strip_prefix("mean_violation@")
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| bad(format!("column {} is not mean_violation@<delta>", 3 + i)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let parse_opt = |s: &str, line: usize| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(format!("line {line}: bad number {s:?}")))
        }
    };
    let mut rows = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        let epoch = rec[0].parse().map_err(|_| bad(format!("line {line}: bad epoch")))?;
        let mean_lagrangian = rec[1].parse().map_err(|_| bad(format!("line {line}: bad mean_lagrangian")))?;
        let mean_violation = (0..n).map(|i| parse_opt(&rec[2 + i], line)).collect::<Result<_>>()?;
        let objective_fraction = (0..n).map(|i| parse_opt(&rec[2 + n + i], line)).collect::<Result<_>>()?;
        rows.push(TrainingRow {
            epoch,
            mean_lagrangian,
            mean_violation,
            objective_fraction,
        });
    }
    Ok((deltas, rows))
}

/// Writes `schedules.csv`, `lambda.csv` and `metrics.json` for one execution.
pub fn write_trace(
    dir: impl AsRef<Path>,
    graph: &ConflictGraph,
    schedules: &[crate::schedule::Schedule],
    lambda: &[Vec<f64>],
    metrics: &MetricsRecord,
) -> Result<()> {
    let dir = dir.as_ref();
    let mut s_rows = Vec::with_capacity(schedules.len() * graph.n_links());
    for (t, s) in schedules.iter().enumerate() {
        let succ = successes_raw(graph, s.values());
        for link in 0..graph.n_links() {
            s_rows.push(ScheduleRow {
                t,
                link,
                scheduled: s.values()[link] as u8,
                successful: succ[link] as u8,
            });
        }
    }
    write_rows(dir.join("schedules.csv"), &["t", "link", "scheduled", "successful"], &s_rows)?;
    let l_rows: Vec<LambdaRow> = lambda
        .iter()
        .enumerate()
        .flat_map(|(t, l)| l.iter().enumerate().map(move |(link, &value)| LambdaRow { t, link, value }))
        .collect();
    write_rows(dir.join("lambda.csv"), &["t", "link", "value"], &l_rows)?;
    let path = dir.join("metrics.json");
    let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let text = serde_json::to_string_pretty(metrics).expect("metrics serialize");
    f.write_all(text.as_bytes()).map_err(|e| Error::io(&path, e))
}
