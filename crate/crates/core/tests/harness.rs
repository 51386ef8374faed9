use std::fs;
use std::path::Path;
use std::process::Command;

use sagnn::graph::load_conflict_graph;
use sagnn::harness::export::{read_rows, read_training_csv, MetricsRow, ScheduleRow, SummaryRow};
use sagnn::harness::report::{CurveRow, FIG2_HEADER};
use sagnn::harness::{
    cmd_baseline, cmd_eval, cmd_gen_data, cmd_report, cmd_train, load_split, DatasetSpec, Manifest, ReportInputs,
    RunConfig,
};
use sagnn::metrics::MetricsRecord;
use sagnn::policy::{load_params, PolicyParameters};
use sagnn::schedule::{Requirements, Schedule};
use sagnn::trainer::init_seed;
use sagnn::Error;

fn tiny_config() -> RunConfig {
    RunConfig::from_toml(
        r#"
[dataset]
count_train = 2
count_test = 3
n_min = 20
n_max = 30
seed = 4

[arch]
features = 8

[train]
epochs = 3
primal_lr = 1e-3
dual_samples_per_graph = 3

[eval]
T = 30
"#,
    )
    .unwrap()
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn datasets_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_config().dataset;
    let a = cmd_gen_data(&spec, dir.path().join("a")).unwrap();
    cmd_gen_data(&spec, dir.path().join("b")).unwrap();
    for e in &a.graphs {
        assert_eq!(read(dir.path().join("a").join(&e.conflict_file)), read(dir.path().join("b").join(&e.conflict_file)));
        assert_eq!(read(dir.path().join("a").join(&e.comm_file)), read(dir.path().join("b").join(&e.comm_file)));
    }
    assert_eq!(read(dir.path().join("a/manifest.json")), read(dir.path().join("b/manifest.json")));
    assert_eq!(Manifest::load(dir.path().join("a")).unwrap(), a);
    assert_eq!(a.graphs.len(), 5);
}

#[test]
fn four_agent_datasets_hold_four_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let spec = DatasetSpec {
        count_train: 1,
        count_test: 2,
        n_min: 4,
        n_max: 4,
        ..DatasetSpec::default()
    };
    cmd_gen_data(&spec, dir.path()).unwrap();
    for (_, g) in load_split(dir.path(), "test").unwrap() {
        assert_eq!(g.n_links(), 4);
        assert_eq!(g.n_edges(), 4);
    }
}

#[test]
fn zero_epochs_write_header_and_initial_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config();
    cfg.train.epochs = 0;
    cmd_gen_data(&cfg.dataset, dir.path().join("data")).unwrap();
    let out = dir.path().join("run");
    cmd_train(&cfg, dir.path().join("data"), &out).unwrap();
    let text = fs::read_to_string(out.join("training.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    let initial = PolicyParameters::init(&cfg.arch, init_seed(cfg.train.seed)).unwrap();
    assert_eq!(load_params(out.join("checkpoints/epoch_000.json")).unwrap(), initial);
    assert_eq!(load_params(out.join("policy.json")).unwrap(), initial);
    assert_eq!(RunConfig::load(out.join("config.toml")).unwrap(), cfg);
}

#[test]
fn training_evaluates_every_epoch_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config();
    cmd_gen_data(&cfg.dataset, dir.path().join("data")).unwrap();
    let out = dir.path().join("run");
    let (_, log) = cmd_train(&cfg, dir.path().join("data"), &out).unwrap();
    let (deltas, rows) = read_training_csv(out.join("training.csv")).unwrap();
    assert_eq!(deltas, cfg.eval.deltas);
    assert_eq!(rows.len(), 3);
    for (row, rec) in rows.iter().zip(&log.epochs) {
        assert_eq!(row.epoch, rec.epoch);
        assert_eq!(row.mean_lagrangian, rec.mean_lagrangian);
        let eval = rec.eval.as_ref().unwrap();
        for (i, r) in eval.iter().enumerate() {
            assert_eq!(row.mean_violation[i], Some(r.aggregate.mean_violation));
            assert_eq!(row.objective_fraction[i], Some(r.aggregate.objective_fraction));
        }
    }
    let epoch_rows = fs::read_to_string(out.join("epoch_metrics.csv")).unwrap();
    assert_eq!(epoch_rows.lines().count(), 1 + 3 * 3);
    for e in 0..=3 {
        assert!(out.join(format!("checkpoints/epoch_{e:03}.json")).exists());
    }
}

#[test]
fn evaluation_is_reproducible_and_traces_recompute_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config();
    let data = dir.path().join("data");
    cmd_gen_data(&cfg.dataset, &data).unwrap();
    cmd_train(&cfg, &data, dir.path().join("run")).unwrap();
    let ckpt = dir.path().join("run/policy.json");
    let results = cmd_eval(&cfg, &ckpt, &data, dir.path().join("e1"), true).unwrap();
    cmd_eval(&cfg, &ckpt, &data, dir.path().join("e2"), false).unwrap();
    for f in ["metrics.csv", "summary.csv", "violations.csv"] {
        assert_eq!(read(dir.path().join("e1").join(f)), read(dir.path().join("e2").join(f)), "{f}");
    }

    let summary: Vec<SummaryRow> = read_rows(dir.path().join("e1/summary.csv")).unwrap();
    assert_eq!(summary.len(), 3);
    let rows: Vec<MetricsRow> = read_rows(dir.path().join("e1/metrics.csv")).unwrap();
    assert_eq!(rows.len(), 3 * 3);
    for s in &summary {
        let mine: Vec<&MetricsRow> = rows.iter().filter(|r| r.delta == s.delta).collect();
        let mean = mine.iter().map(|r| r.objective_fraction).sum::<f64>() / mine.len() as f64;
        assert!((mean - s.objective_fraction).abs() < 1e-10);
        let viol = mine.iter().map(|r| r.mean_violation).sum::<f64>() / mine.len() as f64;
        assert!((viol - s.mean_violation).abs() < 1e-10);
    }

    let manifest = Manifest::load(&data).unwrap();
    for row in &rows {
        let entry = manifest.graphs.iter().find(|e| e.id == row.graph_id).unwrap();
        let g = load_conflict_graph(data.join(&entry.conflict_file)).unwrap();
        let trace = dir.path().join(format!("e1/traces/{}_d{}", row.graph_id, row.delta));
        let sched: Vec<ScheduleRow> = read_rows(trace.join("schedules.csv")).unwrap();
        let steps = sched.iter().map(|r| r.t).max().unwrap() + 1;
        let schedules: Vec<Schedule> = (0..steps)
            .map(|t| {
                let mut on = vec![false; g.n_links()];
                for r in sched.iter().filter(|r| r.t == t) {
                    on[r.link] = r.scheduled == 1;
                }
                Schedule::from_bools(on)
            })
            .collect();
        let req = Requirements::uniform(g.n_links(), row.delta).unwrap();
        let m = MetricsRecord::from_schedules(row.graph_id.as_str(), &g, &schedules, &req, row.delta).unwrap();
        assert_eq!(m.objective_fraction, row.objective_fraction);
        assert_eq!(m.mean_violation, row.mean_violation);
        assert_eq!(m.total_transmissions, row.total_tx);
        assert_eq!(m.successful_transmissions, row.successful_tx);
    }
    assert_eq!(results.len(), 3);
}

#[test]
fn baselines_write_four_groups_and_report_consolidates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config();
    let data = dir.path().join("data");
    cmd_gen_data(&cfg.dataset, &data).unwrap();
    let results = cmd_baseline(&cfg.baseline.variants(), &data, &cfg.eval.deltas, dir.path().join("base")).unwrap();
    assert_eq!(results.len(), 4);
    for r in &results {
        assert!(dir.path().join("base").join(r.config.label()).join("summary.csv").exists());
    }
    cmd_train(&cfg, &data, dir.path().join("run")).unwrap();
    cmd_eval(&cfg, dir.path().join("run/policy.json"), &data, dir.path().join("eval"), false).unwrap();

    let inputs = ReportInputs {
        runs: vec![dir.path().join("run")],
        eval: Some(dir.path().join("eval")),
        baselines: Some(dir.path().join("base")),
    };
    cmd_report(&inputs, dir.path().join("fig")).unwrap();
    let text = fs::read_to_string(dir.path().join("fig/fig2_violation.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), FIG2_HEADER.join(","));
    let curve: Vec<CurveRow> = read_rows(dir.path().join("fig/fig2_violation.csv")).unwrap();
    assert_eq!(curve.len(), 3 * 3);
    assert!(curve.iter().all(|c| c.std == 0.0 && c.n_runs == 1));
    let fig3 = fs::read_to_string(dir.path().join("fig/fig3_objective.csv")).unwrap();
    assert_eq!(fig3.lines().filter(|l| l.starts_with("mis_random_ca,")).count(), 3);
    for f in ["fig4_transmissions.csv", "fig5_violations.csv"] {
        assert!(dir.path().join("fig").join(f).exists());
    }

    // two identical runs: mean equals the single run, std stays zero
    let twice = ReportInputs {
        runs: vec![dir.path().join("run"), dir.path().join("run")],
        ..inputs.clone()
    };
    cmd_report(&twice, dir.path().join("fig2")).unwrap();
    let curve2: Vec<CurveRow> = read_rows(dir.path().join("fig2/fig2_violation.csv")).unwrap();
    for (a, b) in curve.iter().zip(&curve2) {
        assert_eq!((a.mean, b.std, b.n_runs), (b.mean, 0.0, 2));
    }

    let missing = ReportInputs {
        eval: Some(dir.path().join("nowhere")),
        ..inputs
    };
    match cmd_report(&missing, dir.path().join("fig3")) {
        Err(Error::MissingInput(m)) => assert!(m.contains("nowhere"), "{m}"),
        r => panic!("expected missing input, got {r:?}"),
    }
}

#[test]
fn cli_runs_each_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.toml");
    let mut cfg = tiny_config();
    cfg.train.epochs = 1;
    cfg.save(&cfg_path).unwrap();
    let sagnn = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_sagnn"))
            .arg("--config")
            .arg(&cfg_path)
            .args(args)
            .output()
            .unwrap();
        (out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned())
    };
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    assert!(sagnn(&["--out", &p("data"), "gen-data"]).0);
    assert!(sagnn(&["--out", &p("run"), "train", "--data", &p("data")]).0);
    let ckpt = p("run/policy.json");
    assert!(sagnn(&["--out", &p("eval"), "eval", "--data", &p("data"), "--checkpoint", &ckpt]).0);
    assert!(sagnn(&["--out", &p("base"), "baseline", "--data", &p("data"), "--variant", "mis_random_ca"]).0);
    assert!(sagnn(&["--out", &p("fig"), "report", "--run", &p("run"), "--eval", &p("eval")]).0);
    assert!(dir.path().join("fig/fig5_violations.csv").exists());

    let (ok, err) = sagnn(&["--out", &p("x"), "baseline", "--data", &p("data"), "--variant", "nope"]);
    assert!(!ok && err.contains("nope"), "{err}");
    let (ok, err) = sagnn(&["--out", &p("x"), "eval", "--data", &p("data"), "--checkpoint", &p("missing.json")]);
    assert!(!ok && err.contains("missing.json"), "{err}");

    // --seed overrides every seed in the file
    assert!(sagnn(&["--seed", "9", "--out", &p("data9"), "gen-data"]).0);
    assert_eq!(Manifest::load(dir.path().join("data9")).unwrap().spec.seed, 9);
}
