//! The whole pipeline on a toy configuration: dataset, training with
//! evaluation, baselines and the figure-feed CSVs.
//!
//! `cargo run --release --example report [out_dir]`

use std::path::PathBuf;

use sagnn::harness::{cmd_baseline, cmd_gen_data, cmd_report, cmd_train, ReportInputs, RunConfig};

const CONFIG: &str = r#"
[dataset]
count_train = 2
count_test = 4
n_min = 40
n_max = 60

[arch]
features = 32

[train]
epochs = 6
primal_lr = 1e-3
eval_every = 2

[eval]
T = 100
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/example-out/pipeline".into()));
    let cfg = RunConfig::from_toml(CONFIG)?;
    let data = out.join("data");

    cmd_gen_data(&cfg.dataset, &data)?;
    let mut runs = Vec::new();
    for seed in 0..2 {
        let mut run_cfg = cfg.clone();
        run_cfg.train.seed = seed;
        let dir = out.join(format!("run_{seed}"));
        cmd_train(&run_cfg, &data, &dir)?;
        runs.push(dir);
    }
    // The final-epoch evaluation of the first run feeds the per-Δ figures.
    let eval = out.join("eval");
    sagnn::harness::cmd_eval(&cfg, runs[0].join("policy.json"), &data, &eval, false)?;
    cmd_baseline(&cfg.baseline.variants(), &data, &cfg.eval.deltas, out.join("baselines"))?;

    let inputs = ReportInputs {
        runs,
        eval: Some(eval),
        baselines: Some(out.join("baselines")),
    };
    let figs = out.join("figures");
    cmd_report(&inputs, &figs)?;
    let text = std::fs::read_to_string(figs.join("fig2_violation.csv"))?;
    print!("{text}");
    println!("figure feeds in {}", figs.display());
    Ok(())
}
