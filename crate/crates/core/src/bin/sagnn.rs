use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sagnn::harness::{cmd_baseline, cmd_eval, cmd_gen_data, cmd_report, cmd_train, ReportInputs, RunConfig};

#[derive(Parser)]
#[command(name = "sagnn", about = "State-augmented GNN link scheduling experiments")]
struct Cli {
    /// TOML run configuration; missing sections use defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the dataset, training and baseline seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `out_dir` from the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train and test graphs.
    GenData,
    /// Train a policy; evaluates on the test split during training.
    Train {
        #[arg(long)]
        data: PathBuf,
    },
    /// Execute a checkpoint on the test split.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Also write per-(graph, requirement) schedules and duals.
        #[arg(long)]
        traces: bool,
    },
    /// Run heuristic baselines on the test split.
    Baseline {
        #[arg(long)]
        data: PathBuf,
        /// Variant label, e.g. mis_random_ca; repeatable. Default: all four.
        #[arg(long = "variant")]
        variants: Vec<String>,
    },
    /// Build figure-feed CSVs.
    Report {
        /// Training run directory; repeatable.
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        eval: PathBuf,
        #[arg(long)]
        baselines: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> sagnn::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.dataset.seed = seed;
        cfg.train.seed = seed;
        cfg.baseline.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    cfg.validate()?;
    let out = cfg.out_dir.clone();

    match cli.command {
        Command::GenData => {
            let m = cmd_gen_data(&cfg.dataset, &out)?;
            println!(
                "{} graphs, mean K {:.1}, mean conflict degree {:.2} -> {}",
                m.summary.n_graphs,
                m.summary.mean_n_links,
                m.summary.mean_conflict_degree,
                out.display()
            );
        }
        Command::Train { data } => {
            let (_, log) = cmd_train(&cfg, &data, &out)?;
            println!("{} epochs, {} updates -> {}", log.epochs.len(), log.total_updates(), out.display());
        }
        Command::Eval {
            data,
            checkpoint,
            traces,
        } => {
            for r in cmd_eval(&cfg, &checkpoint, &data, &out, traces)? {
                let a = &r.aggregate;
                println!(
                    "delta {}: objective {:.4} violation {:.4} efficiency {:.4}",
                    a.delta,
                    a.objective_fraction,
                    a.mean_violation,
                    a.efficiency()
                );
            }
        }
        Command::Baseline { data, variants } => {
            let all = cfg.baseline.variants();
            let selected: Vec<_> = if variants.is_empty() {
                all
            } else {
                variants
                    .iter()
                    .map(|v| {
                        all.iter().find(|c| &c.label() == v).cloned().ok_or_else(|| {
                            let labels: Vec<_> = all.iter().map(|c| c.label()).collect();
                            sagnn::Error::Config(format!("unknown variant {v:?}; expected one of {}", labels.join(", ")))
                        })
                    })
                    .collect::<sagnn::Result<_>>()?
            };
            for r in cmd_baseline(&selected, &data, &cfg.eval.deltas, &out)? {
                for (_, a) in &r.per_delta {
                    println!("{} delta {}: objective {:.4}", r.config.label(), a.delta, a.objective_fraction);
                }
            }
        }
        Command::Report { runs, eval, baselines } => {
            let inputs = ReportInputs {
                runs,
                eval: Some(eval),
                baselines,
            };
            cmd_report(&inputs, &out)?;
            println!("figure feeds -> {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
