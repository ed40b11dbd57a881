use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sgan_cli::{
    cmd_eval, cmd_predict, cmd_sweep, cmd_train, run_bench, write_bench, Direction, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "sgan",
    version,
    about = "Train and evaluate social GAN trajectory forecasters"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every command. Flags override the config file.
#[derive(Args)]
struct Common {
    /// `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Model tag: kV, kVP, lstm-only or linear.
    #[arg(long, global = true)]
    variant: Option<String>,
    #[arg(long, global = true)]
    t_obs: Option<usize>,
    #[arg(long, global = true)]
    t_pred: Option<usize>,
    /// Samples in the variety loss.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    n_samples: Option<usize>,
    /// once, per_step or none.
    #[arg(long, global = true)]
    pool_mode: Option<String>,
    /// Directory of `<set>.txt` datasets; a synthetic corpus is used without it.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Held-out set name, or `all`.
    #[arg(long, global = true)]
    fold: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    /// Synthetic scenario kind.
    #[arg(long, global = true)]
    scenario: Option<String>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    /// Any other config key, as `key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model per fold.
    Train,
    /// Min-of-N ADE/FDE and collision rate per fold.
    Eval {
        /// Also score the linear and lstm-only baselines.
        #[arg(long)]
        baselines: bool,
    },
    /// Dump N sampled futures per scene.
    Predict {
        /// Dataset file to cut scenes from instead of the test fold.
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Dump predictions along one direction of the noise space.
    Sweep {
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        scene: usize,
        /// Noise axis index, or a comma-separated vector.
        #[arg(long, default_value = "0")]
        direction: String,
        /// Comma-separated step sizes along the direction.
        #[arg(long, default_value = "-2,-1,0,1,2")]
        alphas: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Time prediction with and without per-step pooling.
    Bench {
        #[arg(long, default_value = "4,8,16,32")]
        sizes: String,
        #[arg(long, default_value = "8,12")]
        horizons: String,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("bad {what} entry {v:?}"))
        })
        .collect()
}

fn build_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let flags: [(&str, Option<String>); 14] = [
        ("seed", c.seed.map(|v| v.to_string())),
        ("variant", c.variant.clone()),
        ("t_obs", c.t_obs.map(|v| v.to_string())),
        ("t_pred", c.t_pred.map(|v| v.to_string())),
        ("k", c.k.map(|v| v.to_string())),
        ("n_samples", c.n_samples.map(|v| v.to_string())),
        ("pool_mode", c.pool_mode.clone()),
        (
            "data_dir",
            c.data_dir.as_ref().map(|p| p.display().to_string()),
        ),
        ("fold", c.fold.clone()),
        (
            "out_dir",
            c.out_dir.as_ref().map(|p| p.display().to_string()),
        ),
        ("workers", c.workers.map(|v| v.to_string())),
        (
            "checkpoint",
            c.checkpoint.as_ref().map(|p| p.display().to_string()),
        ),
        ("scenario", c.scenario.clone()),
        ("epochs", c.epochs.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)
                .with_context(|| format!("--{}", key.replace('_', "-")))?;
        }
    }
    for kv in &c.sets {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects key=value, got {kv:?}"))?;
        cfg.set(k.trim(), v)?;
    }
    cfg.finalize()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = build_config(&cli.common)?;
    match cli.command {
        Command::Train => {
            for out in cmd_train(&cfg)? {
                println!(
                    "{}: {} epochs -> {}",
                    out.fold,
                    out.epochs.len(),
                    out.checkpoint.display()
                );
            }
        }
        Command::Eval { baselines } => {
            let rows = cmd_eval(&cfg, baselines)?;
            println!("{}", sgan::data::METRICS_HEADER);
            for r in rows {
                println!("{}", r.csv_row());
            }
        }
        Command::Predict { scenes, output } => {
            let out = output.unwrap_or_else(|| cfg.out_dir.join("predictions.txt"));
            let n = cmd_predict(&cfg, scenes.as_deref(), &out)?;
            println!("{n} rows -> {}", out.display());
        }
        Command::Sweep {
            scenes,
            scene,
            direction,
            alphas,
            output,
        } => {
            let dir = match direction.trim().parse::<usize>() {
                Ok(i) => Direction::Axis(i),
                Err(_) => Direction::Vector(list("direction", &direction)?),
            };
            let alphas: Vec<f64> = list("alpha", &alphas)?;
            let out = output.unwrap_or_else(|| cfg.out_dir.join("sweep.txt"));
            let n = cmd_sweep(&cfg, scenes.as_deref(), scene, &dir, &alphas, &out)?;
            println!("{n} rows -> {}", out.display());
        }
        Command::Bench {
            sizes,
            horizons,
            reps,
            output,
        } => {
            let rows = run_bench(
                &cfg.model,
                &list("size", &sizes)?,
                &list("horizon", &horizons)?,
                reps,
            )?;
            match output {
                Some(p) => {
                    let f =
                        File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    write_bench(BufWriter::new(f), &rows)?;
                }
                None => write_bench(std::io::stdout().lock(), &rows)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
