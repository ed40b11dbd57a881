use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sgan::data::{
    ade, collision_rate, fde, linear_baseline, min_of_n, write_dump, DumpRow, Metric,
    MetricsReport, PredictionSample, Scene, METRICS_HEADER,
};
use sgan::sgan::{substream, EpochLog, Generator, Sgan};

use crate::corpus::{fold_dir, load_folds, load_set, Fold};
use crate::run_config::RunConfig;
use crate::variant::Variant;

pub const TRAIN_LOG_HEADER: &str = "epoch,d_loss,g_adv,g_variety";

/// Per-scene sampling streams start here so they never collide with the
/// small named substreams used during training.
const EVAL_STREAM_BASE: u64 = 1 << 32;

/// Noise source for scene `index`. Depends only on the seed and the index, so
/// results do not change with the worker count.
pub fn scene_rng(seed: u64, index: usize) -> ChaCha8Rng {
    substream(seed, EVAL_STREAM_BASE + index as u64)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub fn write_train_log(path: &Path, logs: &[EpochLog]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{TRAIN_LOG_HEADER}")?;
    for l in logs {
        writeln!(w, "{},{},{},{}", l.epoch, l.d_loss, l.g_adv, l.g_variety)?;
    }
    w.flush()?;
    Ok(())
}

/// What `cmd_train` produced for one fold.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub fold: String,
    pub checkpoint: PathBuf,
    pub log: PathBuf,
    pub epochs: Vec<EpochLog>,
}

fn train_model(
    cfg: &RunConfig,
    fold: &Fold,
    checkpoint: PathBuf,
    log: PathBuf,
) -> Result<TrainOutcome> {
    let model_cfg = &cfg.model;
    let mut model = Sgan::new(model_cfg.clone())?;
    let every = cfg.log_every;
    let epochs = model
        .train(&fold.train, |log| {
            if every > 0 && (log.epoch + 1) % every == 0 {
                eprintln!(
                    "[{}] epoch {:>4}  d {:.4}  adv {:.4}  l2 {:.4}",
                    fold.name,
                    log.epoch + 1,
                    log.d_loss,
                    log.g_adv,
                    log.g_variety
                );
            }
        })
        .with_context(|| format!("training fold {}", fold.name))?;
    create(&checkpoint)?;
    model.save(&checkpoint)?;
    write_train_log(&log, &epochs)?;
    Ok(TrainOutcome {
        fold: fold.name.clone(),
        checkpoint,
        log,
        epochs,
    })
}

/// Trains one model per selected fold and writes `model.ckpt` and
/// `train_log.csv` into the fold's output directory.
pub fn cmd_train(cfg: &RunConfig) -> Result<Vec<TrainOutcome>> {
    if !cfg.variant_tag().is_trainable() {
        bail!("the linear baseline has nothing to train");
    }
    let folds = load_folds(cfg)?;
    let n = folds.len();
    folds
        .iter()
        .map(|f| {
            let dir = fold_dir(cfg, &f.name, n);
            let checkpoint = match (&cfg.checkpoint, n) {
                (Some(p), 1) => p.clone(),
                _ => dir.join("model.ckpt"),
            };
            train_model(cfg, f, checkpoint, dir.join("train_log.csv"))
        })
        .collect()
}

/// Draws `n` samples for every scene, sharding scenes across `workers`
/// threads.
pub fn sample_scenes(
    generator: &Generator,
    scenes: &[Scene],
    n: usize,
    per_person: bool,
    seed: u64,
    workers: usize,
) -> Result<Vec<Vec<PredictionSample>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    let out: sgan::Result<Vec<_>> = pool.install(|| {
        scenes
            .par_iter()
            .enumerate()
            .map(|(i, s)| generator.sample(s, n, per_person, &mut scene_rng(seed, i)))
            .collect()
    });
    Ok(out?)
}

/// Scores precomputed samples into one report row.
pub fn score(
    fold: &str,
    model: &str,
    scenes: &[Scene],
    samples: &[Vec<PredictionSample>],
    collision_threshold: f64,
    seconds: f64,
) -> Result<MetricsReport> {
    ensure!(!scenes.is_empty(), "fold {fold} has no test scenes");
    let gts: Vec<_> = scenes.iter().map(Scene::futures).collect();
    let (mut first_ade, mut first_fde) = (0.0, 0.0);
    for (gt, s) in gts.iter().zip(samples) {
        let first = s.first().context("no samples drawn")?;
        first_ade += ade(gt, &first.positions)?;
        first_fde += fde(gt, &first.positions)?;
    }
    let all: Vec<PredictionSample> = samples.iter().flatten().cloned().collect();
    let report = MetricsReport {
        fold: fold.to_owned(),
        model: model.to_owned(),
        n_samples: samples[0].len(),
        ade: min_of_n(Metric::Ade, &gts, samples)?,
        fde: min_of_n(Metric::Fde, &gts, samples)?,
        mean_ade: first_ade / scenes.len() as f64,
        mean_fde: first_fde / scenes.len() as f64,
        collision_rate: collision_rate(&all, collision_threshold),
        n_scenes: scenes.len(),
        n_people: scenes.iter().map(Scene::n_people).sum(),
        seconds,
    };
    ensure!(
        [report.ade, report.fde, report.mean_ade, report.mean_fde]
            .iter()
            .all(|v| v.is_finite()),
        "non-finite metrics for {model} on {fold}"
    );
    Ok(report)
}

fn eval_generator(cfg: &RunConfig, fold: &Fold, name: &str, model: &Sgan) -> Result<MetricsReport> {
    let m = &model.cfg;
    ensure!(
        (m.t_obs, m.t_pred) == (cfg.model.t_obs, cfg.model.t_pred),
        "checkpoint was trained with t_obs {} / t_pred {}, but the run uses {} / {}",
        m.t_obs,
        m.t_pred,
        cfg.model.t_obs,
        cfg.model.t_pred
    );
    ensure!(cfg.n_samples >= 1, "evaluation needs at least one sample");
    let start = Instant::now();
    let samples = sample_scenes(
        &model.generator,
        &fold.test,
        cfg.n_samples,
        m.z_per_person,
        cfg.model.seed,
        cfg.workers,
    )?;
    score(
        &fold.name,
        name,
        &fold.test,
        &samples,
        cfg.collision_threshold,
        start.elapsed().as_secs_f64(),
    )
}

fn eval_linear(cfg: &RunConfig, fold: &Fold) -> Result<MetricsReport> {
    let start = Instant::now();
    let samples: Vec<Vec<PredictionSample>> =
        fold.test.iter().map(|s| vec![linear_baseline(s)]).collect();
    score(
        &fold.name,
        "linear",
        &fold.test,
        &samples,
        cfg.collision_threshold,
        start.elapsed().as_secs_f64(),
    )
}

/// An lstm-only model for the fold, reusing a saved one when present.
fn lstm_only(cfg: &RunConfig, fold: &Fold, dir: &Path) -> Result<Sgan> {
    let dir = dir.join("lstm-only");
    let path = dir.join("model.ckpt");
    if path.exists() {
        return Ok(Sgan::load(&path)?);
    }
    let mut c = cfg.clone();
    c.variant = Some(Variant::LstmOnly);
    c.finalize()?;
    train_model(&c, fold, path.clone(), dir.join("train_log.csv"))?;
    Ok(Sgan::load(&path)?)
}

/// Evaluates every selected fold and writes `metrics.csv` to `out_dir`.
/// With `baselines`, linear and lstm-only rows are added per fold.
pub fn cmd_eval(cfg: &RunConfig, baselines: bool) -> Result<Vec<MetricsReport>> {
    let folds = load_folds(cfg)?;
    let n = folds.len();
    let variant = cfg.variant_tag();
    let mut rows = Vec::new();
    for fold in &folds {
        let dir = fold_dir(cfg, &fold.name, n);
        if variant == Variant::Linear {
            rows.push(eval_linear(cfg, fold)?);
        } else {
            let path = cfg
                .checkpoint
                .clone()
                .unwrap_or_else(|| dir.join("model.ckpt"));
            let model = Sgan::load(&path).with_context(|| format!("loading {}", path.display()))?;
            let name = if variant == Variant::LstmOnly {
                variant.to_string()
            } else {
                Variant::of(&model.cfg).to_string()
            };
            rows.push(eval_generator(cfg, fold, &name, &model)?);
        }
        if baselines {
            if variant != Variant::Linear {
                rows.push(eval_linear(cfg, fold)?);
            }
            if variant != Variant::LstmOnly {
                let model = lstm_only(cfg, fold, &dir)?;
                rows.push(eval_generator(cfg, fold, "lstm-only", &model)?);
            }
        }
    }
    let path = cfg.out_dir.join("metrics.csv");
    let mut w = create(&path)?;
    writeln!(w, "{METRICS_HEADER}")?;
    for r in &rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(rows)
}

/// Scenes to predict on: windows of `scene_file` when given, otherwise the
/// first selected fold's test scenes.
pub fn prediction_scenes(cfg: &RunConfig, scene_file: Option<&Path>) -> Result<Vec<Scene>> {
    match scene_file {
        Some(p) => Ok(load_set(p, cfg.model.t_obs, cfg.model.t_pred, cfg.stride)?.scenes),
        None => Ok(load_folds(cfg)?.swap_remove(0).test),
    }
}

fn load_checkpoint(cfg: &RunConfig) -> Result<Sgan> {
    let path = cfg.checkpoint_path();
    let model = Sgan::load(&path).with_context(|| format!("loading {}", path.display()))?;
    ensure!(
        (model.cfg.t_obs, model.cfg.t_pred) == (cfg.model.t_obs, cfg.model.t_pred),
        "checkpoint {} expects t_obs {} / t_pred {}",
        path.display(),
        model.cfg.t_obs,
        model.cfg.t_pred
    );
    Ok(model)
}

fn dump_rows(scene_id: usize, scene: &Scene, samples: &[PredictionSample]) -> Result<Vec<DumpRow>> {
    ensure!(
        samples.iter().all(PredictionSample::is_finite),
        "non-finite prediction in scene {scene_id}"
    );
    let ids: Vec<i64> = scene.people.iter().map(|p| p.ped_id).collect();
    Ok(samples
        .iter()
        .enumerate()
        .flat_map(|(k, s)| DumpRow::from_sample(scene_id, k, &ids, s))
        .collect())
}

fn write_rows(path: &Path, rows: &[DumpRow]) -> Result<()> {
    let mut w = create(path)?;
    write_dump(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

/// Writes `n_samples` predictions per scene in dump format to `output`.
pub fn cmd_predict(cfg: &RunConfig, scene_file: Option<&Path>, output: &Path) -> Result<usize> {
    let model = load_checkpoint(cfg)?;
    let scenes = prediction_scenes(cfg, scene_file)?;
    let samples = sample_scenes(
        &model.generator,
        &scenes,
        cfg.n_samples,
        model.cfg.z_per_person,
        cfg.model.seed,
        cfg.workers,
    )?;
    let mut rows = Vec::new();
    for (i, (scene, s)) in scenes.iter().zip(&samples).enumerate() {
        rows.extend(dump_rows(i, scene, s)?);
    }
    write_rows(output, &rows)?;
    Ok(rows.len())
}

/// A latent direction: a coordinate axis or an explicit vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    Axis(usize),
    Vector(Vec<f64>),
}

impl Direction {
    pub fn resolve(&self, noise_dim: usize) -> Result<Vec<f64>> {
        match self {
            Direction::Axis(i) => {
                ensure!(
                    *i < noise_dim,
                    "direction index {i} out of range for noise dimension {noise_dim}"
                );
                let mut v = vec![0.0; noise_dim];
                v[*i] = 1.0;
                Ok(v)
            }
            Direction::Vector(v) => {
                ensure!(
                    v.len() == noise_dim,
                    "direction has {} entries, noise dimension is {noise_dim}",
                    v.len()
                );
                Ok(v.clone())
            }
        }
    }
}

/// Walks the noise space along `direction` for one scene; sample id `k`
/// holds the prediction at `alphas[k]`.
pub fn cmd_sweep(
    cfg: &RunConfig,
    scene_file: Option<&Path>,
    scene_index: usize,
    direction: &Direction,
    alphas: &[f64],
    output: &Path,
) -> Result<usize> {
    let model = load_checkpoint(cfg)?;
    let scenes = prediction_scenes(cfg, scene_file)?;
    let scene = scenes
        .get(scene_index)
        .with_context(|| format!("scene {scene_index} out of range ({} scenes)", scenes.len()))?;
    let dir = direction.resolve(model.generator.noise_dim())?;
    let samples = model.generator.latent_sweep(scene, &dir, alphas)?;
    let rows = dump_rows(scene_index, scene, &samples)?;
    write_rows(output, &rows)?;
    Ok(rows.len())
}
