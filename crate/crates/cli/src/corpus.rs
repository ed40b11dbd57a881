use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rand_chacha::ChaCha8Rng;
use sgan::data::{
    build_scenes, leave_one_out, parse_dataset, resample, synth_scenarios, DatasetMeta, Scene,
};
use sgan::sgan::{substream, STREAM_JITTER};

use crate::run_config::RunConfig;

/// Substream for the synthetic held-out scenes, kept apart from the
/// training jitter so the two corpora never share draws.
pub const STREAM_TEST_JITTER: u64 = 5;

/// One train/test split.
#[derive(Clone, Debug)]
pub struct Fold {
    pub name: String,
    pub train: Vec<Scene>,
    pub test: Vec<Scene>,
}

/// Scenes cut from one dataset file.
#[derive(Clone, Debug)]
pub struct NamedSet {
    pub name: String,
    pub path: PathBuf,
    pub scenes: Vec<Scene>,
}

/// Parses, resamples and windows one dataset file using its sidecar.
pub fn load_set(path: &Path, t_obs: usize, t_pred: usize, stride: usize) -> Result<NamedSet> {
    let meta = DatasetMeta::load_for(path)?;
    let records = parse_dataset(path).with_context(|| format!("loading {}", path.display()))?;
    let trajectories = resample(&records, meta.frame_rate).trajectories;
    Ok(NamedSet {
        name: meta.name,
        path: path.to_owned(),
        scenes: build_scenes(&trajectories, t_obs, t_pred, stride),
    })
}

/// Every `*.txt` under `dir`, sorted by file name.
pub fn load_dir(dir: &Path, t_obs: usize, t_pred: usize, stride: usize) -> Result<Vec<NamedSet>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading data directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    ensure!(!paths.is_empty(), "no .txt datasets in {}", dir.display());
    paths
        .iter()
        .map(|p| load_set(p, t_obs, t_pred, stride))
        .collect()
}

fn synthetic(cfg: &RunConfig, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Scene>> {
    let m = &cfg.model;
    Ok(synth_scenarios(
        cfg.scenario,
        n,
        m.t_obs,
        m.t_pred,
        cfg.jitter,
        rng,
    )?)
}

/// The folds selected by `cfg`: leave-one-out over the files in
/// `data_dir`, or a single synthetic fold named after the scenario.
pub fn load_folds(cfg: &RunConfig) -> Result<Vec<Fold>> {
    let (t_obs, t_pred) = (cfg.model.t_obs, cfg.model.t_pred);
    let Some(dir) = &cfg.data_dir else {
        let seed = cfg.model.seed;
        let train = synthetic(cfg, cfg.n_scenes, &mut substream(seed, STREAM_JITTER))?;
        let test = synthetic(
            cfg,
            cfg.n_test_scenes,
            &mut substream(seed, STREAM_TEST_JITTER),
        )?;
        let name = cfg.scenario.name().to_owned();
        if let Some(f) = cfg.fold.as_deref().filter(|f| *f != "all" && *f != name) {
            bail!("fold {f:?} not found; the synthetic corpus has the single fold {name:?}");
        }
        return Ok(vec![Fold { name, train, test }]);
    };

    let sets = load_dir(dir, t_obs, t_pred, cfg.stride)?;
    let names: Vec<String> = sets.iter().map(|s| s.name.clone()).collect();
    let splits = leave_one_out(&names)?;
    let wanted = cfg.fold.as_deref().unwrap_or("all");
    if wanted != "all" && !names.iter().any(|n| n == wanted) {
        bail!("fold {wanted:?} not found among {}", names.join(", "));
    }
    let scenes_of = |name: &str| -> &[Scene] {
        &sets
            .iter()
            .find(|s| s.name == name)
            .expect("known set")
            .scenes
    };
    let mut folds = Vec::new();
    for split in splits
        .into_iter()
        .filter(|s| wanted == "all" || s.test == wanted)
    {
        let train: Vec<Scene> = split
            .train
            .iter()
            .flat_map(|n| scenes_of(n).iter().cloned())
            .collect();
        ensure!(
            !train.is_empty(),
            "fold {} has no training scenes",
            split.test
        );
        folds.push(Fold {
            test: scenes_of(&split.test).to_vec(),
            name: split.test,
            train,
        });
    }
    Ok(folds)
}

/// Where a fold's model and log live: `out_dir` itself for a single fold,
/// `out_dir/<fold>` when several are run together.
pub fn fold_dir(cfg: &RunConfig, fold: &str, n_folds: usize) -> PathBuf {
    if n_folds > 1 {
        cfg.out_dir.join(fold)
    } else {
        cfg.out_dir.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, rows: usize) {
        let mut text = String::new();
        for f in 0..rows {
            for p in 0..2 {
                text.push_str(&format!(
                    "{f}\t{p}\t{:.2}\t{:.2}\n",
                    f as f64 * 0.5,
                    p as f64
                ));
            }
        }
        std::fs::write(dir.join(format!("{name}.txt")), text).unwrap();
    }

    #[test]
    fn leave_one_out_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["a", "b", "c"] {
            write(dir.path(), name, 20);
        }
        std::fs::write(dir.path().join("c.cfg"), "name = charlie\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.data_dir = Some(dir.path().to_owned());
        let folds = load_folds(&cfg).unwrap();
        let names: Vec<&str> = folds.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "charlie"]);
        // 20 frames, 16-step windows, stride 1: 5 scenes per set.
        assert!(folds
            .iter()
            .all(|f| f.test.len() == 5 && f.train.len() == 10));

        cfg.fold = Some("b".into());
        assert_eq!(load_folds(&cfg).unwrap().len(), 1);
        cfg.fold = Some("zz".into());
        assert!(load_folds(&cfg).is_err());
    }

    #[test]
    fn synthetic_fold_is_reproducible() {
        let cfg = RunConfig::default();
        let a = load_folds(&cfg).unwrap();
        let b = load_folds(&cfg).unwrap();
        assert_eq!(a[0].train, b[0].train);
        assert_ne!(a[0].train[0], a[0].test[0]);
        assert_eq!(a[0].train.len(), cfg.n_scenes);
    }
}
