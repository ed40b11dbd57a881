use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use sgan::data::{parse_key_values, ScenarioKind};
use sgan::sgan::{PoolMode, SganConfig};

use crate::variant::Variant;

/// Everything a command needs: the model configuration plus data, output
/// and evaluation settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: SganConfig,
    pub variant: Option<Variant>,
    /// Directory of `<set>.txt` files with optional `<set>.cfg` sidecars.
    /// Without it, a synthetic scenario corpus is used.
    pub data_dir: Option<PathBuf>,
    /// Held-out set name, or `all` for every leave-one-out fold.
    pub fold: Option<String>,
    pub scenario: ScenarioKind,
    pub n_scenes: usize,
    pub n_test_scenes: usize,
    /// Standard deviation of synthetic positional noise, meters.
    pub jitter: f64,
    pub stride: usize,
    pub n_samples: usize,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub collision_threshold: f64,
    /// Print a progress line every this many epochs (0 = silent).
    pub log_every: usize,
    explicit_k: Option<usize>,
    explicit_pool: Option<PoolMode>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: SganConfig::default(),
            variant: None,
            data_dir: None,
            fold: None,
            scenario: ScenarioKind::MeetHeadOn,
            n_scenes: 200,
            n_test_scenes: 100,
            jitter: 0.02,
            stride: 1,
            n_samples: 20,
            workers: 1,
            out_dir: PathBuf::from("out"),
            checkpoint: None,
            collision_threshold: 0.10,
            log_every: 0,
            explicit_k: None,
            explicit_pool: None,
        }
    }
}

impl RunConfig {
    /// Reads `key = value` lines; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        for (k, v) in parse_key_values(&text, path)? {
            cfg.set(&k, &v)
                .with_context(|| format!("in {}", path.display()))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| anyhow::anyhow!("bad value {v:?} for {key}"))
        }
        match key {
            "variant" => self.variant = Some(v.parse()?),
            "data_dir" => self.data_dir = Some(PathBuf::from(v)),
            "fold" => self.fold = Some(v.to_owned()),
            "scenario" => self.scenario = v.parse()?,
            "n_scenes" => self.n_scenes = num(key, v)?,
            "n_test_scenes" => self.n_test_scenes = num(key, v)?,
            "jitter" => self.jitter = num(key, v)?,
            "stride" => self.stride = num(key, v)?,
            "n_samples" => self.n_samples = num(key, v)?,
            "workers" => self.workers = num(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "checkpoint" => self.checkpoint = Some(PathBuf::from(v)),
            "collision_threshold" => self.collision_threshold = num(key, v)?,
            "log_every" => self.log_every = num(key, v)?,
            "k_variety" | "k" => {
                self.model.set(key, v)?;
                self.explicit_k = Some(self.model.k_variety);
            }
            "pool_mode" => {
                self.model.set(key, v)?;
                self.explicit_pool = Some(self.model.pool_mode);
            }
            _ => self.model.set(key, v)?,
        }
        Ok(())
    }

    /// Reconciles the variant tag with explicit `k` / pool settings and
    /// validates the result.
    pub fn finalize(&mut self) -> Result<()> {
        match self.variant {
            Some(Variant::Sgan { k, pooling }) => {
                if let Some(ek) = self.explicit_k {
                    ensure!(
                        ek == k,
                        "variant {} implies k = {k}, but k = {ek} was given",
                        Variant::Sgan { k, pooling }
                    );
                }
                self.model.k_variety = k;
                self.model.pool_mode = match (pooling, self.explicit_pool) {
                    (true, Some(PoolMode::None))
                    | (false, Some(PoolMode::Once | PoolMode::PerStep)) => {
                        bail!(
                            "variant {} conflicts with pool_mode {}",
                            Variant::Sgan { k, pooling },
                            self.model.pool_mode
                        )
                    }
                    (true, Some(mode)) => mode,
                    (true, None) => PoolMode::Once,
                    (false, _) => PoolMode::None,
                };
            }
            Some(Variant::LstmOnly) => {
                ensure!(
                    self.explicit_k.is_none_or(|k| k == 1),
                    "lstm-only uses k = 1"
                );
                ensure!(
                    self.explicit_pool.is_none_or(|p| p == PoolMode::None),
                    "lstm-only has no pooling"
                );
                self.model.k_variety = 1;
                self.model.pool_mode = PoolMode::None;
                self.model.adv_weight = 0.0;
            }
            Some(Variant::Linear) | None => {}
        }
        self.model.validate()?;
        ensure!(self.stride >= 1, "stride must be at least 1");
        ensure!(self.workers >= 1, "workers must be at least 1");
        ensure!(
            self.n_scenes >= 1 && self.n_test_scenes >= 1,
            "scene counts must be at least 1"
        );
        ensure!(
            self.collision_threshold > 0.0,
            "collision threshold must be positive"
        );
        ensure!(
            self.jitter >= 0.0 && self.jitter.is_finite(),
            "jitter must be >= 0"
        );
        Ok(())
    }

    pub fn variant_tag(&self) -> Variant {
        self.variant.unwrap_or_else(|| Variant::of(&self.model))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint
            .clone()
            .unwrap_or_else(|| self.out_dir.join("model.ckpt"))
    }
}
