use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const EMBED_DIM: usize = 16;
pub const ENCODER_HIDDEN: usize = 16;
pub const DECODER_HIDDEN: usize = 32;
pub const DISC_HIDDEN: usize = 48;
pub const POOL_DIM: usize = 32;
pub const MLP_DIM: usize = 64;

/// Where social pooling happens during prediction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PoolMode {
    /// Pool encoder states once, when the decoder is initialized.
    #[default]
    Once,
    /// Additionally re-pool decoder states at every later step.
    PerStep,
    /// No social context (plain LSTM encoder-decoder).
    None,
}

impl PoolMode {
    pub fn name(self) -> &'static str {
        match self {
            PoolMode::Once => "once",
            PoolMode::PerStep => "per_step",
            PoolMode::None => "none",
        }
    }

    /// Pooling invocations for one prediction of `t_pred` steps.
    pub fn pool_calls(self, t_pred: usize) -> usize {
        match self {
            PoolMode::Once => 1,
            PoolMode::PerStep => t_pred,
            PoolMode::None => 0,
        }
    }
}

impl fmt::Display for PoolMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PoolMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "once" => Ok(PoolMode::Once),
            "per_step" | "per-step" => Ok(PoolMode::PerStep),
            "none" => Ok(PoolMode::None),
            _ => Err(Error::Config(format!("unknown pool mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SganConfig {
    pub t_obs: usize,
    pub t_pred: usize,
    pub noise_dim: usize,
    /// Samples drawn per scene for the variety loss.
    pub k_variety: usize,
    pub pool_mode: PoolMode,
    pub batch_scenes: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// Weight on the adversarial generator term; 0 trains on the variety loss alone.
    pub adv_weight: f64,
    /// Weight on the variety loss.
    pub variety_weight: f64,
    /// Draw a separate noise vector for every person instead of one per scene.
    pub z_per_person: bool,
}

impl Default for SganConfig {
    fn default() -> Self {
        Self {
            t_obs: 8,
            t_pred: 8,
            noise_dim: 8,
            k_variety: 1,
            pool_mode: PoolMode::Once,
            batch_scenes: 64,
            epochs: 200,
            lr: 1e-3,
            seed: 0,
            adv_weight: 1.0,
            variety_weight: 1.0,
            z_per_person: false,
        }
    }
}

impl SganConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.t_obs < 2 {
            return fail(format!("t_obs must be at least 2, got {}", self.t_obs));
        }
        if self.t_pred < 1 {
            return fail("t_pred must be at least 1".into());
        }
        if self.noise_dim >= DECODER_HIDDEN {
            return fail(format!(
                "noise_dim must be below the decoder width {DECODER_HIDDEN}, got {}",
                self.noise_dim
            ));
        }
        if self.k_variety < 1 {
            return fail("k_variety must be at least 1".into());
        }
        if self.batch_scenes < 1 {
            return fail("batch_scenes must be at least 1".into());
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return fail(format!("lr must be positive, got {}", self.lr));
        }
        for (name, w) in [
            ("adv_weight", self.adv_weight),
            ("variety_weight", self.variety_weight),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return fail(format!("{name} must be a non-negative number, got {w}"));
            }
        }
        Ok(())
    }

    /// Width of the context vector that is concatenated with the noise.
    pub fn context_dim(&self) -> usize {
        DECODER_HIDDEN - self.noise_dim
    }

    pub fn to_meta(&self) -> BTreeMap<String, String> {
        [
            ("t_obs", self.t_obs.to_string()),
            ("t_pred", self.t_pred.to_string()),
            ("noise_dim", self.noise_dim.to_string()),
            ("k_variety", self.k_variety.to_string()),
            ("pool_mode", self.pool_mode.to_string()),
            ("batch_scenes", self.batch_scenes.to_string()),
            ("epochs", self.epochs.to_string()),
            ("lr", self.lr.to_string()),
            ("seed", self.seed.to_string()),
            ("adv_weight", self.adv_weight.to_string()),
            ("variety_weight", self.variety_weight.to_string()),
            ("z_per_person", self.z_per_person.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect()
    }

    /// Starts from the defaults and applies every recognized key.
    pub fn from_meta(meta: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in meta {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its text form. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
        }
        match key {
            "t_obs" => self.t_obs = parse(key, value)?,
            "t_pred" => self.t_pred = parse(key, value)?,
            "noise_dim" => self.noise_dim = parse(key, value)?,
            "k_variety" | "k" => self.k_variety = parse(key, value)?,
            "pool_mode" => self.pool_mode = value.trim().parse()?,
            "batch_scenes" => self.batch_scenes = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "adv_weight" => self.adv_weight = parse(key, value)?,
            "variety_weight" => self.variety_weight = parse(key, value)?,
            "z_per_person" => self.z_per_person = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SganConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.context_dim() + cfg.noise_dim, DECODER_HIDDEN);
        assert_eq!(cfg.context_dim(), 24);
    }

    #[test]
    fn invalid_fields() {
        let bad = [
            SganConfig {
                t_obs: 1,
                ..Default::default()
            },
            SganConfig {
                t_pred: 0,
                ..Default::default()
            },
            SganConfig {
                noise_dim: 32,
                ..Default::default()
            },
            SganConfig {
                k_variety: 0,
                ..Default::default()
            },
            SganConfig {
                lr: 0.0,
                ..Default::default()
            },
            SganConfig {
                adv_weight: -1.0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn meta_roundtrip() {
        let cfg = SganConfig {
            t_pred: 12,
            k_variety: 20,
            pool_mode: PoolMode::PerStep,
            lr: 3e-4,
            seed: u64::MAX,
            adv_weight: 0.0,
            ..Default::default()
        };
        assert_eq!(SganConfig::from_meta(&cfg.to_meta()).unwrap(), cfg);
    }

    #[test]
    fn pool_calls_per_mode() {
        assert_eq!(PoolMode::Once.pool_calls(12), 1);
        assert_eq!(PoolMode::PerStep.pool_calls(12), 12);
        assert_eq!(PoolMode::None.pool_calls(12), 0);
        assert!("sometimes".parse::<PoolMode>().is_err());
    }
}
