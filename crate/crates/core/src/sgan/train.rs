use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::batch::SceneBatch;
use super::config::SganConfig;
use super::discriminator::Discriminator;
use super::generator::Generator;
use super::losses::{loss_adversarial, loss_discriminator, loss_variety};
use crate::data::Scene;
use crate::error::{Error, Result};
use crate::numerics::{AdamState, Checkpoint, Param, Parameters, Tape, Tensor, Var};

/// Named random substreams derived from one seed.
pub const STREAM_INIT: u64 = 1;
pub const STREAM_NOISE: u64 = 2;
pub const STREAM_JITTER: u64 = 3;
pub const STREAM_SHUFFLE: u64 = 4;

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepLosses {
    pub d_loss: f64,
    /// Unweighted adversarial generator term.
    pub g_adv: f64,
    /// Unweighted variety term.
    pub g_variety: f64,
}

/// Per-epoch means of [`StepLosses`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub d_loss: f64,
    pub g_adv: f64,
    pub g_variety: f64,
}

/// Generator, discriminator, their optimizers and the training randomness.
#[derive(Clone, Debug)]
pub struct Sgan {
    pub cfg: SganConfig,
    pub generator: Generator,
    pub discriminator: Discriminator,
    g_opt: AdamState,
    d_opt: AdamState,
    noise: ChaCha8Rng,
    shuffle: ChaCha8Rng,
    epoch: usize,
    step: usize,
}

impl Sgan {
    pub fn new(cfg: SganConfig) -> Result<Self> {
        cfg.validate()?;
        let mut init = substream(cfg.seed, STREAM_INIT);
        let generator = Generator::new(&cfg, &mut init);
        let discriminator = Discriminator::new(&cfg, &mut init);
        Ok(Self {
            g_opt: AdamState::new(cfg.lr),
            d_opt: AdamState::new(cfg.lr),
            noise: substream(cfg.seed, STREAM_NOISE),
            shuffle: substream(cfg.seed, STREAM_SHUFFLE),
            generator,
            discriminator,
            epoch: 0,
            step: 0,
            cfg,
        })
    }

    /// Completed optimizer steps.
    pub fn steps_done(&self) -> usize {
        self.step
    }

    fn diverged(&self, what: impl Into<String>) -> Error {
        Error::Divergence {
            epoch: self.epoch,
            step: self.step,
            what: what.into(),
        }
    }

    /// Re-labels errors raised inside the networks with the training position.
    fn locate(&self, e: Error) -> Error {
        match e {
            Error::Divergence { step, what, .. } => {
                self.diverged(format!("{what} at prediction step {step}"))
            }
            other => other,
        }
    }

    /// One discriminator update on the real batch and one detached generator sample.
    pub fn discriminator_step(&mut self, batch: &SceneBatch) -> Result<f64> {
        let z = self
            .generator
            .draw_noise(batch, self.cfg.z_per_person, &mut self.noise);
        let fake: Vec<Tensor> = {
            let mut tape = Tape::new();
            let out = self
                .generator
                .forward(&mut tape, batch, &z)
                .map_err(|e| self.locate(e))?;
            out.displacements
                .iter()
                .map(|&d| tape.value(d).clone())
                .collect()
        };
        let n = batch.n_rows();
        let mut tape = Tape::new();
        let real_in = Discriminator::real_inputs(&mut tape, batch);
        let fake_leaves: Vec<Var> = fake.into_iter().map(|t| tape.leaf(t)).collect();
        let fake_in = Discriminator::fake_inputs(&mut tape, batch, &fake_leaves);
        let joint = real_in
            .iter()
            .zip(&fake_in)
            .map(|(&r, &f)| tape.concat_rows(&[r, f]))
            .collect::<Result<Vec<Var>>>()?;
        let logits = self.discriminator.logits(&mut tape, &joint)?;
        let real = tape.gather(logits, &(0..n).collect::<Vec<_>>())?;
        let fake = tape.gather(logits, &(n..2 * n).collect::<Vec<_>>())?;
        let loss = loss_discriminator(&mut tape, real, fake)?;
        let value = tape.value(loss).item();
        if !value.is_finite() {
            return Err(self.diverged(format!("discriminator loss {value}")));
        }
        tape.backward(loss)?;
        self.discriminator.accumulate_grads(&tape);
        self.d_opt.step(&mut self.discriminator);
        self.discriminator.zero_grads();
        Ok(value)
    }

    /// One generator update from `k_variety` fresh samples per scene. The
    /// discriminator is evaluated but never modified.
    pub fn generator_step(&mut self, batch: &SceneBatch) -> Result<(f64, f64)> {
        let k = self.cfg.k_variety;
        let n = batch.n_rows();
        let copies = batch.repeat(k);
        let z = self
            .generator
            .draw_noise(&copies, self.cfg.z_per_person, &mut self.noise);
        let mut tape = Tape::new();
        let out = self
            .generator
            .forward(&mut tape, &copies, &z)
            .map_err(|e| self.locate(e))?;
        let pred = tape.concat_cols(&out.offsets)?;
        let gt = tape.leaf(batch.stacked_future());
        let samples = (0..k)
            .map(|c| tape.gather(pred, &(c * n..(c + 1) * n).collect::<Vec<_>>()))
            .collect::<Result<Vec<Var>>>()?;
        let variety = loss_variety(&mut tape, gt, &samples)?;
        let fake_in = Discriminator::fake_inputs(&mut tape, &copies, &out.displacements);
        let logits = self.discriminator.logits(&mut tape, &fake_in)?;
        let adv = loss_adversarial(&mut tape, logits);
        let weighted_v = tape.scale(variety, self.cfg.variety_weight);
        let total = if self.cfg.adv_weight > 0.0 {
            let weighted_a = tape.scale(adv, self.cfg.adv_weight);
            tape.add(weighted_a, weighted_v)?
        } else {
            weighted_v
        };
        let (adv_v, var_v) = (tape.value(adv).item(), tape.value(variety).item());
        if !tape.value(total).item().is_finite() {
            return Err(self.diverged(format!(
                "generator loss (adversarial {adv_v}, variety {var_v})"
            )));
        }
        tape.backward(total)?;
        self.generator.accumulate_grads(&tape);
        self.g_opt.step(&mut self.generator);
        self.generator.zero_grads();
        Ok((adv_v, var_v))
    }

    /// Discriminator update followed by generator update.
    pub fn train_step(&mut self, batch: &SceneBatch) -> Result<StepLosses> {
        if !batch.has_future() {
            return Err(Error::Data(
                "training batch has no ground-truth future".into(),
            ));
        }
        let d_loss = self.discriminator_step(batch)?;
        let (g_adv, g_variety) = self.generator_step(batch)?;
        self.step += 1;
        Ok(StepLosses {
            d_loss,
            g_adv,
            g_variety,
        })
    }

    /// One pass over `scenes` in shuffled batches.
    pub fn run_epoch(&mut self, scenes: &[Scene]) -> Result<EpochLog> {
        if scenes.is_empty() {
            return Err(Error::Empty("training scenes"));
        }
        let mut order: Vec<usize> = (0..scenes.len()).collect();
        order.shuffle(&mut self.shuffle);
        let mut sum = StepLosses::default();
        let mut count = 0;
        for chunk in order.chunks(self.cfg.batch_scenes) {
            let picked: Vec<&Scene> = chunk.iter().map(|&i| &scenes[i]).collect();
            let batch = SceneBatch::new(&picked, self.cfg.t_obs, self.cfg.t_pred, true)?;
            let l = self.train_step(&batch)?;
            sum.d_loss += l.d_loss;
            sum.g_adv += l.g_adv;
            sum.g_variety += l.g_variety;
            count += 1;
        }
        let log = EpochLog {
            epoch: self.epoch,
            d_loss: sum.d_loss / count as f64,
            g_adv: sum.g_adv / count as f64,
            g_variety: sum.g_variety / count as f64,
        };
        self.epoch += 1;
        Ok(log)
    }

    /// Runs `cfg.epochs` epochs, reporting each as it finishes.
    pub fn train(
        &mut self,
        scenes: &[Scene],
        mut on_epoch: impl FnMut(&EpochLog),
    ) -> Result<Vec<EpochLog>> {
        let mut logs = Vec::with_capacity(self.cfg.epochs);
        for _ in 0..self.cfg.epochs {
            let log = self.run_epoch(scenes)?;
            on_epoch(&log);
            logs.push(log);
        }
        Ok(logs)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::from_params(self.cfg.to_meta(), self)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.checkpoint().save(path)
    }

    /// Rebuilds a model from a checkpoint. Optimizer moments are not stored,
    /// so training resumes with fresh ones.
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let cfg = SganConfig::from_meta(&ckpt.meta)?;
        let mut model = Self::new(cfg)?;
        let expected = model.num_scalars();
        let stored: usize = ckpt.tensors.iter().map(|(_, t)| t.len()).sum();
        if expected != stored {
            return Err(Error::Checkpoint(format!(
                "checkpoint holds {stored} values, model has {expected}"
            )));
        }
        ckpt.load_into(&mut model)?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

impl Parameters for Sgan {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.generator.visit(f);
        self.discriminator.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.generator.visit_mut(f);
        self.discriminator.visit_mut(f);
    }
}
