use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;

use super::batch::SceneBatch;
use super::config::{
    PoolMode, SganConfig, DECODER_HIDDEN, EMBED_DIM, ENCODER_HIDDEN, MLP_DIM, POOL_DIM,
};
use crate::data::{PredictionSample, Scene};
use crate::error::{Error, Result};
use crate::nets::{encode_sequence, Activation, LstmCell, LstmState, Mlp};
use crate::numerics::{Param, Parameters, Tape, Tensor, Var};
use crate::pooling::{GridConfig, GridPooling, PoolingModule};

/// Untrained occupancy-grid kernels that replace max-MLP pooling for timing runs.
#[derive(Clone, Debug)]
pub struct GridKernel {
    pub encoder: GridPooling,
    pub decoder: GridPooling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Encoder,
    Decoder,
}

/// Encoder, social pooling and decoder.
#[derive(Clone, Debug)]
pub struct Generator {
    pub enc_embed: Mlp,
    pub encoder: LstmCell,
    /// Pools encoder states when the decoder is initialized.
    pub pool_enc: PoolingModule,
    /// `[pooled, encoder hidden]` → context.
    pub init_mlp: Mlp,
    pub dec_embed: Mlp,
    pub decoder: LstmCell,
    /// Pools decoder states between steps (per-step mode only).
    pub pool_dec: PoolingModule,
    /// `[pooled, decoder hidden]` → residual added to the decoder hidden state.
    pub merge_mlp: Mlp,
    /// Decoder hidden → displacement.
    pub head: Mlp,
    pub pool_mode: PoolMode,
    pub grid: Option<GridKernel>,
    noise_dim: usize,
    t_obs: usize,
    t_pred: usize,
}

/// Tape handles for one generator pass.
#[derive(Clone, Debug)]
pub struct GenOutput {
    /// Per step, `n x 2` position relative to the last observed one.
    pub offsets: Vec<Var>,
    /// Per step, `n x 2` predicted displacement.
    pub displacements: Vec<Var>,
    pub pool_calls: usize,
}

impl Generator {
    pub fn new<R: Rng + ?Sized>(cfg: &SganConfig, rng: &mut R) -> Self {
        let e = EMBED_DIM;
        Self {
            enc_embed: Mlp::new("g.enc.embed", &[2, e], Activation::Relu, rng),
            encoder: LstmCell::new("g.enc.lstm", e, ENCODER_HIDDEN, rng),
            pool_enc: PoolingModule::new("g.pool", ENCODER_HIDDEN, e, MLP_DIM, POOL_DIM, rng),
            init_mlp: Mlp::new(
                "g.init",
                &[POOL_DIM + ENCODER_HIDDEN, MLP_DIM, cfg.context_dim()],
                Activation::Linear,
                rng,
            ),
            dec_embed: Mlp::new("g.dec.embed", &[2, e], Activation::Relu, rng),
            decoder: LstmCell::new("g.dec.lstm", e, DECODER_HIDDEN, rng),
            pool_dec: PoolingModule::new("g.dec.pool", DECODER_HIDDEN, e, MLP_DIM, POOL_DIM, rng),
            merge_mlp: Mlp::new(
                "g.dec.merge",
                &[POOL_DIM + DECODER_HIDDEN, MLP_DIM, DECODER_HIDDEN],
                Activation::Linear,
                rng,
            ),
            head: Mlp::new("g.dec.head", &[DECODER_HIDDEN, 2], Activation::Linear, rng),
            pool_mode: cfg.pool_mode,
            grid: None,
            noise_dim: cfg.noise_dim,
            t_obs: cfg.t_obs,
            t_pred: cfg.t_pred,
        }
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn t_obs(&self) -> usize {
        self.t_obs
    }

    pub fn t_pred(&self) -> usize {
        self.t_pred
    }

    /// Swaps the max-MLP pooling kernels for untrained grid pooling.
    pub fn use_grid_pooling<R: Rng + ?Sized>(
        &mut self,
        cfg: GridConfig,
        rng: &mut R,
    ) -> Result<()> {
        cfg.validate()?;
        self.grid = Some(GridKernel {
            encoder: GridPooling::new(cfg, ENCODER_HIDDEN, POOL_DIM, rng),
            decoder: GridPooling::new(cfg, DECODER_HIDDEN, POOL_DIM, rng),
        });
        Ok(())
    }

    /// Zeroes the per-step pooling path so that it contributes nothing.
    pub fn zero_step_pooling(&mut self) {
        self.pool_dec.zero_values();
        self.merge_mlp.zero_values();
    }

    fn pool(
        &self,
        stage: Stage,
        tape: &mut Tape,
        hidden: Var,
        positions: Var,
        groups: &[Range<usize>],
    ) -> Result<Var> {
        match (&self.grid, stage) {
            (Some(g), Stage::Encoder) => g.encoder.forward(tape, hidden, positions, groups),
            (Some(g), Stage::Decoder) => g.decoder.forward(tape, hidden, positions, groups),
            (None, Stage::Encoder) => self.pool_enc.forward(tape, hidden, positions, groups),
            (None, Stage::Decoder) => self.pool_dec.forward(tape, hidden, positions, groups),
        }
    }

    /// Runs the shared encoder over every person's observed displacements.
    pub fn encode(&self, tape: &mut Tape, batch: &SceneBatch) -> Result<LstmState> {
        if batch.t_obs != self.t_obs {
            return Err(Error::Data(format!(
                "batch observes {} steps, model expects {}",
                batch.t_obs, self.t_obs
            )));
        }
        let inputs: Vec<Var> = batch
            .obs_disp
            .iter()
            .map(|d| tape.leaf(d.clone()))
            .collect();
        encode_sequence(tape, &self.encoder, &self.enc_embed, &inputs)
    }

    /// Decoder start state `[context, z]` with zero memory. Returns the state
    /// and the number of pooling calls made.
    pub fn init_decoder(
        &self,
        tape: &mut Tape,
        batch: &SceneBatch,
        encoded: LstmState,
        z: &Tensor,
    ) -> Result<(LstmState, usize)> {
        let n = batch.n_rows();
        if z.shape() != (n, self.noise_dim) {
            return Err(Error::Dimension {
                op: "init_decoder",
                lhs: z.shape(),
                rhs: (n, self.noise_dim),
            });
        }
        let (pooled, calls) = match self.pool_mode {
            PoolMode::None => (tape.leaf(Tensor::zeros(n, POOL_DIM)), 0),
            PoolMode::Once | PoolMode::PerStep => {
                let pos = tape.leaf(batch.last_pos_tensor());
                (
                    self.pool(Stage::Encoder, tape, encoded.h, pos, &batch.groups)?,
                    1,
                )
            }
        };
        let joint = tape.concat_cols(&[pooled, encoded.h])?;
        let context = self.init_mlp.forward(tape, joint)?;
        let z = tape.leaf(z.clone());
        let h = tape.concat_cols(&[context, z])?;
        let m = tape.leaf(Tensor::zeros(n, DECODER_HIDDEN));
        Ok((LstmState { h, m }, calls))
    }

    /// Rolls the decoder forward `t_pred` steps, feeding back its own output.
    pub fn decode(
        &self,
        tape: &mut Tape,
        batch: &SceneBatch,
        init: LstmState,
    ) -> Result<GenOutput> {
        let last = tape.leaf(batch.last_pos_tensor());
        let mut prev = tape.leaf(batch.obs_disp[self.t_obs - 2].clone());
        let mut state = init;
        let mut offsets: Vec<Var> = Vec::with_capacity(self.t_pred);
        let mut displacements = Vec::with_capacity(self.t_pred);
        let mut pool_calls = 0;
        for t in 0..self.t_pred {
            if let (PoolMode::PerStep, Some(&offset)) = (self.pool_mode, offsets.last()) {
                let pos = tape.add(last, offset)?;
                let pooled = self.pool(Stage::Decoder, tape, state.h, pos, &batch.groups)?;
                let joint = tape.concat_cols(&[pooled, state.h])?;
                let delta = self.merge_mlp.forward(tape, joint)?;
                state.h = tape.add(state.h, delta)?;
                pool_calls += 1;
            }
            let e = self.dec_embed.forward(tape, prev)?;
            state = self.decoder.step(tape, state, e)?;
            let d = self.head.forward(tape, state.h)?;
            if !tape.value(d).is_finite() {
                return Err(Error::Divergence {
                    epoch: 0,
                    step: t + 1,
                    what: "non-finite decoder output".into(),
                });
            }
            let offset = match offsets.last() {
                Some(&o) => tape.add(o, d)?,
                None => d,
            };
            offsets.push(offset);
            displacements.push(d);
            prev = d;
        }
        Ok(GenOutput {
            offsets,
            displacements,
            pool_calls,
        })
    }

    /// Full pass: encode, pool, initialize and decode.
    pub fn forward(&self, tape: &mut Tape, batch: &SceneBatch, z: &Tensor) -> Result<GenOutput> {
        let encoded = self.encode(tape, batch)?;
        let (init, calls) = self.init_decoder(tape, batch, encoded, z)?;
        let mut out = self.decode(tape, batch, init)?;
        out.pool_calls += calls;
        Ok(out)
    }

    /// Standard-normal noise, one draw per group (or per row).
    pub fn draw_noise<R: Rng + ?Sized>(
        &self,
        batch: &SceneBatch,
        per_person: bool,
        rng: &mut R,
    ) -> Tensor {
        let mut z = Tensor::zeros(batch.n_rows(), self.noise_dim);
        for g in &batch.groups {
            let mut draw: Vec<f64> = Vec::new();
            for r in g.clone() {
                if draw.is_empty() || per_person {
                    draw = (0..self.noise_dim)
                        .map(|_| rng.sample(StandardNormal))
                        .collect();
                }
                z.row_slice_mut(r).copy_from_slice(&draw);
            }
        }
        z
    }

    /// Predictions for every group of `batch` under noise `z`, without gradients.
    pub fn predict(
        &self,
        batch: &SceneBatch,
        z: &Tensor,
    ) -> Result<(Vec<PredictionSample>, usize)> {
        let mut tape = Tape::new();
        let out = self.forward(&mut tape, batch, z)?;
        let samples = batch
            .groups
            .iter()
            .map(|g| PredictionSample {
                positions: g
                    .clone()
                    .map(|r| {
                        let [x, y] = batch.last_pos[r];
                        out.offsets
                            .iter()
                            .map(|&o| {
                                let v = tape.value(o);
                                [x + v.get(r, 0), y + v.get(r, 1)]
                            })
                            .collect()
                    })
                    .collect(),
                z: z.row_slice(g.start).to_vec(),
            })
            .collect();
        Ok((samples, out.pool_calls))
    }

    /// `n` predictions for `scene`, each from an independent noise draw.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        scene: &Scene,
        n: usize,
        per_person: bool,
        rng: &mut R,
    ) -> Result<Vec<PredictionSample>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let batch = SceneBatch::new(&[scene], self.t_obs, self.t_pred, false)?.repeat(n);
        let z = self.draw_noise(&batch, per_person, rng);
        Ok(self.predict(&batch, &z)?.0)
    }

    /// Prediction with the same noise vector `z` for every person.
    pub fn predict_with_noise(&self, scene: &Scene, z: &[f64]) -> Result<PredictionSample> {
        let batch = SceneBatch::new(&[scene], self.t_obs, self.t_pred, false)?;
        if z.len() != self.noise_dim {
            return Err(Error::Dimension {
                op: "predict_with_noise",
                lhs: (1, z.len()),
                rhs: (1, self.noise_dim),
            });
        }
        let zt = Tensor::from_rows(&vec![z.to_vec(); batch.n_rows()])?;
        Ok(self.predict(&batch, &zt)?.0.remove(0))
    }

    /// Zero-noise prediction.
    pub fn predict_mean(&self, scene: &Scene) -> Result<PredictionSample> {
        self.predict_with_noise(scene, &vec![0.0; self.noise_dim])
    }

    /// Predictions at `z = alpha · u / |u|` for each alpha. Consumes no randomness.
    pub fn latent_sweep(
        &self,
        scene: &Scene,
        direction: &[f64],
        alphas: &[f64],
    ) -> Result<Vec<PredictionSample>> {
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Config(
                "latent sweep direction must be non-zero".into(),
            ));
        }
        let unit: Vec<f64> = direction.iter().map(|v| v / norm).collect();
        alphas
            .iter()
            .map(|a| {
                let z: Vec<f64> = unit.iter().map(|u| a * u).collect();
                self.predict_with_noise(scene, &z)
            })
            .collect()
    }
}

impl Parameters for Generator {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.enc_embed.visit(f);
        self.encoder.visit(f);
        self.pool_enc.visit(f);
        self.init_mlp.visit(f);
        self.dec_embed.visit(f);
        self.decoder.visit(f);
        self.pool_dec.visit(f);
        self.merge_mlp.visit(f);
        self.head.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.enc_embed.visit_mut(f);
        self.encoder.visit_mut(f);
        self.pool_enc.visit_mut(f);
        self.init_mlp.visit_mut(f);
        self.dec_embed.visit_mut(f);
        self.decoder.visit_mut(f);
        self.pool_dec.visit_mut(f);
        self.merge_mlp.visit_mut(f);
        self.head.visit_mut(f);
    }
}
