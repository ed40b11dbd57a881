use rand::Rng;

use super::batch::SceneBatch;
use super::config::{SganConfig, DISC_HIDDEN, EMBED_DIM, MLP_DIM};
use crate::error::{Error, Result};
use crate::nets::{encode_sequence, Activation, LstmCell, Mlp};
use crate::numerics::{Param, Parameters, Tape, Tensor, Var};
use crate::pooling::Point;

/// Scores whole trajectories (observed plus future) as real or generated.
#[derive(Clone, Debug)]
pub struct Discriminator {
    pub embed: Mlp,
    pub encoder: LstmCell,
    /// Final hidden → 64 → one logit.
    pub head: Mlp,
    seq_len: usize,
}

impl Discriminator {
    pub fn new<R: Rng + ?Sized>(cfg: &SganConfig, rng: &mut R) -> Self {
        Self {
            embed: Mlp::new("d.embed", &[2, EMBED_DIM], Activation::Relu, rng),
            encoder: LstmCell::new("d.lstm", EMBED_DIM, DISC_HIDDEN, rng),
            head: Mlp::new(
                "d.head",
                &[DISC_HIDDEN, MLP_DIM, 1],
                Activation::Linear,
                rng,
            ),
            seq_len: cfg.t_obs + cfg.t_pred,
        }
    }

    /// Positions per trajectory.
    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    /// `n x 1` logits from the `seq_len - 1` per-step displacements.
    pub fn logits(&self, tape: &mut Tape, displacements: &[Var]) -> Result<Var> {
        if displacements.len() + 1 != self.seq_len {
            return Err(Error::Dimension {
                op: "discriminate",
                lhs: (displacements.len() + 1, 2),
                rhs: (self.seq_len, 2),
            });
        }
        let state = encode_sequence(tape, &self.encoder, &self.embed, displacements)?;
        self.head.forward(tape, state.h)
    }

    /// Logit for a single trajectory of `seq_len` positions.
    pub fn discriminate(&self, trajectory: &[Point]) -> Result<f64> {
        if trajectory.len() != self.seq_len {
            return Err(Error::Dimension {
                op: "discriminate",
                lhs: (trajectory.len(), 2),
                rhs: (self.seq_len, 2),
            });
        }
        let mut tape = Tape::new();
        let disps: Vec<Var> = trajectory
            .windows(2)
            .map(|w| tape.leaf(Tensor::row(&[w[1][0] - w[0][0], w[1][1] - w[0][1]])))
            .collect();
        let l = self.logits(&mut tape, &disps)?;
        Ok(tape.value(l).item())
    }

    /// Real displacement sequence of a batch that carries its future.
    pub fn real_inputs(tape: &mut Tape, batch: &SceneBatch) -> Vec<Var> {
        let mut out: Vec<Var> = batch
            .obs_disp
            .iter()
            .map(|d| tape.leaf(d.clone()))
            .collect();
        let mut prev = Tensor::zeros(batch.n_rows(), 2);
        for off in &batch.future_offsets {
            let mut d = off.clone();
            for (v, p) in d.data_mut().iter_mut().zip(prev.data()) {
                *v -= p;
            }
            out.push(tape.leaf(d));
            prev = off.clone();
        }
        out
    }

    /// Observed displacements followed by generated ones.
    pub fn fake_inputs(tape: &mut Tape, batch: &SceneBatch, generated: &[Var]) -> Vec<Var> {
        let mut out: Vec<Var> = batch
            .obs_disp
            .iter()
            .map(|d| tape.leaf(d.clone()))
            .collect();
        out.extend_from_slice(generated);
        out
    }
}

impl Parameters for Discriminator {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.embed.visit(f);
        self.encoder.visit(f);
        self.head.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.embed.visit_mut(f);
        self.encoder.visit_mut(f);
        self.head.visit_mut(f);
    }
}
