//! Social context per person.
//!
//! [`PoolingModule`] embeds every other person's position relative to the
//! target, concatenates it with that person's hidden state, runs a shared
//! MLP over each pair and takes the elementwise max. The result does not
//! depend on the order of the other people or on where the scene sits in the
//! world, and nobody is out of range.
//!
//! [`pool_grid`] is the occupancy-grid alternative: hidden states of people
//! inside a square neighborhood are summed into cells. It is only used as an
//! untrained comparison kernel.

use std::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nets::{Activation, Mlp};
use crate::numerics::{Param, Parameters, Tape, Tensor, Var};

pub type Point = [f64; 2];

/// `position_j - position_i` for every `j != i`, in ascending `j`.
pub fn relative_positions(positions: &[Point], i: usize) -> Result<Vec<Point>> {
    if i >= positions.len() {
        return Err(Error::Index {
            index: i,
            len: positions.len(),
        });
    }
    let [xi, yi] = positions[i];
    Ok(positions
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &[x, y])| [x - xi, y - yi])
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PooledVector {
    pub values: Tensor,
    pub owner: usize,
}

/// Max-over-MLP pooling weights.
#[derive(Clone, Debug)]
pub struct PoolingModule {
    /// Relative position, 2 → `pos_dim`, linear.
    pub pos_embed: Mlp,
    /// `pos_dim + hidden` → 64 → `pool_dim`, ReLU after each layer.
    pub pair_mlp: Mlp,
}

impl PoolingModule {
    pub fn new<R: Rng + ?Sized>(
        prefix: &str,
        hidden_dim: usize,
        pos_dim: usize,
        mlp_dim: usize,
        pool_dim: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            pos_embed: Mlp::new(
                &format!("{prefix}.pos"),
                &[2, pos_dim],
                Activation::Linear,
                rng,
            ),
            pair_mlp: Mlp::new(
                &format!("{prefix}.pair"),
                &[pos_dim + hidden_dim, mlp_dim, pool_dim],
                Activation::Relu,
                rng,
            ),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.pair_mlp.in_dim() - self.pos_embed.out_dim()
    }

    pub fn pool_dim(&self) -> usize {
        self.pair_mlp.out_dim()
    }

    /// Pools every person of every group at once.
    ///
    /// `hidden` is `n x hidden_dim`, `positions` is `n x 2`, and `groups`
    /// partitions the rows into scenes; pooling never crosses a group. Returns
    /// `n x pool_dim`, with zero rows for people alone in their group.
    pub fn forward(
        &self,
        tape: &mut Tape,
        hidden: Var,
        positions: Var,
        groups: &[Range<usize>],
    ) -> Result<Var> {
        let n = tape.value(hidden).rows();
        if tape.value(positions).shape() != (n, 2) {
            return Err(Error::Dimension {
                op: "pool_maxmlp",
                lhs: tape.value(hidden).shape(),
                rhs: tape.value(positions).shape(),
            });
        }
        if tape.value(hidden).cols() != self.hidden_dim() {
            return Err(Error::Dimension {
                op: "pool_maxmlp",
                lhs: tape.value(hidden).shape(),
                rhs: (n, self.hidden_dim()),
            });
        }
        let mut targets = Vec::new();
        let mut others = Vec::new();
        let mut segments = vec![0..0; n];
        for g in groups {
            for i in g.clone() {
                let start = others.len();
                for j in g.clone().filter(|&j| j != i) {
                    targets.push(i);
                    others.push(j);
                }
                segments[i] = start..others.len();
            }
        }
        if others.is_empty() {
            return Ok(tape.leaf(Tensor::zeros(n, self.pool_dim())));
        }
        let pos_j = tape.gather(positions, &others)?;
        let pos_i = tape.gather(positions, &targets)?;
        let rel = tape.sub(pos_j, pos_i)?;
        let rel_e = self.pos_embed.forward(tape, rel)?;
        let h_j = tape.gather(hidden, &others)?;
        let pair = tape.concat_cols(&[rel_e, h_j])?;
        let rows = self.pair_mlp.forward(tape, pair)?;
        tape.segment_max(rows, &segments)
    }

    /// Pooled vector for person `i` of a single scene.
    pub fn pool_one(&self, hidden: &Tensor, positions: &[Point], i: usize) -> Result<PooledVector> {
        let n = hidden.rows();
        if positions.len() != n {
            return Err(Error::Dimension {
                op: "pool_maxmlp",
                lhs: hidden.shape(),
                rhs: (positions.len(), 2),
            });
        }
        if i >= n {
            return Err(Error::Index { index: i, len: n });
        }
        let mut tape = Tape::new();
        let h = tape.leaf(hidden.clone());
        let p = tape.leaf(points_to_tensor(positions));
        let pooled = self.forward(&mut tape, h, p, &[0..n])?;
        let row = tape.value(pooled).row_slice(i).to_vec();
        Ok(PooledVector {
            values: Tensor::row(&row),
            owner: i,
        })
    }
}

impl Parameters for PoolingModule {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.pos_embed.visit(f);
        self.pair_mlp.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.pos_embed.visit_mut(f);
        self.pair_mlp.visit_mut(f);
    }
}

pub fn points_to_tensor(points: &[Point]) -> Tensor {
    Tensor::new(points.len(), 2, points.iter().flatten().copied().collect()).expect("n x 2")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    /// Side length of the square neighborhood centered on the target, meters.
    pub neighborhood: f64,
    pub cells: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            neighborhood: 4.0,
            cells: 8,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.neighborhood.is_finite() && self.neighborhood > 0.0) || self.cells == 0 {
            return Err(Error::Config(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    /// Cell of a relative offset, or `None` outside the neighborhood.
    pub fn cell_of(&self, [dx, dy]: Point) -> Option<usize> {
        let half = self.neighborhood / 2.0;
        let width = self.neighborhood / self.cells as f64;
        if !(-half..half).contains(&dx) || !(-half..half).contains(&dy) {
            return None;
        }
        let cx = (((dx + half) / width) as usize).min(self.cells - 1);
        let cy = (((dy + half) / width) as usize).min(self.cells - 1);
        Some(cy * self.cells + cx)
    }
}

/// Occupancy-grid pooling for person `i`: a `1 x (cells² · h)` row, cell-major.
pub fn pool_grid(
    hidden: &Tensor,
    positions: &[Point],
    i: usize,
    cfg: &GridConfig,
) -> Result<Tensor> {
    cfg.validate()?;
    let (n, h) = hidden.shape();
    if positions.len() != n {
        return Err(Error::Dimension {
            op: "pool_grid",
            lhs: hidden.shape(),
            rhs: (positions.len(), 2),
        });
    }
    if i >= n {
        return Err(Error::Index { index: i, len: n });
    }
    let mut out = Tensor::zeros(1, cfg.cells * cfg.cells * h);
    let [xi, yi] = positions[i];
    for (j, &[x, y]) in positions.iter().enumerate() {
        if j == i {
            continue;
        }
        if let Some(cell) = cfg.cell_of([x - xi, y - yi]) {
            let dst = &mut out.data_mut()[cell * h..(cell + 1) * h];
            for (o, v) in dst.iter_mut().zip(hidden.row_slice(j)) {
                *o += v;
            }
        }
    }
    Ok(out)
}

/// Grid pooling followed by a fixed linear projection down to `pool_dim`, so
/// it can stand in for [`PoolingModule`] inside the decoder.
#[derive(Clone, Debug)]
pub struct GridPooling {
    pub cfg: GridConfig,
    /// `cells² · hidden x pool_dim`
    pub projection: Tensor,
}

impl GridPooling {
    pub fn new<R: Rng + ?Sized>(
        cfg: GridConfig,
        hidden_dim: usize,
        pool_dim: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = cfg.cells * cfg.cells * hidden_dim;
        let p = Param::uniform("grid.proj", fan_in, pool_dim, fan_in, rng);
        Self {
            cfg,
            projection: p.value().clone(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.projection.rows() / (self.cfg.cells * self.cfg.cells)
    }

    /// Same contract as [`PoolingModule::forward`]; the result is a constant
    /// on the tape (no gradient flows through the grid).
    pub fn forward(
        &self,
        tape: &mut Tape,
        hidden: Var,
        positions: Var,
        groups: &[Range<usize>],
    ) -> Result<Var> {
        let h = tape.value(hidden).clone();
        let p = tape.value(positions);
        let n = h.rows();
        let mut out = Tensor::zeros(n, self.projection.cols());
        for g in groups {
            let pts: Vec<Point> = g.clone().map(|r| [p.get(r, 0), p.get(r, 1)]).collect();
            let mut local = Tensor::zeros(g.len(), h.cols());
            for (k, r) in g.clone().enumerate() {
                local.row_slice_mut(k).copy_from_slice(h.row_slice(r));
            }
            for (k, r) in g.clone().enumerate() {
                let grid = pool_grid(&local, &pts, k, &self.cfg)?;
                let projected = grid.matmul(&self.projection)?;
                out.row_slice_mut(r).copy_from_slice(projected.data());
            }
        }
        Ok(tape.leaf(out))
    }
}
