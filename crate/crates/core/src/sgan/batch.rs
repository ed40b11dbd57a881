use std::ops::Range;

use crate::data::Scene;
use crate::error::{Error, Result};
use crate::numerics::Tensor;
use crate::pooling::Point;

/// Several scenes stacked into one set of rows, one row per person.
///
/// Positions are kept as per-step displacements plus each person's last
/// observed position, so everything the networks see is translation-free.
#[derive(Clone, Debug)]
pub struct SceneBatch {
    pub t_obs: usize,
    pub t_pred: usize,
    /// Rows belonging to each scene.
    pub groups: Vec<Range<usize>>,
    /// `t_obs - 1` tensors of `n x 2`: observed per-step displacements.
    pub obs_disp: Vec<Tensor>,
    /// Last observed position of every row.
    pub last_pos: Vec<Point>,
    /// `t_pred` tensors of `n x 2`: ground-truth future minus last observed
    /// position. Empty when the scenes carry no future.
    pub future_offsets: Vec<Tensor>,
}

impl SceneBatch {
    /// Stacks `scenes`. With `with_future`, every scene must hold exactly
    /// `t_pred` future steps; otherwise only the first `t_obs` are read.
    pub fn new(scenes: &[&Scene], t_obs: usize, t_pred: usize, with_future: bool) -> Result<Self> {
        if scenes.is_empty() {
            return Err(Error::Empty("scene batch"));
        }
        let need = if with_future { t_obs + t_pred } else { t_obs };
        let mut groups = Vec::with_capacity(scenes.len());
        let mut rows: Vec<&[Point]> = Vec::new();
        for s in scenes {
            if s.is_empty() {
                return Err(Error::Data("scene without people".into()));
            }
            if s.t_obs != t_obs {
                return Err(Error::Data(format!(
                    "scene has t_obs {}, model expects {t_obs}",
                    s.t_obs
                )));
            }
            let start = rows.len();
            for p in &s.people {
                let len = p.positions.len();
                if len < need || (with_future && len != need) {
                    return Err(Error::Data(format!(
                        "person {} has {len} steps, expected {need}",
                        p.ped_id
                    )));
                }
                rows.push(&p.positions);
            }
            groups.push(start..rows.len());
        }
        let n = rows.len();
        let step_disp = |t: usize| {
            let mut d = Tensor::zeros(n, 2);
            for (r, p) in rows.iter().enumerate() {
                d.set(r, 0, p[t][0] - p[t - 1][0]);
                d.set(r, 1, p[t][1] - p[t - 1][1]);
            }
            d
        };
        let obs_disp = (1..t_obs).map(step_disp).collect();
        let last_pos: Vec<Point> = rows.iter().map(|p| p[t_obs - 1]).collect();
        let future_offsets = if with_future {
            (0..t_pred)
                .map(|k| {
                    let mut o = Tensor::zeros(n, 2);
                    for (r, p) in rows.iter().enumerate() {
                        let q = p[t_obs + k];
                        o.set(r, 0, q[0] - last_pos[r][0]);
                        o.set(r, 1, q[1] - last_pos[r][1]);
                    }
                    o
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            t_obs,
            t_pred,
            groups,
            obs_disp,
            last_pos,
            future_offsets,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.last_pos.len()
    }

    pub fn n_scenes(&self) -> usize {
        self.groups.len()
    }

    pub fn has_future(&self) -> bool {
        !self.future_offsets.is_empty()
    }

    /// `copies` back-to-back copies of the batch as separate groups.
    pub fn repeat(&self, copies: usize) -> Self {
        let n = self.n_rows();
        let tile = |t: &Tensor| {
            let mut data = Vec::with_capacity(t.len() * copies);
            for _ in 0..copies {
                data.extend_from_slice(t.data());
            }
            Tensor::new(n * copies, t.cols(), data).expect("tiled")
        };
        Self {
            t_obs: self.t_obs,
            t_pred: self.t_pred,
            groups: (0..copies)
                .flat_map(|c| {
                    self.groups
                        .iter()
                        .map(move |g| g.start + c * n..g.end + c * n)
                })
                .collect(),
            obs_disp: self.obs_disp.iter().map(tile).collect(),
            last_pos: (0..copies)
                .flat_map(|_| self.last_pos.iter().copied())
                .collect(),
            future_offsets: self.future_offsets.iter().map(tile).collect(),
        }
    }

    /// Ground-truth future offsets side by side: `n x 2·t_pred`.
    pub fn stacked_future(&self) -> Tensor {
        stack_steps(&self.future_offsets)
    }

    pub fn last_pos_tensor(&self) -> Tensor {
        crate::pooling::points_to_tensor(&self.last_pos)
    }
}

/// Concatenates per-step `n x 2` tensors column-wise.
pub(crate) fn stack_steps(steps: &[Tensor]) -> Tensor {
    let n = steps.first().map_or(0, Tensor::rows);
    let mut out = Tensor::zeros(n, 2 * steps.len());
    for (k, s) in steps.iter().enumerate() {
        for r in 0..n {
            out.set(r, 2 * k, s.get(r, 0));
            out.set(r, 2 * k + 1, s.get(r, 1));
        }
    }
    out
}
