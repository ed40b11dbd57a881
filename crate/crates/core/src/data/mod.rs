//! Dataset ingestion, scene windows, baselines, metrics and synthetic scenarios.

mod baseline;
mod dump;
mod folds;
mod metrics;
mod parse;
mod resample;
mod scenes;
mod synth;

pub use baseline::linear_baseline;
pub use dump::{read_dump, write_dump, DumpRow};
pub use folds::{leave_one_out, FoldSplit};
pub use metrics::{ade, collision_rate, fde, min_of_n, Metric, MetricsReport, METRICS_HEADER};
pub use parse::{parse_dataset, parse_key_values, parse_records, DatasetMeta, RawRecord};
pub use resample::{resample, Resampled};
pub use scenes::build_scenes;
pub use synth::{fork_branches, synth_scenarios, ScenarioKind, WALK_SPEED};

use crate::pooling::Point;

/// Spacing of the resampled time grid, seconds.
pub const STEP_SECONDS: f64 = 0.4;

/// One pedestrian on the uniform grid: `positions[k]` is at time
/// `(start_step + k) * STEP_SECONDS`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub ped_id: i64,
    pub start_step: i64,
    pub positions: Vec<Point>,
}

impl Trajectory {
    pub fn end_step(&self) -> i64 {
        self.start_step + self.positions.len() as i64
    }

    pub fn timestamps(&self) -> Vec<f64> {
        (0..self.positions.len())
            .map(|k| (self.start_step + k as i64) as f64 * STEP_SECONDS)
            .collect()
    }
}

/// Time-aligned people, each with exactly `t_obs + t_pred` positions.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub start_step: i64,
    pub t_obs: usize,
    pub people: Vec<Trajectory>,
}

impl Scene {
    pub fn new(start_step: i64, t_obs: usize, people: Vec<Trajectory>) -> Self {
        Self {
            start_step,
            t_obs,
            people,
        }
    }

    pub fn n_people(&self) -> usize {
        self.people.len()
    }

    pub fn len(&self) -> usize {
        self.people.first().map_or(0, |p| p.positions.len())
    }

    pub fn is_empty(&self) -> bool {
        self.people.is_empty()
    }

    pub fn t_pred(&self) -> usize {
        self.len().saturating_sub(self.t_obs)
    }

    pub fn observed(&self, person: usize) -> &[Point] {
        &self.people[person].positions[..self.t_obs]
    }

    pub fn future(&self, person: usize) -> &[Point] {
        &self.people[person].positions[self.t_obs..]
    }

    /// Ground-truth futures, `people x t_pred`.
    pub fn futures(&self) -> Vec<Vec<Point>> {
        (0..self.n_people())
            .map(|i| self.future(i).to_vec())
            .collect()
    }

    /// Shifts every position by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut s = self.clone();
        for p in &mut s.people {
            for q in &mut p.positions {
                q[0] += dx;
                q[1] += dy;
            }
        }
        s
    }
}

/// A set of predicted futures for one scene: `positions[person][step]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSample {
    pub positions: Vec<Vec<Point>>,
    /// The noise vector that produced this sample (empty for baselines).
    pub z: Vec<f64>,
}

impl PredictionSample {
    pub fn n_people(&self) -> usize {
        self.positions.len()
    }

    pub fn t_pred(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn is_finite(&self) -> bool {
        self.positions
            .iter()
            .flatten()
            .flatten()
            .all(|v| v.is_finite())
    }
}
