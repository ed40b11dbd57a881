use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Scene, Trajectory, STEP_SECONDS};
use crate::error::{Error, Result};
use crate::pooling::Point;

/// Typical walking speed, m/s.
pub const WALK_SPEED: f64 = 1.2;

/// Heading change at the fork, radians either side of straight ahead.
const FORK_ANGLE: f64 = PI / 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    MeetHeadOn,
    MeetGroup,
    Follow,
    MeetAngle,
    Merge,
    BimodalFork,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::MeetHeadOn,
        ScenarioKind::MeetGroup,
        ScenarioKind::Follow,
        ScenarioKind::MeetAngle,
        ScenarioKind::Merge,
        ScenarioKind::BimodalFork,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::MeetHeadOn => "meet_head_on",
            ScenarioKind::MeetGroup => "meet_group",
            ScenarioKind::Follow => "follow",
            ScenarioKind::MeetAngle => "meet_angle",
            ScenarioKind::Merge => "merge",
            ScenarioKind::BimodalFork => "bimodal_fork",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario kind {s:?}")))
    }
}

/// Smooth 0→1 ramp between steps `a` and `b`.
fn ramp(k: f64, a: f64, b: f64) -> f64 {
    let u = ((k - a) / (b - a)).clamp(0.0, 1.0);
    0.5 * (1.0 - (PI * u).cos())
}

/// Noise-free paths for one scene of `kind`; `variant` selects the fork side.
fn paths(kind: ScenarioKind, len: usize, t_obs: usize, variant: usize) -> Vec<Vec<Point>> {
    let v = WALK_SPEED * STEP_SECONDS;
    let steps = (0..len).map(|k| k as f64);
    match kind {
        ScenarioKind::MeetHeadOn => {
            // 8 m apart, both sidestep to their right before meeting.
            let meet = 4.0 / v;
            let side = |k: f64| 0.4 * ramp(k, meet - 4.0, meet);
            vec![
                steps.clone().map(|k| [-4.0 + v * k, -side(k)]).collect(),
                steps.map(|k| [4.0 - v * k, side(k)]).collect(),
            ]
        }
        ScenarioKind::MeetGroup => {
            let meet = 4.0 / v;
            let side = |k: f64| 0.9 * ramp(k, meet - 5.0, meet);
            let mut out = vec![steps.clone().map(|k| [-4.0 + v * k, -side(k)]).collect()];
            for (dx, dy) in [(0.0, 0.0), (0.3, 0.6), (0.3, -0.6)] {
                out.push(
                    steps
                        .clone()
                        .map(|k| [4.0 + dx - v * k, 0.2 + dy + 0.2 * side(k)])
                        .collect(),
                );
            }
            out
        }
        ScenarioKind::Follow => vec![
            steps.clone().map(|k| [v * k, 0.0]).collect(),
            steps.map(|k| [-3.0 + 1.2 * v * k, 0.0]).collect(),
        ],
        ScenarioKind::MeetAngle => {
            // Paths cross at the origin; the second walker slows to let the first pass.
            let first = 4.0 / v;
            vec![
                steps.clone().map(|k| [-4.0 + v * k, 0.0]).collect(),
                steps
                    .map(|k| {
                        let slow = 0.6 * ramp(k, first - 5.0, first - 1.0);
                        let travelled = v * (k - slow * (k - (first - 5.0)).max(0.0) * 0.5);
                        let (s, c) = (PI / 3.0).sin_cos();
                        [(-4.0 + travelled) * c, (-4.0 + travelled) * s]
                    })
                    .collect(),
            ]
        }
        ScenarioKind::Merge => {
            let join = len as f64 * 0.5;
            let lane = |from: f64, to: f64, k: f64| from + (to - from) * ramp(k, 2.0, join);
            vec![
                steps.clone().map(|k| [v * k, lane(2.0, 0.35, k)]).collect(),
                steps.map(|k| [v * k, lane(-2.0, -0.35, k)]).collect(),
            ]
        }
        ScenarioKind::BimodalFork => {
            let sign = if variant.is_multiple_of(2) { 1.0 } else { -1.0 };
            let (s, c) = FORK_ANGLE.sin_cos();
            let last = t_obs as f64 - 1.0;
            vec![steps
                .map(|k| {
                    if k <= last {
                        [v * (k - last), 0.0]
                    } else {
                        [v * (k - last) * c, sign * v * (k - last) * s]
                    }
                })
                .collect()]
        }
    }
}

/// The two noise-free futures of a `bimodal_fork` scene, left then right.
pub fn fork_branches(t_obs: usize, t_pred: usize) -> [Vec<Point>; 2] {
    let len = t_obs + t_pred;
    let branch = |variant| {
        paths(ScenarioKind::BimodalFork, len, t_obs, variant)
            .swap_remove(0)
            .split_off(t_obs)
    };
    [branch(0), branch(1)]
}

/// `n` scenes of `kind`, each position perturbed by Gaussian noise of standard
/// deviation `jitter` meters. Fork scenes alternate left and right.
pub fn synth_scenarios<R: Rng + ?Sized>(
    kind: ScenarioKind,
    n: usize,
    t_obs: usize,
    t_pred: usize,
    jitter: f64,
    rng: &mut R,
) -> Result<Vec<Scene>> {
    if n == 0 {
        return Err(Error::Config("scenario count must be at least 1".into()));
    }
    if t_obs < 2 || t_pred < 1 {
        return Err(Error::Config(format!(
            "need t_obs >= 2 and t_pred >= 1, got {t_obs}/{t_pred}"
        )));
    }
    let noise =
        Normal::new(0.0, jitter).map_err(|_| Error::Config(format!("invalid jitter {jitter}")))?;
    let len = t_obs + t_pred;
    let scenes = (0..n)
        .map(|s| {
            let people = paths(kind, len, t_obs, s)
                .into_iter()
                .enumerate()
                .map(|(i, mut positions)| {
                    if jitter > 0.0 {
                        for p in &mut positions {
                            p[0] += noise.sample(rng);
                            p[1] += noise.sample(rng);
                        }
                    }
                    Trajectory {
                        ped_id: i as i64 + 1,
                        start_step: (s * len) as i64,
                        positions,
                    }
                })
                .collect();
            Scene::new((s * len) as i64, t_obs, people)
        })
        .collect();
    Ok(scenes)
}
