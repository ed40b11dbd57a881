use super::parse::RawRecord;
use super::{Trajectory, STEP_SECONDS};

const TIME_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Resampled {
    pub trajectories: Vec<Trajectory>,
    /// Pedestrians with fewer than two observations (or no grid point inside
    /// their span), which were skipped.
    pub dropped: usize,
}

/// Linearly interpolates each pedestrian onto the shared 0.4 s grid, within
/// the pedestrian's observed span only. Grid points that coincide with an
/// annotation copy it exactly.
pub fn resample(records: &[RawRecord], frame_rate: f64) -> Resampled {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| (r.ped_id, r.frame));
    let mut out = Resampled {
        trajectories: Vec::new(),
        dropped: 0,
    };
    for group in sorted.chunk_by(|a, b| a.ped_id == b.ped_id) {
        match resample_one(group, frame_rate) {
            Some(t) => out.trajectories.push(t),
            None => out.dropped += 1,
        }
    }
    out
}

fn resample_one(recs: &[RawRecord], frame_rate: f64) -> Option<Trajectory> {
    if recs.len() < 2 {
        return None;
    }
    let times: Vec<f64> = recs.iter().map(|r| r.frame as f64 / frame_rate).collect();
    let first = (times[0] / STEP_SECONDS - TIME_TOL).ceil() as i64;
    let last = (times[times.len() - 1] / STEP_SECONDS + TIME_TOL).floor() as i64;
    if last < first {
        return None;
    }
    let mut positions = Vec::with_capacity((last - first + 1) as usize);
    let mut seg = 0;
    for k in first..=last {
        let t = k as f64 * STEP_SECONDS;
        while seg + 2 < times.len() && times[seg + 1] < t - TIME_TOL {
            seg += 1;
        }
        let (a, b) = (&recs[seg], &recs[seg + 1]);
        let (ta, tb) = (times[seg], times[seg + 1]);
        let p = if (t - ta).abs() <= TIME_TOL {
            [a.x, a.y]
        } else if (t - tb).abs() <= TIME_TOL {
            [b.x, b.y]
        } else {
            let w = (t - ta) / (tb - ta);
            [a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)]
        };
        positions.push(p);
    }
    Some(Trajectory {
        ped_id: recs[0].ped_id,
        start_step: first,
        positions,
    })
}
