use super::{Scene, Trajectory};

/// Sliding windows of `t_obs + t_pred` steps, advancing `stride` steps.
///
/// A trajectory joins a window only if it covers every step of it; windows
/// nobody fully covers are dropped. Several trajectories may share a
/// `ped_id` (separate segments); each is considered on its own.
pub fn build_scenes(
    trajectories: &[Trajectory],
    t_obs: usize,
    t_pred: usize,
    stride: usize,
) -> Vec<Scene> {
    let len = (t_obs + t_pred) as i64;
    let stride = stride.max(1) as i64;
    let (Some(lo), Some(hi)) = (
        trajectories.iter().map(|t| t.start_step).min(),
        trajectories.iter().map(|t| t.end_step()).max(),
    ) else {
        return Vec::new();
    };
    let mut scenes = Vec::new();
    let mut start = lo;
    while start + len <= hi {
        let people: Vec<Trajectory> = trajectories
            .iter()
            .filter(|t| t.start_step <= start && t.end_step() >= start + len)
            .map(|t| {
                let off = (start - t.start_step) as usize;
                Trajectory {
                    ped_id: t.ped_id,
                    start_step: start,
                    positions: t.positions[off..off + len as usize].to_vec(),
                }
            })
            .collect();
        if !people.is_empty() {
            scenes.push(Scene::new(start, t_obs, people));
        }
        start += stride;
    }
    scenes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(ped_id: i64, start_step: i64, n: usize) -> Trajectory {
        Trajectory {
            ped_id,
            start_step,
            positions: (0..n).map(|k| [k as f64, ped_id as f64]).collect(),
        }
    }

    #[test]
    fn exact_span_gives_one_scene() {
        let s = build_scenes(&[traj(1, 0, 20)], 8, 12, 1);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].len(), 20);
        assert_eq!(s[0].t_pred(), 12);
    }

    #[test]
    fn gap_excludes_pedestrian() {
        // ped 2 is split around step 5 (missing one frame)
        let pieces = [
            traj(1, 0, 20),
            traj(2, 0, 5),
            Trajectory {
                ped_id: 2,
                start_step: 6,
                positions: vec![[0.0, 0.0]; 14],
            },
        ];
        let s = build_scenes(&pieces, 8, 12, 1);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].n_people(), 1);
        assert_eq!(s[0].people[0].ped_id, 1);
    }

    #[test]
    fn co_present_pedestrians_share_scene() {
        let s = build_scenes(&[traj(1, 0, 16), traj(2, 0, 16)], 8, 8, 1);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].n_people(), 2);
    }

    #[test]
    fn stride_and_full_coverage() {
        let trajs = [traj(1, 0, 30), traj(2, 5, 20), traj(3, 12, 3)];
        for stride in [1, 2, 5] {
            let scenes = build_scenes(&trajs, 4, 4, stride);
            for s in &scenes {
                assert!(!s.is_empty());
                for p in &s.people {
                    assert_eq!(p.positions.len(), 8);
                    let src = trajs.iter().find(|t| t.ped_id == p.ped_id).unwrap();
                    let off = (s.start_step - src.start_step) as usize;
                    assert_eq!(p.positions, src.positions[off..off + 8]);
                }
            }
            assert_eq!(scenes.len(), (30 - 8) / stride + 1);
        }
    }

    #[test]
    fn empty_input() {
        assert!(build_scenes(&[], 8, 12, 1).is_empty());
    }
}
