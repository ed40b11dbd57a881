use super::{PredictionSample, Scene};

/// Per person and coordinate, fits `v(t) = a + b·t` to the observed steps by
/// least squares and extends it over the prediction horizon.
pub fn linear_baseline(scene: &Scene) -> PredictionSample {
    let t_obs = scene.t_obs;
    let t_pred = scene.t_pred();
    let positions = (0..scene.n_people())
        .map(|i| {
            let obs = scene.observed(i);
            let fit = |c: usize| ols(obs.iter().map(|p| p[c]));
            let (ax, bx) = fit(0);
            let (ay, by) = fit(1);
            (t_obs..t_obs + t_pred)
                .map(|t| [ax + bx * t as f64, ay + by * t as f64])
                .collect()
        })
        .collect();
    PredictionSample {
        positions,
        z: Vec::new(),
    }
}

/// Intercept and slope of `v` against `t = 0, 1, ...`.
fn ols(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let t_mean = (n - 1.0) / 2.0;
    let v_mean = v.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, y) in v.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sxy += dt * (y - v_mean);
        sxx += dt * dt;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (v_mean - slope * t_mean, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ade, Trajectory};

    fn scene(points: Vec<[f64; 2]>, t_obs: usize) -> Scene {
        Scene::new(
            0,
            t_obs,
            vec![Trajectory {
                ped_id: 1,
                start_step: 0,
                positions: points,
            }],
        )
    }

    #[test]
    fn exact_on_linear_motion() {
        let s = scene(
            (0..16).map(|t| [t as f64, 0.5 * t as f64 - 2.0]).collect(),
            8,
        );
        let p = linear_baseline(&s);
        assert!(ade(&s.futures(), &p.positions).unwrap() < 1e-12);
    }

    #[test]
    fn stationary_history() {
        let s = scene(vec![[3.0, -1.0]; 12], 8);
        let p = linear_baseline(&s);
        assert!(p.positions[0].iter().all(|&q| q == [3.0, -1.0]));
    }

    #[test]
    fn matches_normal_equations() {
        // Normal equations [n Σt; Σt Σt²][a b]ᵀ = [Σy Σty]ᵀ solved by Cramer's rule.
        let ys = [0.1, 1.3, 1.8, 3.4, 3.9];
        let n = ys.len() as f64;
        let (st, stt) = (0..5).fold((0.0, 0.0), |(a, b), t| (a + t as f64, b + (t * t) as f64));
        let sy: f64 = ys.iter().sum();
        let sty: f64 = ys.iter().enumerate().map(|(t, y)| t as f64 * y).sum();
        let det = n * stt - st * st;
        let a = (sy * stt - st * sty) / det;
        let b = (n * sty - st * sy) / det;
        let pts: Vec<[f64; 2]> = ys
            .iter()
            .map(|&y| [0.0, y])
            .chain([[0.0, 0.0]; 3])
            .collect();
        let p = linear_baseline(&scene(pts, 5));
        for (k, q) in p.positions[0].iter().enumerate() {
            let t = (5 + k) as f64;
            assert!((q[1] - (a + b * t)).abs() < 1e-12);
        }
    }
}
