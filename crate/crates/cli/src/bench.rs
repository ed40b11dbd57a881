use std::fmt;
use std::io::Write;
use std::time::Instant;

use anyhow::{ensure, Result};
use rand::Rng;
use sgan::data::{Scene, Trajectory};
use sgan::pooling::GridConfig;
use sgan::sgan::{substream, Generator, PoolMode, SganConfig, STREAM_INIT, STREAM_JITTER};

pub const BENCH_HEADER: &str = "model,n_people,t_pred,seconds,pool_calls";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchModel {
    LstmOnly,
    PoolOnce,
    PoolPerStep,
    GridPerStep,
}

impl BenchModel {
    pub const ALL: [BenchModel; 4] = [
        Self::LstmOnly,
        Self::PoolOnce,
        Self::PoolPerStep,
        Self::GridPerStep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LstmOnly => "lstm-only",
            Self::PoolOnce => "pool-once",
            Self::PoolPerStep => "pool-per-step",
            Self::GridPerStep => "grid-per-step",
        }
    }

    fn pool_mode(self) -> PoolMode {
        match self {
            Self::LstmOnly => PoolMode::None,
            Self::PoolOnce => PoolMode::Once,
            Self::PoolPerStep | Self::GridPerStep => PoolMode::PerStep,
        }
    }

    /// An untrained generator of this kind; weights do not affect timing.
    pub fn generator(self, base: &SganConfig, t_pred: usize) -> Result<Generator> {
        let cfg = SganConfig {
            t_pred,
            pool_mode: self.pool_mode(),
            ..base.clone()
        };
        cfg.validate()?;
        let mut rng = substream(cfg.seed, STREAM_INIT);
        let mut g = Generator::new(&cfg, &mut rng);
        if self == Self::GridPerStep {
            g.use_grid_pooling(GridConfig::default(), &mut rng)?;
        }
        Ok(g)
    }
}

impl fmt::Display for BenchModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub model: BenchModel,
    pub n_people: usize,
    pub t_pred: usize,
    /// Fastest observed wall-clock time of one scene prediction.
    pub seconds: f64,
    pub pool_calls: usize,
}

impl BenchRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.9},{}",
            self.model, self.n_people, self.t_pred, self.seconds, self.pool_calls
        )
    }
}

/// `n` walkers spread over a 2 m lattice with random headings.
pub fn crowd(n: usize, t_obs: usize, t_pred: usize, seed: u64) -> Scene {
    let mut rng = substream(seed, STREAM_JITTER);
    let side = (n as f64).sqrt().ceil() as usize;
    let people = (0..n)
        .map(|i| {
            let start = [2.0 * (i % side) as f64, 2.0 * (i / side) as f64];
            let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let step = [0.48 * heading.cos(), 0.48 * heading.sin()];
            Trajectory {
                ped_id: i as i64 + 1,
                start_step: 0,
                positions: (0..t_obs + t_pred)
                    .map(|k| [start[0] + k as f64 * step[0], start[1] + k as f64 * step[1]])
                    .collect(),
            }
        })
        .collect();
    Scene::new(0, t_obs, people)
}

/// Times zero-noise prediction for every model, crowd size and horizon.
/// Each row keeps the fastest of `reps` runs after one warm-up run.
pub fn run_bench(
    base: &SganConfig,
    sizes: &[usize],
    horizons: &[usize],
    reps: usize,
) -> Result<Vec<BenchRow>> {
    ensure!(reps >= 1, "bench needs at least one repetition");
    let mut rows = Vec::new();
    for &t_pred in horizons {
        for &n in sizes {
            ensure!(n >= 1, "crowd size must be at least 1");
            let scene = crowd(n, base.t_obs, t_pred, base.seed);
            for model in BenchModel::ALL {
                let g = model.generator(base, t_pred)?;
                let batch = sgan::sgan::SceneBatch::new(&[&scene], base.t_obs, t_pred, false)?;
                let z = sgan::numerics::Tensor::zeros(batch.n_rows(), g.noise_dim());
                let (_, pool_calls) = g.predict(&batch, &z)?;
                let mut best = f64::INFINITY;
                for _ in 0..reps {
                    let t = Instant::now();
                    let out = g.predict(&batch, &z)?;
                    best = best.min(t.elapsed().as_secs_f64());
                    std::hint::black_box(out);
                }
                rows.push(BenchRow {
                    model,
                    n_people: n,
                    t_pred,
                    seconds: best,
                    pool_calls,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_bench<W: Write>(mut w: W, rows: &[BenchRow]) -> Result<()> {
    writeln!(w, "{BENCH_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_call_counts() {
        let rows = run_bench(&SganConfig::default(), &[3], &[12], 1).unwrap();
        let calls: Vec<(BenchModel, usize)> =
            rows.iter().map(|r| (r.model, r.pool_calls)).collect();
        assert_eq!(
            calls,
            [
                (BenchModel::LstmOnly, 0),
                (BenchModel::PoolOnce, 1),
                (BenchModel::PoolPerStep, 12),
                (BenchModel::GridPerStep, 12)
            ]
        );
    }
}
