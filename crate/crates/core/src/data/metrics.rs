use super::PredictionSample;
use crate::error::{Error, Result};
use crate::pooling::Point;

pub const METRICS_HEADER: &str = "fold,model,n_samples,ade,fde,collision_rate,seconds";

fn check_shapes(gt: &[Vec<Point>], pred: &[Vec<Point>]) -> Result<()> {
    let t = gt.first().map_or(0, Vec::len);
    let bad = gt.len() != pred.len()
        || gt
            .iter()
            .zip(pred)
            .any(|(g, p)| g.len() != t || p.len() != t);
    if bad {
        return Err(Error::Dimension {
            op: "displacement error",
            lhs: (gt.len(), t),
            rhs: (pred.len(), pred.first().map_or(0, Vec::len)),
        });
    }
    Ok(())
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Mean Euclidean distance over all people and predicted steps.
pub fn ade(gt: &[Vec<Point>], pred: &[Vec<Point>]) -> Result<f64> {
    check_shapes(gt, pred)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for (g, p) in gt.iter().zip(pred) {
        for (a, b) in g.iter().zip(p) {
            total += dist(*a, *b);
            count += 1;
        }
    }
    Ok(if count == 0 {
        0.0
    } else {
        total / count as f64
    })
}

/// Mean over people of the distance at the last predicted step.
pub fn fde(gt: &[Vec<Point>], pred: &[Vec<Point>]) -> Result<f64> {
    check_shapes(gt, pred)?;
    let finals: Vec<f64> = gt
        .iter()
        .zip(pred)
        .filter_map(|(g, p)| Some(dist(*g.last()?, *p.last()?)))
        .collect();
    Ok(if finals.is_empty() {
        0.0
    } else {
        finals.iter().sum::<f64>() / finals.len() as f64
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Ade,
    Fde,
}

impl Metric {
    pub fn eval(self, gt: &[Vec<Point>], pred: &[Vec<Point>]) -> Result<f64> {
        match self {
            Metric::Ade => ade(gt, pred),
            Metric::Fde => fde(gt, pred),
        }
    }

    /// Best value over `samples` and its index (ties go to the lowest index).
    pub fn best_of(self, gt: &[Vec<Point>], samples: &[PredictionSample]) -> Result<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for (k, s) in samples.iter().enumerate() {
            let v = self.eval(gt, &s.positions)?;
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, k));
            }
        }
        best.ok_or(Error::Empty("min_of_n"))
    }
}

/// Per scene, the best metric over that scene's samples; averaged over scenes.
pub fn min_of_n(
    metric: Metric,
    gts: &[Vec<Vec<Point>>],
    samples: &[Vec<PredictionSample>],
) -> Result<f64> {
    if gts.len() != samples.len() {
        return Err(Error::Dimension {
            op: "min_of_n",
            lhs: (gts.len(), 0),
            rhs: (samples.len(), 0),
        });
    }
    if gts.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (gt, s) in gts.iter().zip(samples) {
        total += metric.best_of(gt, s)?.0;
    }
    Ok(total / gts.len() as f64)
}

/// Fraction of predictions in which two people come within `threshold`
/// meters of each other at the same step.
pub fn collision_rate(predictions: &[PredictionSample], threshold: f64) -> f64 {
    if predictions.is_empty() {
        return 0.0;
    }
    let hits = predictions
        .iter()
        .filter(|s| {
            let p = &s.positions;
            (0..s.t_pred()).any(|t| {
                (0..p.len()).any(|i| (i + 1..p.len()).any(|j| dist(p[i][t], p[j][t]) < threshold))
            })
        })
        .count();
    hits as f64 / predictions.len() as f64
}

/// One row of the evaluation CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub fold: String,
    pub model: String,
    pub n_samples: usize,
    /// Min-over-`n_samples` ADE.
    pub ade: f64,
    pub fde: f64,
    /// Plain ADE/FDE of the first sample.
    pub mean_ade: f64,
    pub mean_fde: f64,
    pub collision_rate: f64,
    pub n_scenes: usize,
    pub n_people: usize,
    pub seconds: f64,
}

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6}",
            self.fold,
            self.model,
            self.n_samples,
            self.ade,
            self.fde,
            self.collision_rate,
            self.seconds
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, dx: f64, dy: f64) -> Vec<Point> {
        (0..n).map(|k| [k as f64 + dx, dy]).collect()
    }

    #[test]
    fn ade_cases() {
        let gt = vec![line(4, 0.0, 0.0), line(4, 0.0, 2.0)];
        assert_eq!(ade(&gt, &gt).unwrap(), 0.0);
        let off: Vec<Vec<Point>> = gt
            .iter()
            .map(|p| p.iter().map(|[x, y]| [x + 0.3, y + 0.4]).collect())
            .collect();
        assert!((ade(&gt, &off).unwrap() - 0.5).abs() < 1e-15);
        // one person, two steps, errors 1 and 0
        let g = vec![vec![[0.0, 0.0], [1.0, 0.0]]];
        let p = vec![vec![[1.0, 0.0], [1.0, 0.0]]];
        assert_eq!(ade(&g, &p).unwrap(), 0.5);
    }

    #[test]
    fn fde_cases() {
        let gt = vec![line(5, 0.0, 0.0)];
        assert_eq!(fde(&gt, &gt).unwrap(), 0.0);
        let mut last_off = gt.clone();
        last_off[0][4][0] += 0.3;
        last_off[0][4][1] += 0.4;
        assert!((fde(&gt, &last_off).unwrap() - 0.5).abs() < 1e-15);
        assert!((ade(&gt, &last_off).unwrap() - 0.5 / 5.0).abs() < 1e-15);
        // straight gt from 0 to 2 m, prediction stuck at the start
        let g = vec![vec![[0.5, 0.0], [1.0, 0.0], [1.5, 0.0], [2.0, 0.0]]];
        let p = vec![vec![[0.0, 0.0]; 4]];
        assert_eq!(fde(&g, &p).unwrap(), 2.0);
    }

    #[test]
    fn shape_mismatch() {
        let gt = vec![line(3, 0.0, 0.0)];
        assert!(ade(&gt, &[line(2, 0.0, 0.0)]).is_err());
        assert!(fde(&gt, &[]).is_err());
    }

    fn sample(p: Vec<Vec<Point>>) -> PredictionSample {
        PredictionSample {
            positions: p,
            z: vec![],
        }
    }

    #[test]
    fn min_of_n_cases() {
        let gt = vec![line(3, 0.0, 0.0)];
        let bad = sample(vec![line(3, 1.0, 0.0)]);
        let good = sample(gt.clone());
        let plain = ade(&gt, &bad.positions).unwrap();
        assert_eq!(
            min_of_n(Metric::Ade, std::slice::from_ref(&gt), &[vec![bad.clone()]]).unwrap(),
            plain
        );
        assert_eq!(
            min_of_n(
                Metric::Ade,
                std::slice::from_ref(&gt),
                &[vec![bad.clone(), good]]
            )
            .unwrap(),
            0.0
        );
        assert_eq!(Metric::Ade.best_of(&gt, &[bad.clone(), bad]).unwrap().1, 0);
        assert!(Metric::Fde.best_of(&gt, &[]).is_err());
    }

    #[test]
    fn collision_cases() {
        let parallel = sample(vec![line(5, 0.0, 0.0), line(5, 0.0, 1.0)]);
        assert_eq!(collision_rate(std::slice::from_ref(&parallel), 0.1), 0.0);
        let crossing = sample(vec![
            vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]],
            vec![[2.0, 0.0], [1.0, 1.0], [0.0, 2.0]],
        ]);
        assert_eq!(collision_rate(&[crossing.clone(), parallel], 0.1), 0.5);
        assert_eq!(collision_rate(&[sample(vec![line(5, 0.0, 0.0)])], 0.1), 0.0);
    }
}
