use std::io::Write;
use std::path::Path;

use super::PredictionSample;
use crate::error::{Error, Result};

/// One line of a prediction dump: `scene_id sample_id ped_id t x y`, where
/// `t` counts prediction steps from 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DumpRow {
    pub scene_id: usize,
    pub sample_id: usize,
    pub ped_id: i64,
    pub t: usize,
    pub x: f64,
    pub y: f64,
}

impl DumpRow {
    /// Rows for one sample, people in order, steps in order.
    pub fn from_sample(
        scene_id: usize,
        sample_id: usize,
        ped_ids: &[i64],
        sample: &PredictionSample,
    ) -> Vec<DumpRow> {
        sample
            .positions
            .iter()
            .zip(ped_ids)
            .flat_map(|(path, &ped_id)| {
                path.iter().enumerate().map(move |(k, p)| DumpRow {
                    scene_id,
                    sample_id,
                    ped_id,
                    t: k + 1,
                    x: p[0],
                    y: p[1],
                })
            })
            .collect()
    }
}

/// Writes rows using shortest round-trip float formatting.
pub fn write_dump<W: Write>(mut out: W, rows: &[DumpRow]) -> Result<()> {
    for r in rows {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            r.scene_id, r.sample_id, r.ped_id, r.t, r.x, r.y
        )?;
    }
    Ok(())
}

pub fn read_dump(text: &str, origin: &Path) -> Result<Vec<DumpRow>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: n + 1,
            msg,
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("{s:?}: {e}")));
        let float = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s:?}: {e}")));
        rows.push(DumpRow {
            scene_id: int(f[0])?,
            sample_id: int(f[1])?,
            ped_id: f[2].parse().map_err(|e| err(format!("{:?}: {e}", f[2])))?,
            t: int(f[3])?,
            x: float(f[4])?,
            y: float(f[5])?,
        });
    }
    Ok(rows)
}
