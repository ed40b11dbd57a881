use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One annotation line: `frame ped_id x y`, world coordinates in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawRecord {
    pub frame: i64,
    pub ped_id: i64,
    pub x: f64,
    pub y: f64,
}

/// Parses whitespace-separated `frame ped_id x y` lines. Blank lines and
/// `#` comments are skipped. Output is sorted by `(ped_id, frame)`.
pub fn parse_records(text: &str, origin: &Path) -> Result<Vec<RawRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: line_no,
            msg,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(format!(
                "expected 4 fields, found {}",
                fields.len()
            )));
        }
        // Some exports write integer ids as floats ("10.0").
        let int = |s: &str| -> Result<i64> {
            s.parse::<i64>().or_else(|_| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0 && v.is_finite())
                    .map(|v| v as i64)
                    .ok_or_else(|| parse_err(format!("bad integer {s:?}")))
            })
        };
        let real = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| parse_err(format!("bad number {s:?}")))
        };
        let rec = RawRecord {
            frame: int(fields[0])?,
            ped_id: int(fields[1])?,
            x: real(fields[2])?,
            y: real(fields[3])?,
        };
        if !rec.x.is_finite() || !rec.y.is_finite() {
            return Err(Error::Data(format!(
                "{}:{line_no}: non-finite coordinate",
                origin.display()
            )));
        }
        if !seen.insert((rec.frame, rec.ped_id)) {
            return Err(Error::Data(format!(
                "{}:{line_no}: duplicate record for frame {} ped {}",
                origin.display(),
                rec.frame,
                rec.ped_id
            )));
        }
        out.push(rec);
    }
    out.sort_by_key(|r| (r.ped_id, r.frame));
    Ok(out)
}

pub fn parse_dataset(path: impl AsRef<Path>) -> Result<Vec<RawRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_records(&text, path)
}

/// `key = value` lines; `#` starts a comment. Later keys override earlier ones.
pub fn parse_key_values(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            msg: "expected key = value".into(),
        })?;
        out.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    Ok(out)
}

/// Per-file settings from the sidecar `<stem>.cfg`.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetMeta {
    pub name: String,
    /// Annotation frames per second.
    pub frame_rate: f64,
}

impl DatasetMeta {
    pub fn sidecar_path(data_path: &Path) -> PathBuf {
        data_path.with_extension("cfg")
    }

    /// Reads the sidecar next to `data_path`. Without one, the set is named
    /// after the file stem and each frame index is one 0.4 s step.
    pub fn load_for(data_path: &Path) -> Result<Self> {
        let stem = data_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut meta = Self {
            name: stem,
            frame_rate: 1.0 / super::STEP_SECONDS,
        };
        let side = Self::sidecar_path(data_path);
        if side.exists() {
            let kv = parse_key_values(&std::fs::read_to_string(&side)?, &side)?;
            if let Some(n) = kv.get("name") {
                meta.name = n.clone();
            }
            if let Some(r) = kv.get("frame_rate") {
                meta.frame_rate = r
                    .parse()
                    .ok()
                    .filter(|v: &f64| *v > 0.0 && v.is_finite())
                    .ok_or_else(|| {
                        Error::Config(format!("{}: bad frame_rate {r:?}", side.display()))
                    })?;
            }
        }
        Ok(meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<RawRecord>> {
        parse_records(text, Path::new("test.txt"))
    }

    #[test]
    fn single_line() {
        assert_eq!(
            parse("10 1 2.0 3.5").unwrap(),
            vec![RawRecord {
                frame: 10,
                ped_id: 1,
                x: 2.0,
                y: 3.5
            }]
        );
    }

    #[test]
    fn empty_and_comments() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# header\n\n   \n").unwrap().is_empty());
        assert_eq!(parse("10.0\t1.0\t2.0\t3.5  # tail").unwrap().len(), 1);
    }

    #[test]
    fn sorted_by_ped_then_frame() {
        let r = parse("20 2 0 0\n10 2 0 0\n30 1 0 0").unwrap();
        let keys: Vec<_> = r.iter().map(|r| (r.ped_id, r.frame)).collect();
        assert_eq!(keys, vec![(1, 30), (2, 10), (2, 20)]);
    }

    #[test]
    fn duplicate_is_data_error() {
        assert!(matches!(parse("10 1 0 0\n10 1 1 1"), Err(Error::Data(_))));
    }

    #[test]
    fn malformed_reports_line() {
        match parse("10 1 0 0\n11 1 zero 0") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("10 1 0"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn non_finite_is_data_error() {
        assert!(matches!(parse("10 1 NaN 0"), Err(Error::Data(_))));
        assert!(matches!(parse("10 1 0 inf"), Err(Error::Data(_))));
    }

    #[test]
    fn key_values() {
        let kv = parse_key_values("a = 1\n# c\nname=ETH # x\na = 2", Path::new("x")).unwrap();
        assert_eq!(kv["a"], "2");
        assert_eq!(kv["name"], "ETH");
        assert!(parse_key_values("novalue", Path::new("x")).is_err());
    }
}
