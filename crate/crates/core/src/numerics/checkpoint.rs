//! Binary checkpoint container.
//!
//! Layout, all integers `u32` little-endian and all reals `f64` little-endian:
//!
//! ```text
//! "SGANCKPT/1\n"
//! n_meta,    then n_meta    x (key_len, key bytes, value_len, value bytes)
//! n_tensors, then n_tensors x (name_len, name bytes, rows, cols, rows*cols reals)
//! ```
//!
//! Tensors are stored in parameter visit order, so equal models serialize to
//! equal bytes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::param::Parameters;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8] = b"SGANCKPT/1\n";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub meta: BTreeMap<String, String>,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn from_params<P: Parameters + ?Sized>(meta: BTreeMap<String, String>, params: &P) -> Self {
        let mut tensors = Vec::new();
        params.visit(&mut |p| tensors.push((p.name().to_owned(), p.value().clone())));
        Self { meta, tensors }
    }

    /// Copies stored tensors into `params`. Every parameter must be present
    /// with a matching shape.
    pub fn load_into<P: Parameters + ?Sized>(&self, params: &mut P) -> Result<()> {
        let index: BTreeMap<&str, &Tensor> =
            self.tensors.iter().map(|(n, t)| (n.as_str(), t)).collect();
        let mut err = None;
        params.visit_mut(&mut |p| {
            if err.is_some() {
                return;
            }
            match index.get(p.name()) {
                None => err = Some(format!("missing tensor {}", p.name())),
                Some(t) if t.shape() != p.value().shape() => {
                    err = Some(format!(
                        "tensor {} has shape {:?}, model expects {:?}",
                        p.name(),
                        t.shape(),
                        p.value().shape()
                    ))
                }
                Some(t) => p.set_value((*t).clone()),
            }
        });
        match err {
            Some(e) => Err(Error::Checkpoint(e)),
            None => Ok(()),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        put_u32(&mut out, self.meta.len());
        for (k, v) in &self.meta {
            put_str(&mut out, k);
            put_str(&mut out, v);
        }
        put_u32(&mut out, self.tensors.len());
        for (name, t) in &self.tensors {
            put_str(&mut out, name);
            put_u32(&mut out, t.rows());
            put_u32(&mut out, t.cols());
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::Checkpoint("bad header, expected SGANCKPT/1".into()));
        }
        let mut meta = BTreeMap::new();
        for _ in 0..r.u32()? {
            let k = r.string()?;
            let v = r.string()?;
            meta.insert(k, v);
        }
        let n = r.u32()?;
        let mut tensors = Vec::with_capacity(n);
        for _ in 0..n {
            let name = r.string()?;
            let rows = r.u32()?;
            let cols = r.u32()?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                let b: [u8; 8] = r.take(8)?.try_into().expect("8 bytes");
                data.push(f64::from_le_bytes(b));
            }
            tensors.push((name, Tensor::new(rows, cols, data)?));
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(Self { meta, tensors })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn put_u32(out: &mut Vec<u8>, n: usize) {
    let n = u32::try_from(n).expect("checkpoint field exceeds u32");
    out.extend_from_slice(&n.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        let b: [u8; 4] = self.take(4)?.try_into().expect("4 bytes");
        Ok(u32::from_le_bytes(b) as usize)
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("invalid utf-8 name".into()))
    }
}
