//! `EMB1` / `PCA1` binary containers.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic    [u8; 4]   "EMB1" or "PCA1"
//! dim      u32
//! count    u64
//! count × { id_len u16, id [u8; id_len] (UTF-8), values [f32 LE; dim] }
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const EMB_MAGIC: [u8; 4] = *b"EMB1";
pub const PCA_MAGIC: [u8; 4] = *b"PCA1";

/// Width of the image embeddings the pipeline works with.
pub const EMBEDDING_DIM: usize = 4096;

/// Row-major id-keyed `f32` vectors of one fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize) -> Self {
        EmbeddingMatrix { dim, ids: Vec::new(), index: HashMap::new(), data: Vec::new() }
    }

    /// Appends one vector. Ids must be unique and components finite.
    pub fn push(&mut self, id: impl Into<String>, values: &[f32]) -> Result<()> {
        let id = id.into();
        if values.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: values.len() });
        }
        if id.len() > u16::MAX as usize {
            return Err(Error::InvalidArgument(format!("id longer than {} bytes", u16::MAX)));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("`{id}` component {bad} is not finite")));
        }
        if self.index.contains_key(&id) {
            return Err(Error::InvalidArgument(format!("duplicate id `{id}`")));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(values);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.index_of(id).map(|i| self.row(i))
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = (&str, &[f32])> {
        self.ids.iter().map(String::as_str).zip(self.data.chunks_exact(self.dim.max(1)))
    }

    pub fn negative_components(&self) -> usize {
        self.data.iter().filter(|v| **v < 0.0).count()
    }

    /// Rows whose id satisfies `keep`, in the original order.
    pub fn filter<F: FnMut(&str) -> bool>(&self, mut keep: F) -> Self {
        let mut out = EmbeddingMatrix::new(self.dim);
        for (id, row) in self.rows() {
            if keep(id) {
                out.push(id, row).expect("rows of a valid matrix");
            }
        }
        out
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let m = read_container(reader, EMB_MAGIC, "EMB1")?;
        let neg = m.negative_components();
        if neg > 0 {
            log::warn!("embedding file has {neg} negative components; rectified features expected");
        }
        Ok(m)
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        write_container(writer, EMB_MAGIC, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn write_container<W: Write>(mut w: W, magic: [u8; 4], m: &EmbeddingMatrix) -> Result<()> {
    let dim = u32::try_from(m.dim).map_err(|_| Error::InvalidArgument("dimension exceeds u32".into()))?;
    w.write_all(&magic)?;
    w.write_all(&dim.to_le_bytes())?;
    w.write_all(&(m.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.dim * 4);
    for (id, row) in m.rows() {
        w.write_all(&(id.len() as u16).to_le_bytes())?;
        w.write_all(id.as_bytes())?;
        buf.clear();
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub(crate) fn read_container<R: Read>(mut r: R, magic: [u8; 4], kind: &'static str) -> Result<EmbeddingMatrix> {
    let bad = |message: String| Error::Format { kind, message };
    let exact = |r: &mut R, buf: &mut [u8], what: &str| -> Result<()> {
        r.read_exact(buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => bad(format!("truncated while reading {what}")),
            _ => Error::Io(e),
        })
    };
    let mut head = [0u8; 4];
    exact(&mut r, &mut head, "magic")?;
    if head != magic {
        return Err(bad(format!("bad magic {:?}", String::from_utf8_lossy(&head))));
    }
    let mut b4 = [0u8; 4];
    exact(&mut r, &mut b4, "dimension")?;
    let dim = u32::from_le_bytes(b4) as usize;
    if dim == 0 {
        return Err(bad("zero dimension".into()));
    }
    let mut b8 = [0u8; 8];
    exact(&mut r, &mut b8, "count")?;
    let count = u64::from_le_bytes(b8);

    let mut m = EmbeddingMatrix::new(dim);
    let mut values = vec![0f32; dim];
    let mut raw = vec![0u8; dim * 4];
    for rec in 0..count {
        let mut b2 = [0u8; 2];
        exact(&mut r, &mut b2, "id length")?;
        let mut id = vec![0u8; u16::from_le_bytes(b2) as usize];
        exact(&mut r, &mut id, "id")?;
        let id = String::from_utf8(id).map_err(|_| bad(format!("record {rec}: id is not UTF-8")))?;
        exact(&mut r, &mut raw, "values")?;
        for (v, c) in values.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
        }
        m.push(id, &values).map_err(|e| bad(format!("record {rec}: {e}")))?;
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(bad("trailing bytes after last record".into()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmbeddingMatrix {
        let mut m = EmbeddingMatrix::new(3);
        m.push("a", &[1.0, 0.0, 2.5]).unwrap();
        m.push("ünï", &[0.0, 3.0, 1e-7]).unwrap();
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = sample();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"EMB1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
        assert_eq!(u16::from_le_bytes(buf[16..18].try_into().unwrap()), 1);
        assert_eq!(buf.len(), 16 + (2 + 1 + 12) + (2 + 5 + 12));
        let back = EmbeddingMatrix::read(&buf[..]).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn rejects_malformed_input() {
        let m = sample();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        assert!(matches!(EmbeddingMatrix::read(&buf[..buf.len() - 1]), Err(Error::Format { .. })));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(matches!(EmbeddingMatrix::read(&extra[..]), Err(Error::Format { .. })));
        let mut wrong = buf.clone();
        wrong[..4].copy_from_slice(b"PCA1");
        assert!(matches!(EmbeddingMatrix::read(&wrong[..]), Err(Error::Format { .. })));
        let mut nan = buf.clone();
        nan[19..23].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(EmbeddingMatrix::read(&nan[..]), Err(Error::Format { .. })));
    }

    #[test]
    fn push_validates() {
        let mut m = sample();
        assert!(matches!(m.push("x", &[1.0]), Err(Error::DimensionMismatch { expected: 3, got: 1 })));
        assert!(m.push("a", &[1.0, 1.0, 1.0]).is_err());
        assert_eq!(m.get("ünï").unwrap()[1], 3.0);
        assert_eq!(m.filter(|id| id == "a").ids(), ["a"]);
    }
}
