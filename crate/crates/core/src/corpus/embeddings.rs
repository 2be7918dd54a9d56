//! Binary embedding matrix format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ECGE"
//! 4       4     version = 1        (u32 LE)
//! 8       8     n rows             (u64 LE)
//! 16      4     d columns          (u32 LE)
//! 20      4·n·d row-major f32 LE
//! ```
//!
//! Row ids live in a UTF-8 sidecar at `<path>.ids`, one id per line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use super::check_unique;
use super::jsonl::write_bytes;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ECGE";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

/// `n` embeddings of dimension `dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingSet {
    pub fn new(ids: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("embedding dimension must be >= 1".into()));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::Shape(format!(
                "{} ids with d={dim} need {} values, got {}",
                ids.len(),
                ids.len() * dim,
                data.len()
            )));
        }
        for id in &ids {
            if id.is_empty() || id.contains(['\n', '\r']) {
                return Err(Error::Validation(format!("invalid embedding id {id:?}")));
            }
        }
        check_unique(ids.iter().map(String::as_str))?;
        Ok(Self { ids, dim, data })
    }

    pub fn from_rows(rows: Vec<super::Embedding>) -> Result<Self> {
        let dim = rows.first().map(|e| e.dim()).unwrap_or(1);
        let mut ids = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for e in rows {
            if e.dim() != dim {
                return Err(Error::Shape(format!(
                    "embedding {:?} has d={}, expected {dim}",
                    e.id,
                    e.dim()
                )));
            }
            ids.push(e.id);
            data.extend_from_slice(&e.vector);
        }
        Self::new(ids, dim, data)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn get(&self, id: &str) -> Option<super::Embedding> {
        self.position(id).map(|i| super::Embedding {
            id: self.ids[i].clone(),
            vector: self.row(i).to_vec(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.data.chunks_exact(self.dim))
    }

    pub fn into_parts(self) -> (Vec<String>, usize, Vec<f32>) {
        (self.ids, self.dim, self.data)
    }
}

/// `<path>.ids`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(".ids");
    PathBuf::from(s)
}

pub(crate) fn encode_payload(out: &mut Vec<u8>, n: usize, dim: usize, data: &[f32]) {
    debug_assert_eq!(data.len(), n * dim);
    out.reserve(HEADER_LEN + data.len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for x in data {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub(crate) struct Payload {
    pub n: usize,
    pub dim: usize,
    pub data: Vec<f32>,
}

/// Decodes one payload from the front of `bytes`, returning it and the number
/// of bytes consumed.
pub(crate) fn decode_payload(bytes: &[u8]) -> Result<(Payload, usize)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad embedding magic {:?}",
            String::from_utf8_lossy(&bytes[0..4])
        )));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported embedding format version {version}"
        )));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let dim = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as u64;
    if dim == 0 {
        return Err(Error::Format("embedding dimension is 0".into()));
    }
    let payload_len = n
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| Error::Format(format!("header n={n}, d={dim} overflows")))?;
    let total = HEADER_LEN as u64 + payload_len;
    if (bytes.len() as u64) < total {
        return Err(Error::Truncated {
            expected: total,
            actual: bytes.len() as u64,
        });
    }
    let data = bytes[HEADER_LEN..total as usize]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((
        Payload {
            n: n as usize,
            dim: dim as usize,
            data,
        },
        total as usize,
    ))
}

pub(crate) fn write_ids(path: &Path, ids: &[String]) -> Result<()> {
    let mut text = String::with_capacity(ids.iter().map(|s| s.len() + 1).sum());
    for id in ids {
        text.push_str(id);
        text.push('\n');
    }
    write_bytes(path, text.as_bytes())
}

pub(crate) fn read_ids(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}

pub fn save_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    encode_payload(&mut bytes, set.len(), set.dim, &set.data);
    write_bytes(path, &bytes)?;
    write_ids(&sidecar_path(path), &set.ids)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (payload, used) = decode_payload(&bytes)?;
    if used != bytes.len() {
        return Err(Error::Format(format!(
            "{}: {} trailing bytes after payload",
            path.display(),
            bytes.len() - used
        )));
    }
    let ids = read_ids(&sidecar_path(path))?;
    if ids.len() != payload.n {
        return Err(Error::CountMismatch(format!(
            "{} lists {} ids but the matrix has {} rows",
            sidecar_path(path).display(),
            ids.len(),
            payload.n
        )));
    }
    EmbeddingSet::new(ids, payload.dim, payload.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("r{i}")).collect()
    }

    #[test]
    fn two_by_three_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.ecge");
        let set = EmbeddingSet::new(ids(2), 3, vec![1.0, 2.0, 3.0, -4.0, 0.5, 1e-30]).unwrap();
        save_embeddings(&set, &p).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 24);
        assert_eq!(&bytes[0..4], b"ECGE");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 3);
        assert_eq!(&bytes[20..24], &1.0f32.to_le_bytes());
        let back = load_embeddings(&p).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn truncated_payload_detected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.ecge");
        let set = EmbeddingSet::new(ids(4), 3, vec![0.0; 12]).unwrap();
        save_embeddings(&set, &p).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes[8..16].copy_from_slice(&5u64.to_le_bytes());
        fs::write(&p, &bytes).unwrap();
        assert!(matches!(load_embeddings(&p), Err(Error::Truncated { .. })));
    }

    #[test]
    fn sidecar_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.ecge");
        let set = EmbeddingSet::new(ids(2), 3, vec![0.0; 6]).unwrap();
        save_embeddings(&set, &p).unwrap();
        fs::write(sidecar_path(&p), "a\nb\nc\n").unwrap();
        assert!(matches!(load_embeddings(&p), Err(Error::CountMismatch(_))));
    }

    #[test]
    fn bad_magic_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.ecge");
        let set = EmbeddingSet::new(ids(1), 2, vec![0.0; 2]).unwrap();
        save_embeddings(&set, &p).unwrap();
        let good = fs::read(&p).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        fs::write(&p, &bad).unwrap();
        assert!(matches!(load_embeddings(&p), Err(Error::Format(_))));

        let mut bad = good;
        bad[4..8].copy_from_slice(&2u32.to_le_bytes());
        fs::write(&p, &bad).unwrap();
        assert!(matches!(load_embeddings(&p), Err(Error::Format(_))));
    }

    #[test]
    fn empty_set_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.ecge");
        let set = EmbeddingSet::new(vec![], 8, vec![]).unwrap();
        save_embeddings(&set, &p).unwrap();
        assert_eq!(fs::read(&p).unwrap().len(), HEADER_LEN);
        let back = load_embeddings(&p).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), 8);
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(EmbeddingSet::new(vec![], 0, vec![]).is_err());
    }

    #[test]
    fn unwritable_path_errors() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let set = EmbeddingSet::new(ids(1), 1, vec![1.0]).unwrap();
        assert!(matches!(
            save_embeddings(&set, blocker.join("sub/e.ecge")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn payload_bytes_survive_round_trip(
            (n, d, data) in (0usize..6, 1usize..6).prop_flat_map(|(n, d)| {
                (Just(n), Just(d), proptest::collection::vec(any::<f32>().prop_filter("finite", |x| x.is_finite()), n * d))
            })
        ) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("e.ecge");
            let set = EmbeddingSet::new(ids(n), d, data.clone()).unwrap();
            save_embeddings(&set, &p).unwrap();
            let first = fs::read(&p).unwrap();
            let back = load_embeddings(&p).unwrap();
            let bits: Vec<u32> = back.data().iter().map(|x| x.to_bits()).collect();
            let want: Vec<u32> = data.iter().map(|x| x.to_bits()).collect();
            prop_assert_eq!(bits, want);
            save_embeddings(&back, &p).unwrap();
            prop_assert_eq!(fs::read(&p).unwrap(), first);
        }
    }
}
