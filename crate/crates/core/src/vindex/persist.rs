//! Index file format.
//!
//! ```text
//! "EIDX" | version u32 LE | kind u8 (0 = flat, 1 = ivf)
//! flat: embedding payload (n × d rows, insertion order)
//! ivf:  kmeans_seed u64 LE | nprobe_default u32 LE
//!       embedding payload (nlist × d centroids)
//!       embedding payload (n × d rows, insertion order)
//!       n × u32 LE list assignment per row
//! ```
//!
//! Embedding payloads are the full `ECGE` blocks from
//! [`crate::corpus::embeddings`]. Row ids go to `<path>.ids`.

use std::fs;
use std::path::Path;

use super::{AnyIndex, FlatIndex, IvfIndex, VectorIndex};
use crate::corpus::embeddings::{decode_payload, encode_payload, read_ids, sidecar_path, write_ids};
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &[u8; 4] = b"EIDX";
pub const INDEX_VERSION: u32 = 1;

const KIND_FLAT: u8 = 0;
const KIND_IVF: u8 = 1;

pub fn save_index(index: &AnyIndex<f32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    out.extend_from_slice(INDEX_MAGIC);
    out.extend_from_slice(&INDEX_VERSION.to_le_bytes());
    match index {
        AnyIndex::Flat(flat) => {
            out.push(KIND_FLAT);
            encode_payload(&mut out, flat.len(), flat.dim(), flat.data());
        }
        AnyIndex::Ivf(ivf) => {
            out.push(KIND_IVF);
            out.extend_from_slice(&ivf.kmeans_seed.to_le_bytes());
            out.extend_from_slice(&(ivf.nprobe_default as u32).to_le_bytes());
            encode_payload(&mut out, ivf.nlist, ivf.dim, &ivf.centroids);
            encode_payload(&mut out, ivf.ids.len(), ivf.dim, &ivf.rows_in_order());
            for &c in &ivf.assignments {
                out.extend_from_slice(&(c as u32).to_le_bytes());
            }
        }
    }
    crate::corpus::jsonl::write_bytes(path, &out)?;
    write_ids(&sidecar_path(path), index.ids())
}

fn take<'a>(bytes: &'a [u8], at: &mut usize, len: usize) -> Result<&'a [u8]> {
    let end = *at + len;
    if end > bytes.len() {
        return Err(Error::Truncated {
            expected: end as u64,
            actual: bytes.len() as u64,
        });
    }
    let s = &bytes[*at..end];
    *at = end;
    Ok(s)
}

pub fn load_index(path: impl AsRef<Path>) -> Result<AnyIndex<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut at = 0usize;
    if take(&bytes, &mut at, 4)? != INDEX_MAGIC {
        return Err(Error::Format(format!("{}: not an index file", path.display())));
    }
    let version = u32::from_le_bytes(take(&bytes, &mut at, 4)?.try_into().unwrap());
    if version != INDEX_VERSION {
        return Err(Error::Format(format!("unsupported index version {version}")));
    }
    let kind = take(&bytes, &mut at, 1)?[0];
    let ids = read_ids(&sidecar_path(path))?;
    let index = match kind {
        KIND_FLAT => {
            let (rows, used) = decode_payload(&bytes[at..])?;
            at += used;
            check_ids(&ids, rows.n)?;
            AnyIndex::Flat(FlatIndex::build(ids, rows.dim, rows.data)?)
        }
        KIND_IVF => {
            let seed = u64::from_le_bytes(take(&bytes, &mut at, 8)?.try_into().unwrap());
            let nprobe = u32::from_le_bytes(take(&bytes, &mut at, 4)?.try_into().unwrap());
            let (centroids, used) = decode_payload(&bytes[at..])?;
            at += used;
            let (rows, used) = decode_payload(&bytes[at..])?;
            at += used;
            if centroids.dim != rows.dim {
                return Err(Error::Format("centroid and row dimensions differ".into()));
            }
            check_ids(&ids, rows.n)?;
            let raw = take(&bytes, &mut at, rows.n * 4)?;
            let assignments: Vec<usize> = raw
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
                .collect();
            super::validate_rows(&ids, rows.dim, &rows.data)?;
            AnyIndex::Ivf(IvfIndex::from_parts(
                ids,
                rows.dim,
                &rows.data,
                centroids.data,
                assignments,
                nprobe as usize,
                seed,
            )?)
        }
        other => return Err(Error::Format(format!("unknown index kind {other}"))),
    };
    if at != bytes.len() {
        return Err(Error::Format(format!(
            "{}: {} trailing bytes",
            path.display(),
            bytes.len() - at
        )));
    }
    Ok(index)
}

fn check_ids(ids: &[String], n: usize) -> Result<()> {
    if ids.len() != n {
        return Err(Error::CountMismatch(format!(
            "index has {n} rows but the id sidecar lists {}",
            ids.len()
        )));
    }
    Ok(())
}
