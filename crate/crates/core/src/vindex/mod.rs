//! Nearest-neighbour indices over unit-norm embeddings.
//!
//! Distances are squared L2. On unit vectors that is `2 − 2·cos θ`, so the
//! ranking is the same as inner-product ranking. Results are ordered by
//! `(distance, id)`, which makes them independent of insertion order.

mod flat;
mod ivf;
mod kmeans;
mod persist;
mod topk;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{is_unit, Scalar};

pub use flat::FlatIndex;
pub use ivf::IvfIndex;
pub use kmeans::{kmeans, KMeansResult, KMEANS_MAX_ITERS, KMEANS_REL_TOL};
pub use persist::{load_index, save_index, INDEX_MAGIC, INDEX_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor<T> {
    pub id: String,
    pub distance: T,
}

/// Total order used for every result list.
pub fn neighbor_order<T: Scalar>(a: (T, &str), b: (T, &str)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.1.cmp(b.1))
}

/// Common search surface for flat and IVF indices.
pub trait VectorIndex<T: Scalar>: Send + Sync {
    fn len(&self) -> usize;
    fn dim(&self) -> usize;
    fn ids(&self) -> &[String];

    /// Up to `k` nearest stored vectors whose ids are not in `exclude`.
    fn search(&self, query: &[T], k: usize, exclude: &[&str]) -> Result<Vec<Neighbor<T>>>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    #[default]
    Flat,
    Ivf,
}

/// Index chosen at runtime; IVF searches use the index's default `nprobe`.
#[derive(Debug, Clone)]
pub enum AnyIndex<T> {
    Flat(FlatIndex<T>),
    Ivf(IvfIndex<T>),
}

impl<T: Scalar> AnyIndex<T> {
    pub fn kind(&self) -> IndexKind {
        match self {
            AnyIndex::Flat(_) => IndexKind::Flat,
            AnyIndex::Ivf(_) => IndexKind::Ivf,
        }
    }
}

impl<T: Scalar> VectorIndex<T> for AnyIndex<T> {
    fn len(&self) -> usize {
        match self {
            AnyIndex::Flat(i) => i.len(),
            AnyIndex::Ivf(i) => i.len(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            AnyIndex::Flat(i) => i.dim(),
            AnyIndex::Ivf(i) => i.dim(),
        }
    }

    fn ids(&self) -> &[String] {
        match self {
            AnyIndex::Flat(i) => i.ids(),
            AnyIndex::Ivf(i) => i.ids(),
        }
    }

    fn search(&self, query: &[T], k: usize, exclude: &[&str]) -> Result<Vec<Neighbor<T>>> {
        match self {
            AnyIndex::Flat(i) => i.search(query, k, exclude),
            AnyIndex::Ivf(i) => i.search(query, k, exclude),
        }
    }
}

pub(crate) fn validate_query<T: Scalar>(query: &[T], dim: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Validation("k must be >= 1".into()));
    }
    if query.len() != dim {
        return Err(Error::Validation(format!(
            "query has dimension {}, index has {dim}",
            query.len()
        )));
    }
    if !is_unit(query) {
        return Err(Error::Validation("query vector is not unit-norm".into()));
    }
    Ok(())
}

pub(crate) fn validate_rows<T: Scalar>(ids: &[String], dim: usize, data: &[T]) -> Result<()> {
    if dim == 0 {
        return Err(Error::Validation("dimension must be >= 1".into()));
    }
    if data.len() != ids.len() * dim {
        return Err(Error::Shape(format!(
            "{} ids with d={dim} need {} values, got {}",
            ids.len(),
            ids.len() * dim,
            data.len()
        )));
    }
    for (id, row) in ids.iter().zip(data.chunks_exact(dim)) {
        if !is_unit(row) {
            return Err(Error::Validation(format!("row {id:?} is not unit-norm")));
        }
    }
    crate::corpus::check_unique(ids.iter().map(String::as_str))
}

pub(crate) fn squared_norms<T: Scalar>(data: &[T], dim: usize) -> Vec<T> {
    data.chunks_exact(dim).map(|r| crate::scalar::dot(r, r)).collect()
}
