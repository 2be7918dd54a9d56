use super::topk::TopK;
use super::{squared_norms, validate_query, validate_rows, Neighbor, VectorIndex};
use crate::error::Result;
use crate::scalar::{dot, dot_group, l2_from_dot, Scalar, GROUP};

/// Exhaustive-scan index; the reference every other index is checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatIndex<T> {
    ids: Vec<String>,
    dim: usize,
    data: Vec<T>,
    sq_norms: Vec<T>,
}

impl<T: Scalar> FlatIndex<T> {
    /// Builds from row-major unit vectors. Rows must be unit-norm (±1e-4)
    /// and ids unique.
    pub fn build(ids: Vec<String>, dim: usize, data: Vec<T>) -> Result<Self> {
        validate_rows(&ids, dim, &data)?;
        let sq_norms = squared_norms(&data, dim);
        Ok(Self {
            ids,
            dim,
            data,
            sq_norms,
        })
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Searches many queries at once, scanning the matrix in cache-sized row
    /// blocks. Each result equals the corresponding single-query search.
    pub fn search_batch(
        &self,
        queries: &[&[T]],
        k: usize,
        exclude: &[&str],
    ) -> Result<Vec<Vec<Neighbor<T>>>> {
        for q in queries {
            validate_query(q, self.dim, k)?;
        }
        let mut heaps: Vec<TopK<'_, T>> = queries.iter().map(|_| TopK::new(k, &self.ids)).collect();
        let q_norms: Vec<T> = queries.iter().map(|q| dot(q, q)).collect();
        let block_rows = (256 * 1024 / (self.dim * std::mem::size_of::<T>())).max(1);
        let groups = queries.len() / GROUP * GROUP;
        for start in (0..self.len()).step_by(block_rows) {
            let end = (start + block_rows).min(self.len());
            for g in (0..groups).step_by(GROUP) {
                let qs: [&[T]; GROUP] = std::array::from_fn(|j| queries[g + j]);
                for i in start..end {
                    let dots = dot_group(qs, self.row(i));
                    for (j, heap) in heaps[g..g + GROUP].iter_mut().enumerate() {
                        let d = l2_from_dot(q_norms[g + j], self.sq_norms[i], dots[j]);
                        if heap.admits(d) && !exclude.contains(&self.ids[i].as_str()) {
                            heap.push(d, i);
                        }
                    }
                }
            }
            for g in groups..queries.len() {
                for i in start..end {
                    let d = l2_from_dot(q_norms[g], self.sq_norms[i], dot(queries[g], self.row(i)));
                    if heaps[g].admits(d) && !exclude.contains(&self.ids[i].as_str()) {
                        heaps[g].push(d, i);
                    }
                }
            }
        }
        Ok(heaps.into_iter().map(TopK::into_neighbors).collect())
    }
}

impl<T: Scalar> VectorIndex<T> for FlatIndex<T> {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ids(&self) -> &[String] {
        &self.ids
    }

    fn search(&self, query: &[T], k: usize, exclude: &[&str]) -> Result<Vec<Neighbor<T>>> {
        validate_query(query, self.dim, k)?;
        let mut heap = TopK::new(k, &self.ids);
        let qn = dot(query, query);
        for (i, row) in self.data.chunks_exact(self.dim).enumerate() {
            let d = l2_from_dot(qn, self.sq_norms[i], dot(query, row));
            if heap.admits(d) && !exclude.contains(&self.ids[i].as_str()) {
                heap.push(d, i);
            }
        }
        Ok(heap.into_neighbors())
    }
}
