use super::kmeans::{kmeans, nearest_centroid};
use super::topk::TopK;
use super::{validate_query, validate_rows, Neighbor, VectorIndex};
use crate::error::{Error, Result};
use crate::scalar::{dot, l2_from_dot, squared_l2, Scalar};

/// Vectors of one k-means cell, kept contiguous.
#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct InvertedList<T> {
    pub rows: Vec<usize>,
    pub vectors: Vec<T>,
    pub sq_norms: Vec<T>,
}

/// Inverted-file index: k-means cells over the stored vectors, exact scan
/// inside the `nprobe` cells nearest the query.
#[derive(Debug, Clone, PartialEq)]
pub struct IvfIndex<T> {
    pub(crate) ids: Vec<String>,
    pub(crate) dim: usize,
    pub(crate) nlist: usize,
    pub(crate) nprobe_default: usize,
    pub(crate) kmeans_seed: u64,
    pub(crate) centroids: Vec<T>,
    pub(crate) assignments: Vec<usize>,
    pub(crate) lists: Vec<InvertedList<T>>,
}

impl<T: Scalar> IvfIndex<T> {
    pub fn build(
        ids: Vec<String>,
        dim: usize,
        data: Vec<T>,
        nlist: usize,
        kmeans_seed: u64,
    ) -> Result<Self> {
        validate_rows(&ids, dim, &data)?;
        if nlist == 0 || ids.len() < nlist {
            return Err(Error::Validation(format!(
                "IVF needs 1 <= nlist <= n, got nlist={nlist}, n={}",
                ids.len()
            )));
        }
        let km = kmeans(&data, dim, nlist, kmeans_seed);
        Self::from_parts(ids, dim, &data, km.centroids, km.assignments, 1, kmeans_seed)
    }

    /// Assembles an index from already-computed centroids and assignments.
    pub(crate) fn from_parts(
        ids: Vec<String>,
        dim: usize,
        data: &[T],
        centroids: Vec<T>,
        assignments: Vec<usize>,
        nprobe_default: usize,
        kmeans_seed: u64,
    ) -> Result<Self> {
        let nlist = centroids.len() / dim;
        if nlist == 0 || centroids.len() != nlist * dim {
            return Err(Error::Format("centroid matrix has the wrong shape".into()));
        }
        if assignments.len() != ids.len() {
            return Err(Error::Format("assignment count differs from row count".into()));
        }
        let mut lists = vec![InvertedList::default(); nlist];
        for (row, (&c, v)) in assignments.iter().zip(data.chunks_exact(dim)).enumerate() {
            let list = lists
                .get_mut(c)
                .ok_or_else(|| Error::Format(format!("row {row} assigned to missing list {c}")))?;
            list.rows.push(row);
            list.vectors.extend_from_slice(v);
            list.sq_norms.push(dot(v, v));
        }
        let mut index = Self {
            ids,
            dim,
            nlist,
            nprobe_default: 1,
            kmeans_seed,
            centroids,
            assignments,
            lists,
        };
        index.set_nprobe(nprobe_default)?;
        Ok(index)
    }

    pub fn nlist(&self) -> usize {
        self.nlist
    }

    pub fn nprobe(&self) -> usize {
        self.nprobe_default
    }

    pub fn kmeans_seed(&self) -> u64 {
        self.kmeans_seed
    }

    pub fn set_nprobe(&mut self, nprobe: usize) -> Result<()> {
        self.check_nprobe(nprobe)?;
        self.nprobe_default = nprobe;
        Ok(())
    }

    pub fn with_nprobe(mut self, nprobe: usize) -> Result<Self> {
        self.set_nprobe(nprobe)?;
        Ok(self)
    }

    fn check_nprobe(&self, nprobe: usize) -> Result<()> {
        if nprobe == 0 || nprobe > self.nlist {
            return Err(Error::Validation(format!(
                "nprobe must be in 1..={}, got {nprobe}",
                self.nlist
            )));
        }
        Ok(())
    }

    pub fn centroids(&self) -> &[T] {
        &self.centroids
    }

    /// List index of each stored row, in insertion order.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Row numbers held by list `c`.
    pub fn list_rows(&self, c: usize) -> &[usize] {
        &self.lists[c].rows
    }

    /// Stored rows in insertion order, reassembled from the lists.
    pub fn rows_in_order(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.ids.len() * self.dim];
        for list in &self.lists {
            for (r, v) in list.rows.iter().zip(list.vectors.chunks_exact(self.dim)) {
                out[r * self.dim..(r + 1) * self.dim].copy_from_slice(v);
            }
        }
        out
    }

    /// The `nprobe` cells closest to `query`, ties by cell index.
    pub fn probe_order(&self, query: &[T], nprobe: usize) -> Vec<usize> {
        let mut cells: Vec<(T, usize)> = self
            .centroids
            .chunks_exact(self.dim)
            .map(|c| squared_l2(query, c))
            .zip(0..)
            .collect();
        cells.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        cells.truncate(nprobe);
        cells.into_iter().map(|(_, c)| c).collect()
    }

    pub fn search_with_nprobe(
        &self,
        query: &[T],
        k: usize,
        nprobe: usize,
        exclude: &[&str],
    ) -> Result<Vec<Neighbor<T>>> {
        validate_query(query, self.dim, k)?;
        self.check_nprobe(nprobe)?;
        let mut heap = TopK::new(k, &self.ids);
        let qn = dot(query, query);
        for c in self.probe_order(query, nprobe) {
            let list = &self.lists[c];
            let rows = list.rows.iter().zip(&list.sq_norms);
            for ((&row, &rn), v) in rows.zip(list.vectors.chunks_exact(self.dim)) {
                let d = l2_from_dot(qn, rn, dot(query, v));
                if heap.admits(d) && !exclude.contains(&self.ids[row].as_str()) {
                    heap.push(d, row);
                }
            }
        }
        Ok(heap.into_neighbors())
    }

    /// Whether every row sits in the list of its nearest centroid.
    pub fn assignments_are_nearest(&self) -> bool {
        let dim = self.dim;
        self.lists.iter().enumerate().all(|(c, list)| {
            let own = &self.centroids[c * dim..(c + 1) * dim];
            list.vectors.chunks_exact(dim).all(|v| {
                let (_, best) = nearest_centroid(v, &self.centroids, dim);
                squared_l2(v, own) <= best
            })
        })
    }
}

impl<T: Scalar> VectorIndex<T> for IvfIndex<T> {
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
        self.search_with_nprobe(query, k, self.nprobe_default, exclude)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::l2_normalize;
    use crate::vindex::FlatIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i:04}")).collect()
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<f32> {
        let mut out = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let mut row: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            l2_normalize(&mut row);
            out.extend(row);
        }
        out
    }

    #[test]
    fn single_list_equals_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_unit(&mut rng, 50, 8);
        let ivf = IvfIndex::build(names(50), 8, data.clone(), 1, 0).unwrap();
        assert_eq!(ivf.list_rows(0).len(), 50);
        let flat = FlatIndex::build(names(50), 8, data.clone()).unwrap();
        for q in data.chunks_exact(8).take(10) {
            assert_eq!(
                ivf.search_with_nprobe(q, 7, 1, &[]).unwrap(),
                flat.search(q, 7, &[]).unwrap()
            );
        }
    }

    #[test]
    fn two_clusters_split_cleanly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dim = 4;
        let mut data = Vec::new();
        let mut side = Vec::new();
        for i in 0..40 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let mut row: Vec<f32> = (0..dim).map(|_| rng.random_range(-0.05..0.05)).collect();
            row[0] += sign;
            l2_normalize(&mut row);
            data.extend(row);
            side.push(i % 2);
        }
        let ivf = IvfIndex::build(names(40), dim, data, 2, 5).unwrap();
        // Brute-force check: rows on the same side share a list, sides differ.
        let a = ivf.assignments();
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(side[i] == side[j], a[i] == a[j], "rows {i},{j}");
            }
        }
        assert!(ivf.assignments_are_nearest());
    }

    #[test]
    fn duplicates_share_a_list() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut data = random_unit(&mut rng, 20, 6);
        let dup = data[..6].to_vec();
        data.extend(&dup);
        data.extend(&dup);
        let ivf = IvfIndex::build(names(22), 6, data, 4, 2).unwrap();
        let a = ivf.assignments();
        assert_eq!(a[0], a[20]);
        assert_eq!(a[0], a[21]);
    }

    #[test]
    fn nlist_bounds_and_nprobe_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = random_unit(&mut rng, 5, 3);
        assert!(IvfIndex::build(names(5), 3, data.clone(), 6, 0).is_err());
        assert!(IvfIndex::build(names(5), 3, data.clone(), 0, 0).is_err());
        let ivf = IvfIndex::build(names(5), 3, data.clone(), 2, 0).unwrap();
        let q = &data[..3];
        assert!(ivf.search_with_nprobe(q, 1, 0, &[]).is_err());
        assert!(ivf.search_with_nprobe(q, 1, 3, &[]).is_err());
        assert!(ivf.search_with_nprobe(q, 1, 2, &[]).is_ok());
    }

    #[test]
    fn short_result_when_probe_is_small() {
        let mut data = Vec::new();
        for i in 0..10 {
            let mut row = vec![0.0f32; 2];
            row[0] = if i < 5 { 1.0 } else { -1.0 };
            row[1] = i as f32 * 0.01;
            l2_normalize(&mut row);
            data.extend(row);
        }
        let ivf = IvfIndex::build(names(10), 2, data.clone(), 2, 0).unwrap();
        let hits = ivf.search_with_nprobe(&data[..2], 8, 1, &[]).unwrap();
        assert_eq!(hits.len(), 5);
    }

    #[test]
    fn rows_in_order_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = random_unit(&mut rng, 30, 5);
        let ivf = IvfIndex::build(names(30), 5, data.clone(), 3, 8).unwrap();
        assert_eq!(ivf.rows_in_order(), data);
    }
}
