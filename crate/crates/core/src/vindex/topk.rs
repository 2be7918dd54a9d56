use std::cmp::Ordering;

use super::{neighbor_order, Neighbor};
use crate::scalar::Scalar;

/// Bounded sorted buffer of the best `(distance, row)` pairs seen so far.
pub(crate) struct TopK<'a, T> {
    k: usize,
    ids: &'a [String],
    items: Vec<(T, usize)>,
}

impl<'a, T: Scalar> TopK<'a, T> {
    pub fn new(k: usize, ids: &'a [String]) -> Self {
        Self {
            k,
            ids,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn cmp(&self, a: &(T, usize), b: &(T, usize)) -> Ordering {
        neighbor_order((a.0, &self.ids[a.1]), (b.0, &self.ids[b.1]))
    }

    /// Whether a candidate at `distance` could still enter the buffer.
    #[inline]
    pub fn admits(&self, distance: T) -> bool {
        self.items.len() < self.k || distance <= self.items[self.items.len() - 1].0
    }

    pub fn push(&mut self, distance: T, row: usize) {
        let cand = (distance, row);
        if self.items.len() == self.k {
            let worst = &self.items[self.k - 1];
            if self.cmp(&cand, worst) != Ordering::Less {
                return;
            }
            self.items.pop();
        }
        let pos = self
            .items
            .partition_point(|x| self.cmp(x, &cand) == Ordering::Less);
        self.items.insert(pos, cand);
    }

    pub fn into_neighbors(self) -> Vec<Neighbor<T>> {
        self.items
            .into_iter()
            .map(|(distance, row)| Neighbor {
                id: self.ids[row].clone(),
                distance,
            })
            .collect()
    }
}
