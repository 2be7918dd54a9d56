use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{cast, squared_l2, Scalar};

pub const KMEANS_MAX_ITERS: usize = 25;
pub const KMEANS_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct KMeansResult<T> {
    /// `k × dim`, row-major.
    pub centroids: Vec<T>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

/// Index of the nearest centroid; ties go to the lower index.
pub(crate) fn nearest_centroid<T: Scalar>(v: &[T], centroids: &[T], dim: usize) -> (usize, T) {
    let mut best = (0usize, T::infinity());
    for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
        let d = squared_l2(v, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign<T: Scalar>(data: &[T], dim: usize, centroids: &[T]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let assignments = data
        .chunks_exact(dim)
        .map(|row| {
            let (c, d) = nearest_centroid(row, centroids, dim);
            inertia += d.to_f64().unwrap_or(f64::INFINITY);
            c
        })
        .collect();
    (assignments, inertia)
}

/// k-means++ seeding with ChaCha8 (`seed_from_u64(seed)`): the first centre
/// is a uniform row, each later one is drawn with probability proportional
/// to squared distance from the nearest chosen centre, scanning rows in order.
fn plus_plus_init<T: Scalar>(data: &[T], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let n = data.len() / dim;
    let row = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut centroids = Vec::with_capacity(k * dim);
    centroids.extend_from_slice(row(rng.random_range(0..n)));
    let mut closest: Vec<f64> = (0..n)
        .map(|i| squared_l2(row(i), &centroids[..dim]).to_f64().unwrap_or(0.0))
        .collect();
    while centroids.len() < k * dim {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in closest.iter().enumerate() {
                acc += d;
                if acc >= target && *d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let start = centroids.len();
        centroids.extend_from_slice(row(pick));
        for (i, c) in closest.iter_mut().enumerate() {
            let d = squared_l2(row(i), &centroids[start..start + dim])
                .to_f64()
                .unwrap_or(0.0);
            if d < *c {
                *c = d;
            }
        }
    }
    centroids
}

/// Lloyd's algorithm from k-means++ seeds. Stops after
/// [`KMEANS_MAX_ITERS`] updates or when inertia changes by less than
/// [`KMEANS_REL_TOL`] relative to the previous pass. A centroid that loses
/// all its points stays where it was. Requires `1 <= k <= n`.
pub fn kmeans<T: Scalar>(data: &[T], dim: usize, k: usize, seed: u64) -> KMeansResult<T> {
    let n = data.len() / dim;
    assert!(k >= 1 && k <= n, "kmeans needs 1 <= k <= n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(data, dim, k, &mut rng);
    let mut prev: Option<f64> = None;
    let mut iterations = 0;
    loop {
        let (assignments, inertia) = assign(data, dim, &centroids);
        let converged = match prev {
            Some(p) => p <= 0.0 || ((p - inertia).abs() / p) < KMEANS_REL_TOL,
            None => false,
        };
        if converged || iterations == KMEANS_MAX_ITERS {
            return KMeansResult {
                centroids,
                assignments,
                inertia,
                iterations,
            };
        }
        prev = Some(inertia);

        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for (row, &c) in data.chunks_exact(dim).zip(&assignments) {
            counts[c] += 1;
            for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(row) {
                *s += v.to_f64().unwrap_or(0.0);
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let inv = 1.0 / counts[c] as f64;
            for j in 0..dim {
                centroids[c * dim + j] = cast(sums[c * dim + j] * inv);
            }
        }
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_two_blobs() {
        let mut data = Vec::new();
        for i in 0..20 {
            let e = (i as f64) * 0.001;
            data.extend([1.0 + e, e]);
            data.extend([-1.0 - e, -e]);
        }
        let res = kmeans(&data, 2, 2, 7);
        for (i, &c) in res.assignments.iter().enumerate() {
            assert_eq!(c, res.assignments[i % 2]);
        }
        assert_ne!(res.assignments[0], res.assignments[1]);
    }

    #[test]
    fn deterministic_for_seed() {
        let data: Vec<f32> = (0..200).map(|i| ((i * 37) % 101) as f32 / 101.0).collect();
        let a = kmeans(&data, 4, 5, 11);
        let b = kmeans(&data, 4, 5, 11);
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.assignments, b.assignments);
        assert!(a.iterations <= KMEANS_MAX_ITERS);
    }

    #[test]
    fn all_duplicates_is_fine() {
        let data = vec![0.5f32; 30];
        let res = kmeans(&data, 3, 4, 1);
        assert_eq!(res.inertia, 0.0);
        assert!(res.assignments.iter().all(|&c| c == res.assignments[0]));
    }
}
