use alloc::vec;
use alloc::vec::Vec;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnnError, FlatIndex, Neighbor};
use crate::linalg::{self, Matrix};

/// Inverted-file index: rows are bucketed by nearest k-means centroid and a
/// query scans only the lists of its `nprobe` nearest centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvfIndex {
    flat: FlatIndex,
    centroids: Matrix,
    /// Row numbers per list, ascending.
    lists: Vec<Vec<usize>>,
    nprobe: usize,
}

fn nearest_centroid(centroids: &Matrix, v: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for c in 0..centroids.rows() {
        let d = linalg::squared_distance(centroids.row(c), v);
        if d < best.0 {
            best = (d, c);
        }
    }
    best.1
}

/// k-means++ seeding: the first centroid is a uniformly drawn row, each
/// further one is drawn with probability proportional to its squared
/// distance from the nearest centroid so far.
fn seed_centroids(data: &Matrix, nlist: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = data.rows();
    let mut centroids = Matrix::zeros(nlist, data.cols());
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(data.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| linalg::squared_distance(data.row(i), data.row(first))).collect();
    for c in 1..nlist {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && *w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(data.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(linalg::squared_distance(data.row(i), centroids.row(c)));
        }
    }
    centroids
}

fn assign(data: &Matrix, centroids: &Matrix) -> Vec<usize> {
    (0..data.rows()).map(|i| nearest_centroid(centroids, data.row(i))).collect()
}

impl IvfIndex {
    /// Clusters the normalized rows with `kmeans_iters` Lloyd iterations
    /// after seeding. A cluster that empties keeps its previous centroid.
    pub fn build(
        vectors: Matrix,
        ids: Vec<u64>,
        nlist: usize,
        seed: u64,
        kmeans_iters: usize,
    ) -> Result<Self, AnnError> {
        let flat = FlatIndex::new(vectors, ids)?;
        let n = flat.len();
        if nlist == 0 || nlist > n {
            return Err(AnnError::ListCount { nlist, n });
        }
        let data = flat.vectors();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centroids = seed_centroids(data, nlist, &mut rng);
        let mut labels = assign(data, &centroids);
        for _ in 0..kmeans_iters {
            let mut sums = Matrix::zeros(nlist, data.cols());
            let mut counts = vec![0usize; nlist];
            for (i, &c) in labels.iter().enumerate() {
                counts[c] += 1;
                for (s, x) in sums.row_mut(c).iter_mut().zip(data.row(i)) {
                    *s += x;
                }
            }
            for (c, &count) in counts.iter().enumerate() {
                if count > 0 {
                    let k = count as f64;
                    for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                        *dst = s / k;
                    }
                }
            }
            let next = assign(data, &centroids);
            if next == labels {
                break;
            }
            labels = next;
        }
        let mut lists = vec![Vec::new(); nlist];
        for (i, &c) in labels.iter().enumerate() {
            lists[c].push(i);
        }
        Ok(IvfIndex { flat, centroids, lists, nprobe: 1 })
    }

    pub fn from_parts(flat: FlatIndex, centroids: Matrix, lists: Vec<Vec<usize>>, nprobe: usize) -> Result<Self, AnnError> {
        if centroids.rows() != lists.len() || centroids.rows() == 0 {
            return Err(AnnError::Parts("one list per centroid"));
        }
        if centroids.cols() != flat.dim() {
            return Err(AnnError::Dimension { expected: flat.dim(), got: centroids.cols() });
        }
        let mut seen = vec![false; flat.len()];
        for &r in lists.iter().flatten() {
            if r >= seen.len() || seen[r] {
                return Err(AnnError::Parts("every row in exactly one list"));
            }
            seen[r] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(AnnError::Parts("every row in exactly one list"));
        }
        let mut idx = IvfIndex { flat, centroids, lists, nprobe: 1 };
        idx.set_nprobe(nprobe);
        Ok(idx)
    }

    pub fn flat(&self) -> &FlatIndex {
        &self.flat
    }

    pub fn centroids(&self) -> &Matrix {
        &self.centroids
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.lists
    }

    pub fn nlist(&self) -> usize {
        self.lists.len()
    }

    pub fn nprobe(&self) -> usize {
        self.nprobe
    }

    /// Sets the default probe count, clamped to `1..=nlist`. Returns
    /// whether clamping happened.
    pub fn set_nprobe(&mut self, nprobe: usize) -> bool {
        let (p, clamped) = self.clamp_nprobe(nprobe);
        self.nprobe = p;
        clamped
    }

    pub fn clamp_nprobe(&self, nprobe: usize) -> (usize, bool) {
        let p = nprobe.clamp(1, self.nlist());
        (p, p != nprobe)
    }

    pub fn search(&self, query: &[f64], top_k: usize, nprobe: usize) -> Result<Vec<Neighbor>, AnnError> {
        let q = self.flat.prepare_query(query)?;
        let (nprobe, _) = self.clamp_nprobe(nprobe);
        let mut cells: Vec<(f64, usize)> =
            (0..self.nlist()).map(|c| (linalg::squared_distance(self.centroids.row(c), &q), c)).collect();
        cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let rows = cells[..nprobe].iter().flat_map(|&(_, c)| self.lists[c].iter().copied());
        Ok(self.flat.rank_rows(&q, rows, top_k))
    }
}

pub fn build_ivf(vectors: Matrix, ids: Vec<u64>, nlist: usize, seed: u64, kmeans_iters: usize) -> Result<IvfIndex, AnnError> {
    IvfIndex::build(vectors, ids, nlist, seed, kmeans_iters)
}

/// Exact ranking over the lists of the `nprobe` nearest centroids, with the
/// same ordering as [`super::search_flat`]. `nprobe` is clamped to
/// `1..=nlist`.
pub fn search_ivf(index: &IvfIndex, query: &[f64], top_k: usize, nprobe: usize) -> Result<Vec<Neighbor>, AnnError> {
    index.search(query, top_k, nprobe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::search_flat;

    fn data() -> (Matrix, Vec<u64>) {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let a = i as f64 * 0.37;
                vec![libm::cos(a), libm::sin(a), (i % 3) as f64 * 0.1]
            })
            .collect();
        (Matrix::from_rows(&rows).unwrap(), (0..40).map(|i| 100 - i).collect())
    }

    #[test]
    fn every_row_in_its_nearest_list() {
        let (m, ids) = data();
        let idx = build_ivf(m, ids, 5, 3, 10).unwrap();
        let mut total = 0;
        for (c, list) in idx.lists().iter().enumerate() {
            for &r in list {
                assert_eq!(nearest_centroid(idx.centroids(), idx.flat().vectors().row(r)), c);
            }
            total += list.len();
        }
        assert_eq!(total, 40);
    }

    #[test]
    fn exhaustive_probe_matches_flat() {
        let (m, ids) = data();
        let idx = build_ivf(m, ids, 6, 1, 10).unwrap();
        let q = [0.3, -0.8, 0.1];
        assert_eq!(search_ivf(&idx, &q, 10, 6).unwrap(), search_flat(idx.flat(), &q, 10).unwrap());
        assert_eq!(search_ivf(&idx, &q, 10, 99).unwrap(), search_flat(idx.flat(), &q, 10).unwrap());
    }

    #[test]
    fn nlist_bounds() {
        let (m, ids) = data();
        assert!(matches!(build_ivf(m, ids, 41, 0, 1), Err(AnnError::ListCount { .. })));
    }
}
