use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{AnnError, Neighbor, rank_order};
use crate::linalg::{self, Matrix};

/// Exact inner-product index over unit-normalized rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatIndex {
    vectors: Matrix,
    ids: Vec<u64>,
}

impl FlatIndex {
    /// Rows are normalized on the way in; all-zero rows stay zero and score
    /// 0 against every query.
    pub fn new(mut vectors: Matrix, ids: Vec<u64>) -> Result<Self, AnnError> {
        if vectors.rows() != ids.len() {
            return Err(AnnError::IdCount { rows: vectors.rows(), ids: ids.len() });
        }
        for i in 0..vectors.rows() {
            linalg::normalize_in_place(vectors.row_mut(i));
        }
        Ok(FlatIndex { vectors, ids })
    }

    /// Rebuilds an index from rows already normalized by [`FlatIndex::new`],
    /// keeping them bit for bit.
    pub fn from_stored(vectors: Matrix, ids: Vec<u64>) -> Result<Self, AnnError> {
        if vectors.rows() != ids.len() {
            return Err(AnnError::IdCount { rows: vectors.rows(), ids: ids.len() });
        }
        Ok(FlatIndex { vectors, ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub(crate) fn prepare_query(&self, query: &[f64]) -> Result<Vec<f64>, AnnError> {
        if query.len() != self.dim() {
            return Err(AnnError::Dimension { expected: self.dim(), got: query.len() });
        }
        let mut q = query.to_vec();
        linalg::normalize_in_place(&mut q);
        Ok(q)
    }

    /// Top `top_k` among the given rows for an already normalized query.
    pub(crate) fn rank_rows<I>(&self, q: &[f64], rows: I, top_k: usize) -> Vec<Neighbor>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut all: Vec<Neighbor> = rows
            .into_iter()
            .map(|r| Neighbor { term_id: self.ids[r], score: linalg::dot(self.vectors.row(r), q) })
            .collect();
        if top_k == 0 {
            return Vec::new();
        }
        if all.len() > top_k {
            all.select_nth_unstable_by(top_k - 1, rank_order);
            all.truncate(top_k);
        }
        all.sort_by(rank_order);
        all
    }

    pub fn search(&self, query: &[f64], top_k: usize) -> Result<Vec<Neighbor>, AnnError> {
        if self.is_empty() {
            return Ok(Vec::new());
        }
        let q = self.prepare_query(query)?;
        Ok(self.rank_rows(&q, 0..self.len(), top_k))
    }
}

pub fn build_flat(vectors: Matrix, ids: Vec<u64>) -> Result<FlatIndex, AnnError> {
    FlatIndex::new(vectors, ids)
}

/// Exact top `top_k` by inner product with the normalized query, highest
/// score first and ties in ascending `term_id`.
pub fn search_flat(index: &FlatIndex, query: &[f64], top_k: usize) -> Result<Vec<Neighbor>, AnnError> {
    index.search(query, top_k)
}
