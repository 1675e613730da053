use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{AnnError, FlatIndex, IvfIndex, Neighbor, PcaTransform};
use crate::encoder::{EncodeError, EncoderParams};
use crate::ids::Cui;
use crate::linalg::Matrix;

/// Anything that can rank indexed terms against a query vector.
pub trait NeighborSearch {
    fn search_neighbors(&self, query: &[f64], top_k: usize) -> Result<Vec<Neighbor>, AnnError>;
    fn is_empty(&self) -> bool;
}

impl NeighborSearch for FlatIndex {
    fn search_neighbors(&self, query: &[f64], top_k: usize) -> Result<Vec<Neighbor>, AnnError> {
        self.search(query, top_k)
    }

    fn is_empty(&self) -> bool {
        FlatIndex::is_empty(self)
    }
}

/// Probes with the index's own `nprobe`.
impl NeighborSearch for IvfIndex {
    fn search_neighbors(&self, query: &[f64], top_k: usize) -> Result<Vec<Neighbor>, AnnError> {
        self.search(query, top_k, self.nprobe())
    }

    fn is_empty(&self) -> bool {
        self.flat().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinkError {
    #[error("mention cannot be encoded: {0}")]
    Unencodable(#[from] EncodeError),
    #[error("no candidates")]
    NoCandidates,
    #[error("term {0} has no concept")]
    UnknownTerm(u64),
    #[error(transparent)]
    Index(#[from] AnnError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub predicted_cui: Cui,
    pub neighbors: Vec<Neighbor>,
}

/// Raw encoder outputs for `texts`, one row each.
pub fn embed_texts<'a, I>(params: &EncoderParams, texts: I) -> Result<Matrix, EncodeError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut data = Vec::new();
    let mut rows = 0;
    for t in texts {
        data.extend(params.encode(t)?);
        rows += 1;
    }
    Ok(Matrix::from_vec(rows, params.dim(), data).expect("encoder output has fixed width"))
}

/// Encodes `text`, compresses it with `transform`, and assigns the concept
/// of the best-scoring indexed term.
pub fn link_mention<S: NeighborSearch + ?Sized>(
    text: &str,
    params: &EncoderParams,
    transform: &PcaTransform,
    index: &S,
    term_cuis: &BTreeMap<u64, Cui>,
    top_k: usize,
) -> Result<LinkResult, LinkError> {
    let v = params.encode(text)?;
    if index.is_empty() {
        return Err(LinkError::NoCandidates);
    }
    let q = transform.apply(&v)?;
    let neighbors = index.search_neighbors(&q, top_k.max(1))?;
    let top = neighbors.first().ok_or(LinkError::NoCandidates)?;
    let predicted_cui = term_cuis.get(&top.term_id).cloned().ok_or(LinkError::UnknownTerm(top.term_id))?;
    Ok(LinkResult { predicted_cui, neighbors })
}
