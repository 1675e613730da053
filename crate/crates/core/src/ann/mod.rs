//! Dense retrieval over precomputed term embeddings: PCA compression, an
//! exact inner-product index, an inverted-file index, and mention linking.

mod flat;
mod ivf;
mod link;
mod pca;

use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use flat::{FlatIndex, build_flat, search_flat};
pub use ivf::{IvfIndex, build_ivf, search_ivf};
pub use link::{LinkError, LinkResult, NeighborSearch, embed_texts, link_mention};
pub use pca::{PcaTransform, apply_pca, fit_pca};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub term_id: u64,
    /// Cosine similarity to the query.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnError {
    #[error("need at least 2 rows to fit PCA, got {0}")]
    TooFewRows(usize),
    #[error("component count {k} outside 1..={max}")]
    ComponentCount { k: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{rows} vectors but {ids} ids")]
    IdCount { rows: usize, ids: usize },
    #[error("list count {nlist} outside 1..={n}")]
    ListCount { nlist: usize, n: usize },
    #[error("inconsistent index parts: {0}")]
    Parts(&'static str),
}

/// Descending score, then ascending term id.
pub(crate) fn rank_order(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.score.total_cmp(&a.score).then(a.term_id.cmp(&b.term_id))
}
