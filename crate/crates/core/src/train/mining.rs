use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningConfig {
    /// Margin λ.
    pub margin: f64,
    /// Draw one random anchor per concept in each batch instead of using
    /// every item as an anchor.
    pub sample_anchors: bool,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig { margin: 0.2, sample_anchors: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

/// All triplets with `‖a − p‖ ≥ ‖a − n‖ + margin`, over every ordered
/// same-label pair `(a, p)` and every differently labelled `n`. Output is
/// sorted by `(anchor, positive, negative)`.
pub fn mine_hard_triplets<L: PartialEq>(embeddings: &[Vec<f64>], labels: &[L], margin: f64) -> Vec<Triplet> {
    let anchors: Vec<usize> = (0..embeddings.len()).collect();
    mine_hard_triplets_for_anchors(embeddings, labels, margin, &anchors)
}

/// Same as [`mine_hard_triplets`] restricted to the given anchor indices.
pub fn mine_hard_triplets_for_anchors<L: PartialEq>(
    embeddings: &[Vec<f64>],
    labels: &[L],
    margin: f64,
    anchors: &[usize],
) -> Vec<Triplet> {
    assert_eq!(embeddings.len(), labels.len(), "one label per embedding");
    let b = embeddings.len();
    let mut out = Vec::new();
    let mut negatives: Vec<(f64, usize)> = Vec::with_capacity(b);
    for &a in anchors {
        let dist = |j: usize| linalg::sqrt(linalg::squared_distance(&embeddings[a], &embeddings[j]));
        negatives.clear();
        negatives.extend((0..b).filter(|&n| labels[n] != labels[a]).map(|n| (dist(n), n)));
        if negatives.is_empty() {
            continue;
        }
        negatives.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for p in (0..b).filter(|&p| p != a && labels[p] == labels[a]) {
            let d_ap = dist(p);
            // rounding keeps `d_an + margin` monotone in d_an, so the
            // qualifying negatives form a prefix
            let cut = negatives.partition_point(|&(d_an, _)| d_ap >= d_an + margin);
            let first = out.len();
            out.extend(negatives[..cut].iter().map(|&(_, n)| Triplet { anchor: a, positive: p, negative: n }));
            out[first..].sort_unstable_by_key(|t| t.negative);
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identical_embeddings_give_nothing() {
        let e = vec![vec![0.5, 0.5]; 4];
        assert!(mine_hard_triplets(&e, &[0, 0, 1, 1], 0.2).is_empty());
    }

    #[test]
    fn one_dimensional_cases() {
        let e = vec![vec![0.0], vec![1.0], vec![0.5]];
        let t = mine_hard_triplets(&e, &[0, 0, 1], 0.2);
        assert!(t.contains(&Triplet { anchor: 0, positive: 1, negative: 2 }));

        let e = vec![vec![0.0], vec![0.6], vec![0.5]];
        let t = mine_hard_triplets(&e, &[0, 0, 1], 0.2);
        assert!(!t.contains(&Triplet { anchor: 0, positive: 1, negative: 2 }));
    }
}
