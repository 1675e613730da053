use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MentionAnnotation, SentenceRecord};
use crate::ids::Cui;
use crate::ontology::OntologyRecord;

/// Sentences together with the mentions annotated in them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSlice {
    pub sentences: Vec<SentenceRecord>,
    pub mentions: Vec<MentionAnnotation>,
}

impl CorpusSlice {
    /// Keeps the sentences referenced by `mentions`, in sentence order.
    pub fn from_mentions(sentences: &[SentenceRecord], mut mentions: Vec<MentionAnnotation>) -> Self {
        mentions.sort_by_key(|m| (m.sentence_id, m.start));
        let wanted: BTreeSet<u64> = mentions.iter().map(|m| m.sentence_id).collect();
        let sentences = sentences.iter().filter(|s| wanted.contains(&s.sentence_id)).cloned().collect();
        CorpusSlice { sentences, mentions }
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty() && self.mentions.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StarSubset {
    pub train: CorpusSlice,
    pub validation: CorpusSlice,
}

/// Keeps the first occurrence of each mention string (exact match), drops
/// mentions whose concept is absent from the ontology, then shuffles the
/// survivors with `seed` and puts `round(n · split_ratio)` of them in the
/// training slice.
///
/// Panics if `split_ratio` is not strictly between 0 and 1.
pub fn build_star_subset(
    sentences: &[SentenceRecord],
    mentions: &[MentionAnnotation],
    ontology: &[OntologyRecord],
    split_ratio: f64,
    seed: u64,
) -> StarSubset {
    assert!(split_ratio > 0.0 && split_ratio < 1.0, "split_ratio must lie in (0, 1)");
    let known: BTreeSet<&Cui> = ontology.iter().map(|r| &r.cui).collect();

    let mut ordered: Vec<&MentionAnnotation> = mentions.iter().collect();
    ordered.sort_by_key(|m| (m.sentence_id, m.start));
    let mut first: BTreeMap<&str, &MentionAnnotation> = BTreeMap::new();
    let mut kept: Vec<MentionAnnotation> = Vec::new();
    for m in ordered {
        if first.contains_key(m.anchor.as_str()) {
            continue;
        }
        first.insert(m.anchor.as_str(), m);
        if known.contains(&m.cui) {
            kept.push(m.clone());
        }
    }

    let mut order: Vec<usize> = (0..kept.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = libm::round(kept.len() as f64 * split_ratio) as usize;

    let mut train = Vec::with_capacity(n_train);
    let mut validation = Vec::with_capacity(kept.len() - n_train);
    let mut is_train = alloc::vec![false; kept.len()];
    for &i in &order[..n_train] {
        is_train[i] = true;
    }
    for (m, t) in kept.into_iter().zip(is_train) {
        if t {
            train.push(m);
        } else {
            validation.push(m);
        }
    }
    StarSubset {
        train: CorpusSlice::from_mentions(sentences, train),
        validation: CorpusSlice::from_mentions(sentences, validation),
    }
}
