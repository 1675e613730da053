use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::MentionAnnotation;
use crate::ids::Cui;
use crate::ontology::OntologyRecord;

const SEP: &str = "||";

/// Two strings that name the same concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PositivePair {
    pub cui: Cui,
    pub term_a: String,
    pub term_b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PairFormatError {
    #[error("term contains the `||` separator")]
    SeparatorInTerm,
    #[error("expected `CUI||term 1||term 2`")]
    Shape,
    #[error("invalid concept identifier")]
    Cui,
    #[error("terms of a pair must differ")]
    IdenticalTerms,
}

/// `CUI||term 1||term 2`. Terms holding `||`, or a `|` at either end that
/// would merge with a separator, are rejected.
pub fn format_pair_line(pair: &PositivePair) -> Result<String, PairFormatError> {
    let clashes = |t: &str| t.contains(SEP) || t.starts_with('|') || t.ends_with('|');
    if clashes(&pair.term_a) || clashes(&pair.term_b) {
        return Err(PairFormatError::SeparatorInTerm);
    }
    if pair.term_a.is_empty() || pair.term_b.is_empty() {
        return Err(PairFormatError::Shape);
    }
    if pair.term_a == pair.term_b {
        return Err(PairFormatError::IdenticalTerms);
    }
    let mut s = String::with_capacity(pair.term_a.len() + pair.term_b.len() + 12);
    s.push_str(pair.cui.as_str());
    s.push_str(SEP);
    s.push_str(&pair.term_a);
    s.push_str(SEP);
    s.push_str(&pair.term_b);
    Ok(s)
}

pub fn parse_pair_line(line: &str) -> Result<PositivePair, PairFormatError> {
    let line = line.trim_end_matches(['\r', '\n']);
    let parts: Vec<&str> = line.split(SEP).collect();
    let [cui, a, b] = parts[..] else {
        return Err(PairFormatError::Shape);
    };
    if a.is_empty() || b.is_empty() {
        return Err(PairFormatError::Shape);
    }
    if a == b {
        return Err(PairFormatError::IdenticalTerms);
    }
    Ok(PositivePair {
        cui: Cui::new(cui).map_err(|_| PairFormatError::Cui)?,
        term_a: a.to_string(),
        term_b: b.to_string(),
    })
}

/// Every unordered pair of distinct terms of each concept, concepts in
/// identifier order and terms in `term_id` order.
pub fn generate_pretrain_pairs(ontology: &[OntologyRecord]) -> Vec<PositivePair> {
    let mut by_cui: BTreeMap<&Cui, Vec<&OntologyRecord>> = BTreeMap::new();
    for r in ontology {
        by_cui.entry(&r.cui).or_default().push(r);
    }
    let mut pairs = Vec::new();
    for (cui, mut recs) in by_cui {
        recs.sort_by_key(|r| r.term_id);
        let mut terms: Vec<&str> = Vec::with_capacity(recs.len());
        for r in recs {
            if !terms.contains(&r.text.as_str()) {
                terms.push(&r.text);
            }
        }
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                pairs.push(PositivePair {
                    cui: cui.clone(),
                    term_a: terms[i].to_string(),
                    term_b: terms[j].to_string(),
                });
            }
        }
    }
    pairs
}

/// Pairs each mention with the ontology terms of its gold concept, lowest
/// `term_id` first, at most `cap` terms per mention. Terms identical to the
/// mention are skipped.
pub fn generate_finetune_pairs(
    mentions: &[MentionAnnotation],
    ontology: &[OntologyRecord],
    cap: usize,
) -> Vec<PositivePair> {
    let mut by_cui: BTreeMap<&Cui, Vec<&OntologyRecord>> = BTreeMap::new();
    for r in ontology {
        by_cui.entry(&r.cui).or_default().push(r);
    }
    for recs in by_cui.values_mut() {
        recs.sort_by_key(|r| r.term_id);
    }
    let mut pairs = Vec::new();
    for m in mentions {
        let Some(recs) = by_cui.get(&m.cui) else { continue };
        pairs.extend(
            recs.iter()
                .filter(|r| r.text != m.anchor)
                .take(cap)
                .map(|r| PositivePair { cui: m.cui.clone(), term_a: m.anchor.clone(), term_b: r.text.clone() }),
        );
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::SemanticGroup;
    use alloc::format;
    use alloc::vec;

    fn rec(id: u64, cui: &str, text: &str) -> OntologyRecord {
        OntologyRecord {
            term_id: id,
            cui: Cui::new(cui).unwrap(),
            text: text.into(),
            vocab: "V".into(),
            group: SemanticGroup::Diso,
        }
    }

    #[test]
    fn combinations_per_concept() {
        let o = vec![
            rec(0, "C0000001", "a"),
            rec(1, "C0000001", "b"),
            rec(2, "C0000001", "c"),
            rec(3, "C0000002", "solo"),
        ];
        let p = generate_pretrain_pairs(&o);
        assert_eq!(p.len(), 3);
        assert!(p.iter().all(|x| x.cui.as_str() == "C0000001"));
        assert_eq!((p[0].term_a.as_str(), p[0].term_b.as_str()), ("a", "b"));
    }

    #[test]
    fn line_format_is_exact() {
        let p = PositivePair { cui: Cui::new("C0000001").unwrap(), term_a: "griep".into(), term_b: "influenza".into() };
        let line = format_pair_line(&p).unwrap();
        assert_eq!(line, "C0000001||griep||influenza");
        assert_eq!(parse_pair_line(&line).unwrap(), p);
    }

    #[test]
    fn separator_in_term_rejected() {
        let p = PositivePair { cui: Cui::new("C0000001").unwrap(), term_a: "a||b".into(), term_b: "c".into() };
        assert_eq!(format_pair_line(&p), Err(PairFormatError::SeparatorInTerm));
        assert_eq!(parse_pair_line("C0000001||a||b||c"), Err(PairFormatError::Shape));
        assert_eq!(parse_pair_line("C0000001||a||a"), Err(PairFormatError::IdenticalTerms));
    }

    fn mention(anchor: &str, cui: &str) -> MentionAnnotation {
        MentionAnnotation {
            sentence_id: 0,
            start: 0,
            end: anchor.chars().count(),
            anchor: anchor.into(),
            target_title: anchor.into(),
            cui: Cui::new(cui).unwrap(),
            qid: "Q1".into(),
        }
    }

    #[test]
    fn finetune_pairs_enumerate_gold_terms() {
        let o = vec![rec(0, "C0000001", "myocard infarct"), rec(1, "C0000001", "hartinfarct")];
        let p = generate_finetune_pairs(&[mention("MI", "C0000001")], &o, 50);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].term_b, "myocard infarct");
        assert!(generate_finetune_pairs(&[mention("griep", "C0000002")], &[rec(0, "C0000002", "griep")], 50).is_empty());
    }

    #[test]
    fn finetune_cap_takes_lowest_ids() {
        let o: Vec<_> = (0..80).rev().map(|i| rec(i, "C0000001", &format!("term {i}"))).collect();
        let p = generate_finetune_pairs(&[mention("x", "C0000001")], &o, 50);
        assert_eq!(p.len(), 50);
        assert_eq!(p[0].term_b, "term 0");
        assert_eq!(p[49].term_b, "term 49");
    }
}
