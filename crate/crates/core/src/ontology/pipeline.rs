use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    CrosswalkRow, FilterConfig, OntologyRecord, SemanticGroupMap, SemanticTypeRow, StepStats, TermRecord,
};
use crate::ids::{Cui, SemanticGroup, Tui};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrosswalkDrop {
    /// The external id maps to two or more distinct concepts.
    Ambiguous,
    NoMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrosswalkOutcome {
    pub records: Vec<TermRecord>,
    pub dropped: BTreeMap<u64, CrosswalkDrop>,
}

/// Assigns concepts to external-terminology descriptions through a bridge
/// vocabulary whose `source_code` holds the same external id.
///
/// New records are numbered from `next_term_id` upwards in target order.
pub fn crosswalk_terms(
    targets: &[CrosswalkRow],
    bridge: &[TermRecord],
    next_term_id: u64,
    vocab: &str,
    language: &str,
) -> CrosswalkOutcome {
    let mut by_id: BTreeMap<u64, BTreeSet<&Cui>> = BTreeMap::new();
    for r in bridge {
        if let Ok(id) = r.source_code.trim().parse::<u64>() {
            by_id.entry(id).or_default().insert(&r.cui);
        }
    }

    let mut out = CrosswalkOutcome::default();
    for row in targets {
        match by_id.get(&row.sctid) {
            Some(cuis) if cuis.len() == 1 => {
                let cui = (*cuis.iter().next().unwrap()).clone();
                out.records.push(TermRecord {
                    term_id: next_term_id + out.records.len() as u64,
                    cui,
                    language: language.to_string(),
                    vocab: vocab.to_string(),
                    source_code: row.sctid.to_string(),
                    text: row.text.clone(),
                });
            }
            Some(_) => {
                out.dropped.insert(row.sctid, CrosswalkDrop::Ambiguous);
            }
            None => {
                out.dropped.insert(row.sctid, CrosswalkDrop::NoMatch);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyBuild {
    pub records: Vec<OntologyRecord>,
    pub stats: StepStats,
    pub crosswalk_dropped: BTreeMap<u64, CrosswalkDrop>,
}

pub const STEP_NAMES: [&str; 7] = [
    "drop_vocabularies",
    "remove_descriptive_subterms",
    "deduplicate",
    "add_crosswalk_terms",
    "drop_semantic_types",
    "add_drug_names",
    "resolve_semantic_groups",
];

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

struct Dedupe {
    case_insensitive: bool,
    seen: BTreeSet<(Cui, String)>,
}

impl Dedupe {
    fn key(&self, r: &TermRecord) -> (Cui, String) {
        let text = if self.case_insensitive { r.text.to_lowercase() } else { r.text.clone() };
        (r.cui.clone(), text)
    }

    /// True when the record's key was not seen before.
    fn admit(&mut self, r: &TermRecord) -> bool {
        let k = self.key(r);
        self.seen.insert(k)
    }
}

/// Runs the seven-step ontology pipeline:
///
/// 1. drop records of `drop_vocabs` (and of other languages when a target
///    language is configured),
/// 2. delete descriptive subterms and drop records left empty,
/// 3. deduplicate on `(cui, text)`, case-folded when configured,
/// 4. add crosswalk terms through the bridge vocabulary,
/// 5. drop every record of a concept carrying a type in `drop_tuis`,
/// 6. add the records of `drug_vocabs` regardless of language,
/// 7. resolve each concept's group from its first semantic type row.
///
/// Records added in steps 4 and 6 are skipped when their dedupe key is
/// already present, so the final `(cui, text)` keys stay unique. The result
/// is sorted by `term_id`.
pub fn build_ontology(
    concepts: &[TermRecord],
    sty: &[SemanticTypeRow],
    groups: &SemanticGroupMap,
    crosswalk: &[CrosswalkRow],
    config: &FilterConfig,
) -> OntologyBuild {
    let mut stats = StepStats::default();

    let in_language = |r: &TermRecord| config.language.as_ref().is_none_or(|l| &r.language == l);
    let mut records: Vec<TermRecord> = concepts
        .iter()
        .filter(|r| !config.drop_vocabs.contains(&r.vocab) && in_language(r))
        .cloned()
        .collect();
    stats.push(STEP_NAMES[0], records.len());

    records.retain_mut(|r| {
        let mut touched = false;
        for p in &config.descriptive_subterm_patterns {
            if p.vocabs.contains(&r.vocab) && r.text.contains(p.pattern.as_str()) {
                r.text = r.text.replace(p.pattern.as_str(), " ");
                touched = true;
            }
        }
        if touched {
            r.text = collapse_whitespace(&r.text);
        }
        !r.text.is_empty()
    });
    stats.push(STEP_NAMES[1], records.len());

    let mut dedupe = Dedupe { case_insensitive: config.dedupe_case_insensitive, seen: BTreeSet::new() };
    records.retain(|r| dedupe.admit(r));
    stats.push(STEP_NAMES[2], records.len());

    let next_id = concepts.iter().map(|r| r.term_id + 1).max().unwrap_or(0);
    let bridge: Vec<TermRecord> =
        concepts.iter().filter(|r| r.vocab == config.bridge_vocab).cloned().collect();
    let language = config.language.clone().unwrap_or_default();
    let cw = crosswalk_terms(crosswalk, &bridge, next_id, &config.crosswalk_vocab, &language);
    for r in cw.records {
        if dedupe.admit(&r) {
            records.push(r);
        }
    }
    stats.push(STEP_NAMES[3], records.len());

    let dropped_cuis: BTreeSet<&Cui> =
        sty.iter().filter(|row| config.drop_tuis.contains(&row.tui)).map(|row| &row.cui).collect();
    records.retain(|r| !dropped_cuis.contains(&r.cui));
    // keys of removed records may be re-admitted by the drug step
    dedupe.seen = records.iter().map(|r| dedupe.key(r)).collect();
    stats.push(STEP_NAMES[4], records.len());

    let present: BTreeSet<u64> = records.iter().map(|r| r.term_id).collect();
    for r in concepts.iter().filter(|r| config.drug_vocabs.contains(&r.vocab)) {
        if !present.contains(&r.term_id) && dedupe.admit(r) {
            records.push(r.clone());
        }
    }
    stats.push(STEP_NAMES[5], records.len());

    let mut first_tui: BTreeMap<&Cui, &Tui> = BTreeMap::new();
    for row in sty {
        first_tui.entry(&row.cui).or_insert(&row.tui);
    }
    let mut out: Vec<OntologyRecord> = records
        .into_iter()
        .map(|r| {
            let group = first_tui.get(&r.cui).map_or(SemanticGroup::Other, |t| groups.resolve(t));
            OntologyRecord { term_id: r.term_id, cui: r.cui, text: r.text, vocab: r.vocab, group }
        })
        .collect();
    out.sort_by_key(|r| r.term_id);
    stats.push(STEP_NAMES[6], out.len());

    OntologyBuild { records: out, stats, crosswalk_dropped: cw.dropped }
}
