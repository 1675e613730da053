//! Ontology data model and the `|`-delimited source parsers.

mod pipeline;

pub use pipeline::{CrosswalkDrop, CrosswalkOutcome, OntologyBuild, STEP_NAMES, build_ontology, crosswalk_terms};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ids::{Cui, SemanticGroup, Tui};

/// One surface string of a concept as loaded from the concept source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub term_id: u64,
    pub cui: Cui,
    pub language: String,
    pub vocab: String,
    pub source_code: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticTypeRow {
    pub cui: Cui,
    pub tui: Tui,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRow {
    pub cui1: Cui,
    pub rel: String,
    pub cui2: Cui,
    pub vocab: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswalkRow {
    pub sctid: u64,
    pub text: String,
}

/// Semantic type to semantic group lookup. Unmapped types resolve to
/// [`SemanticGroup::Other`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticGroupMap {
    entries: BTreeMap<Tui, SemanticGroup>,
}

impl SemanticGroupMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Later inserts for the same type are ignored.
    pub fn insert(&mut self, tui: Tui, group: SemanticGroup) {
        self.entries.entry(tui).or_insert(group);
    }

    pub fn resolve(&self, tui: &Tui) -> SemanticGroup {
        self.entries.get(tui).copied().unwrap_or(SemanticGroup::Other)
    }

    pub fn contains(&self, tui: &Tui) -> bool {
        self.entries.contains_key(tui)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(Tui, SemanticGroup)> for SemanticGroupMap {
    fn from_iter<I: IntoIterator<Item = (Tui, SemanticGroup)>>(iter: I) -> Self {
        let mut m = SemanticGroupMap::new();
        for (t, g) in iter {
            m.insert(t, g);
        }
        m
    }
}

/// Literal substring removed from records of the listed vocabularies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtermPattern {
    pub pattern: String,
    pub vocabs: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Target language. Records in other languages are dropped in the first
    /// step unless they are later re-imported as drug names.
    pub language: Option<String>,
    pub drop_vocabs: BTreeSet<String>,
    pub descriptive_subterm_patterns: Vec<SubtermPattern>,
    /// Vocabulary whose `source_code` carries the external concept id the
    /// crosswalk joins on.
    pub bridge_vocab: String,
    /// Vocabulary tag given to records created by the crosswalk.
    pub crosswalk_vocab: String,
    pub drop_tuis: BTreeSet<Tui>,
    pub drug_vocabs: BTreeSet<String>,
    pub dedupe_case_insensitive: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            language: None,
            drop_vocabs: BTreeSet::new(),
            descriptive_subterm_patterns: Vec::new(),
            bridge_vocab: "SNOMEDCT_US".to_string(),
            crosswalk_vocab: "SNOMEDCT_NL".to_string(),
            drop_tuis: BTreeSet::new(),
            drug_vocabs: BTreeSet::new(),
            dedupe_case_insensitive: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        let empty = |s: &String| s.trim().is_empty();
        if self.drop_vocabs.iter().any(empty) || self.drug_vocabs.iter().any(empty) {
            return Err("vocabulary sets must not contain empty strings");
        }
        for p in &self.descriptive_subterm_patterns {
            if p.pattern.is_empty() || p.vocabs.iter().any(empty) {
                return Err("descriptive subterm patterns must be non-empty");
            }
        }
        Ok(())
    }
}

/// A term of the final ontology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyRecord {
    pub term_id: u64,
    pub cui: Cui,
    pub text: String,
    pub vocab: String,
    pub group: SemanticGroup,
}

/// Remaining record count after each pipeline step, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub steps: Vec<StepCount>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCount {
    pub step: String,
    pub records_remaining: usize,
}

impl StepStats {
    fn push(&mut self, step: &str, n: usize) {
        self.steps.push(StepCount { step: step.to_string(), records_remaining: n });
    }

    pub fn counts(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.records_remaining).collect()
    }
}

/// Records parsed from a line source plus the number of lines skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub malformed: usize,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Parsed { records: Vec::new(), malformed: 0 }
    }
}

/// Field positions inside a concept line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptColumns {
    pub cui: usize,
    pub language: usize,
    pub vocab: usize,
    pub source_code: usize,
    pub text: usize,
}

impl ConceptColumns {
    /// `cui|language|vocab|source_code|text`
    pub const IDENTITY: ConceptColumns =
        ConceptColumns { cui: 0, language: 1, vocab: 2, source_code: 3, text: 4 };
    /// Column layout of an MRCONSO.RRF release file.
    pub const MRCONSO: ConceptColumns =
        ConceptColumns { cui: 0, language: 1, vocab: 11, source_code: 13, text: 14 };
}

impl Default for ConceptColumns {
    fn default() -> Self {
        ConceptColumns::IDENTITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticTypeColumns {
    pub cui: usize,
    pub tui: usize,
    pub type_name: usize,
}

impl SemanticTypeColumns {
    /// `cui|tui|type_name`
    pub const IDENTITY: SemanticTypeColumns = SemanticTypeColumns { cui: 0, tui: 1, type_name: 2 };
    /// MRSTY.RRF
    pub const MRSTY: SemanticTypeColumns = SemanticTypeColumns { cui: 0, tui: 1, type_name: 3 };
}

impl Default for SemanticTypeColumns {
    fn default() -> Self {
        SemanticTypeColumns::IDENTITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationColumns {
    pub cui1: usize,
    pub rel: usize,
    pub cui2: usize,
    pub vocab: usize,
}

impl RelationColumns {
    /// `cui1|rel|cui2|vocab`
    pub const IDENTITY: RelationColumns = RelationColumns { cui1: 0, rel: 1, cui2: 2, vocab: 3 };
    /// MRREL.RRF
    pub const MRREL: RelationColumns = RelationColumns { cui1: 0, rel: 3, cui2: 4, vocab: 10 };
}

impl Default for RelationColumns {
    fn default() -> Self {
        RelationColumns::IDENTITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswalkColumns {
    pub sctid: usize,
    pub text: usize,
}

impl Default for CrosswalkColumns {
    fn default() -> Self {
        CrosswalkColumns { sctid: 0, text: 1 }
    }
}

fn fields(line: &str) -> Vec<&str> {
    line.trim_end_matches(['\r', '\n']).split('|').collect()
}

fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

pub fn parse_concept_line(line: &str, cols: &ConceptColumns, term_id: u64) -> Option<TermRecord> {
    let f = fields(line);
    let get = |i: usize| f.get(i).copied();
    let cui = Cui::new(get(cols.cui)?.trim()).ok()?;
    let text = get(cols.text)?.trim();
    if text.is_empty() {
        return None;
    }
    Some(TermRecord {
        term_id,
        cui,
        language: get(cols.language)?.trim().to_string(),
        vocab: get(cols.vocab)?.trim().to_string(),
        source_code: get(cols.source_code)?.trim().to_string(),
        text: text.to_string(),
    })
}

/// Parses concept lines. `term_id`s count well-formed records from 0 in
/// input order; blank lines are ignored, other bad lines are counted.
pub fn parse_concepts<'a, I>(lines: I, cols: &ConceptColumns) -> Parsed<TermRecord>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut records = Vec::new();
    let mut malformed = 0;
    for line in lines {
        if is_blank(line) {
            continue;
        }
        match parse_concept_line(line, cols, records.len() as u64) {
            Some(r) => records.push(r),
            None => malformed += 1,
        }
    }
    Parsed { records, malformed }
}

pub fn parse_semantic_types<'a, I>(lines: I, cols: &SemanticTypeColumns) -> Parsed<SemanticTypeRow>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut records = Vec::new();
    let mut malformed = 0;
    for line in lines {
        if is_blank(line) {
            continue;
        }
        let f = fields(line);
        let row = (|| {
            Some(SemanticTypeRow {
                cui: Cui::new(f.get(cols.cui)?.trim()).ok()?,
                tui: Tui::new(f.get(cols.tui)?.trim()).ok()?,
                type_name: f.get(cols.type_name)?.trim().to_string(),
            })
        })();
        match row {
            Some(r) => records.push(r),
            None => malformed += 1,
        }
    }
    Parsed { records, malformed }
}

/// Parses relation lines; self-relations are dropped silently.
pub fn parse_relations<'a, I>(lines: I, cols: &RelationColumns) -> Parsed<RelationRow>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut records = Vec::new();
    let mut malformed = 0;
    for line in lines {
        if is_blank(line) {
            continue;
        }
        let f = fields(line);
        let row = (|| {
            Some(RelationRow {
                cui1: Cui::new(f.get(cols.cui1)?.trim()).ok()?,
                rel: f.get(cols.rel)?.trim().to_string(),
                cui2: Cui::new(f.get(cols.cui2)?.trim()).ok()?,
                vocab: f.get(cols.vocab)?.trim().to_string(),
            })
        })();
        match row {
            Some(r) if r.cui1 == r.cui2 => {}
            Some(r) => records.push(r),
            None => malformed += 1,
        }
    }
    Parsed { records, malformed }
}

pub fn parse_crosswalk<'a, I>(lines: I, cols: &CrosswalkColumns) -> Parsed<CrosswalkRow>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut records = Vec::new();
    let mut malformed = 0;
    for line in lines {
        if is_blank(line) {
            continue;
        }
        let f = fields(line);
        let row = (|| {
            let sctid: u64 = f.get(cols.sctid)?.trim().parse().ok()?;
            let text = f.get(cols.text)?.trim();
            (sctid > 0 && !text.is_empty()).then(|| CrosswalkRow { sctid, text: text.to_string() })
        })();
        match row {
            Some(r) => records.push(r),
            None => malformed += 1,
        }
    }
    Parsed { records, malformed }
}

/// Parses semantic group lines in the `GROUP|Group name|TUI|Type name`
/// layout of the published semantic group table.
pub fn parse_semantic_groups<'a, I>(lines: I) -> Parsed<(Tui, SemanticGroup)>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut records = Vec::new();
    let mut malformed = 0;
    for line in lines {
        if is_blank(line) {
            continue;
        }
        let f = fields(line);
        let row = (|| {
            let group = SemanticGroup::from_code(f.first()?.trim())?;
            let tui = Tui::new(f.get(2)?.trim()).ok()?;
            Some((tui, group))
        })();
        match row {
            Some(r) => records.push(r),
            None => malformed += 1,
        }
    }
    Parsed { records, malformed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concept_line_identity_columns() {
        let p = parse_concepts(["C0000001|DUT|MDRDUT|10001|koorts"], &ConceptColumns::IDENTITY);
        assert_eq!(p.malformed, 0);
        assert_eq!(
            p.records,
            alloc::vec![TermRecord {
                term_id: 0,
                cui: Cui::new("C0000001").unwrap(),
                language: "DUT".into(),
                vocab: "MDRDUT".into(),
                source_code: "10001".into(),
                text: "koorts".into(),
            }]
        );
    }

    #[test]
    fn empty_stream() {
        let p = parse_concepts(core::iter::empty(), &ConceptColumns::IDENTITY);
        assert!(p.records.is_empty());
        assert_eq!(p.malformed, 0);
    }

    #[test]
    fn short_line_is_malformed() {
        let p = parse_concepts(["C0000001|DUT|MDRDUT"], &ConceptColumns::IDENTITY);
        assert!(p.records.is_empty());
        assert_eq!(p.malformed, 1);
    }

    #[test]
    fn term_ids_skip_malformed_lines() {
        let lines = ["C0000001|DUT|A|1|een", "bad", "C0000002|DUT|A|2|twee", "C123|DUT|A|3|drie"];
        let p = parse_concepts(lines, &ConceptColumns::IDENTITY);
        assert_eq!(p.malformed, 2);
        assert_eq!(p.records.iter().map(|r| r.term_id).collect::<Vec<_>>(), [0, 1]);
    }

    #[test]
    fn mrconso_layout() {
        let line = "C0000005|ENG|P|L0000005|PF|S0007492|Y|A26634265||M0019694|D012711|MSH|PEP|D012711|(131)I-Macroaggregated Albumin|0|N|256|";
        let p = parse_concepts([line], &ConceptColumns::MRCONSO);
        assert_eq!(p.records[0].vocab, "MSH");
        assert_eq!(p.records[0].source_code, "D012711");
        assert_eq!(p.records[0].text, "(131)I-Macroaggregated Albumin");
    }

    #[test]
    fn relation_self_loops_dropped() {
        let p = parse_relations(
            ["C0000001|RO|C0000001|MSH", "C0000001|RN|C0000002|MSH"],
            &RelationColumns::IDENTITY,
        );
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.malformed, 0);
    }

    #[test]
    fn semantic_group_table() {
        let p = parse_semantic_groups(["DISO|Disorders|T047|Disease or Syndrome", "XXXX|?|T001|x"]);
        assert_eq!(p.records, alloc::vec![(Tui::new("T047").unwrap(), SemanticGroup::Diso)]);
        assert_eq!(p.malformed, 1);
        let map: SemanticGroupMap = p.records.into_iter().collect();
        assert_eq!(map.resolve(&Tui::new("T047").unwrap()), SemanticGroup::Diso);
        assert_eq!(map.resolve(&Tui::new("T999").unwrap()), SemanticGroup::Other);
    }

    #[test]
    fn crosswalk_rows_need_positive_id() {
        let p = parse_crosswalk(["123|hartaanval", "0|nul", "x|y", "5|"], &CrosswalkColumns::default());
        assert_eq!(p.records, alloc::vec![CrosswalkRow { sctid: 123, text: "hartaanval".into() }]);
        assert_eq!(p.malformed, 3);
    }
}
