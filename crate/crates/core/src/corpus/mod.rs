//! Weakly labelled corpus compilation: wiki pages whose hyperlinks point at
//! concept-linked articles become sentences with mention annotations.

mod sentences;
mod subset;
mod wikitext;

pub use sentences::{DUTCH_ABBREVIATIONS, SentenceSplitter, split_sentences};
pub use subset::{CorpusSlice, StarSubset, build_star_subset};
pub use wikitext::{StrippedText, WikiLink, WikitextOptions, strip_wikitext, strip_wikitext_with};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ids::Cui;
use crate::ontology::OntologyRecord;

/// Canonical form of an article title: fragment removed, underscores as
/// spaces, whitespace collapsed, first character lowercased.
pub fn normalize_title(title: &str) -> String {
    let title = title.split('#').next().unwrap_or("");
    let spaced = title.replace('_', " ");
    let mut collapsed = String::with_capacity(spaced.len());
    for w in spaced.split_whitespace() {
        if !collapsed.is_empty() {
            collapsed.push(' ');
        }
        collapsed.push_str(w);
    }
    let mut chars = collapsed.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleEntry {
    pub qid: String,
    pub cui: Cui,
}

/// Normalised article title → (knowledge-graph id, concept id).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleCuiMap {
    entries: BTreeMap<String, ArticleEntry>,
    /// Rows whose title was already present.
    pub duplicates: usize,
    /// Rows rejected by the loader.
    pub malformed: usize,
}

pub fn is_qid(s: &str) -> bool {
    s.len() > 1 && s.starts_with('Q') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

impl ArticleCuiMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// First insert per title wins; returns false for duplicates.
    pub fn insert(&mut self, title: &str, qid: &str, cui: Cui) -> bool {
        let key = normalize_title(title);
        if key.is_empty() {
            self.malformed += 1;
            return false;
        }
        if self.entries.contains_key(&key) {
            self.duplicates += 1;
            return false;
        }
        self.entries.insert(key, ArticleEntry { qid: qid.to_string(), cui });
        true
    }

    /// Parses one `qid<TAB>cui<TAB>title` row; bad rows are counted.
    pub fn insert_tsv_row(&mut self, line: &str) -> bool {
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            return false;
        }
        let mut f = line.split('\t');
        let row = (|| {
            let qid = f.next()?.trim();
            let cui = Cui::new(f.next()?.trim()).ok()?;
            let title = f.next()?.trim();
            (is_qid(qid) && !title.is_empty()).then_some((qid, cui, title))
        })();
        match row {
            Some((qid, cui, title)) => self.insert(title, qid, cui),
            None => {
                self.malformed += 1;
                false
            }
        }
    }

    pub fn from_tsv<'a, I: IntoIterator<Item = &'a str>>(lines: I) -> Self {
        let mut m = ArticleCuiMap::new();
        for line in lines {
            m.insert_tsv_row(line);
        }
        m
    }

    pub fn get(&self, title: &str) -> Option<&ArticleEntry> {
        self.entries.get(&normalize_title(title))
    }

    /// Looks up an already normalised title.
    pub fn get_normalized(&self, key: &str) -> Option<&ArticleEntry> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ArticleEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Redirect source → target, both normalised.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RedirectTable {
    targets: BTreeMap<String, String>,
}

impl RedirectTable {
    pub fn insert(&mut self, from: &str, to: &str) {
        let (f, t) = (normalize_title(from), normalize_title(to));
        if !f.is_empty() && !t.is_empty() && f != t {
            self.targets.insert(f, t);
        }
    }

    /// Follows redirects for at most eight hops.
    pub fn resolve(&self, normalized: &str) -> String {
        let mut cur = normalized.to_string();
        for _ in 0..8 {
            match self.targets.get(&cur) {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiPage {
    pub page_id: u64,
    pub title: String,
    pub namespace: i64,
    pub wikitext: String,
    pub redirect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub sentence_id: u64,
    pub page_title: String,
    pub text: String,
    pub token_count: usize,
}

impl SentenceRecord {
    pub fn new(sentence_id: u64, page_title: String, text: String) -> Self {
        let token_count = text.split_whitespace().count();
        SentenceRecord { sentence_id, page_title, text, token_count }
    }
}

/// A hyperlink-derived mention; `start..end` are char offsets into the
/// sentence text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionAnnotation {
    pub sentence_id: u64,
    pub start: usize,
    pub end: usize,
    pub anchor: String,
    pub target_title: String,
    pub cui: Cui,
    pub qid: String,
}

/// Char-offset substring.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut idx = text.char_indices().map(|(i, _)| i).chain(core::iter::once(text.len()));
    let s = idx.by_ref().nth(start)?;
    let e = if end == start { s } else { idx.nth(end - start - 1)? };
    Some(&text[s..e])
}

impl MentionAnnotation {
    /// `0 <= start < end <= len(text)` and the anchor matches the span.
    pub fn is_consistent_with(&self, sentence: &SentenceRecord) -> bool {
        self.sentence_id == sentence.sentence_id
            && self.start < self.end
            && char_slice(&sentence.text, self.start, self.end) == Some(self.anchor.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub sentences: usize,
    pub mentions: usize,
    pub unique_mentions: usize,
    /// Mentions whose string is not an ontology term.
    pub unseen_mentions: usize,
    pub cuis: usize,
    pub unique_cuis: usize,
    /// Mentions whose concept has no ontology term.
    pub unlinkable_cuis: usize,
    pub avg_tokens_per_sentence: f64,
}

impl CorpusStats {
    /// Without an ontology the unseen and unlinkable counts are zero.
    pub fn compute(
        sentences: &[SentenceRecord],
        mentions: &[MentionAnnotation],
        ontology: Option<&[OntologyRecord]>,
    ) -> Self {
        let unique_mentions = mentions.iter().map(|m| m.anchor.as_str()).collect::<BTreeSet<_>>().len();
        let unique_cuis = mentions.iter().map(|m| &m.cui).collect::<BTreeSet<_>>().len();
        let (unseen, unlinkable) = match ontology {
            Some(o) => {
                let texts: BTreeSet<&str> = o.iter().map(|r| r.text.as_str()).collect();
                let cuis: BTreeSet<&Cui> = o.iter().map(|r| &r.cui).collect();
                (
                    mentions.iter().filter(|m| !texts.contains(m.anchor.as_str())).count(),
                    mentions.iter().filter(|m| !cuis.contains(&m.cui)).count(),
                )
            }
            None => (0, 0),
        };
        let tokens: usize = sentences.iter().map(|s| s.token_count).sum();
        CorpusStats {
            sentences: sentences.len(),
            mentions: mentions.len(),
            unique_mentions,
            unseen_mentions: unseen,
            cuis: mentions.len(),
            unique_cuis,
            unlinkable_cuis: unlinkable,
            avg_tokens_per_sentence: if sentences.is_empty() {
                0.0
            } else {
                tokens as f64 / sentences.len() as f64
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCorpus {
    pub sentences: Vec<SentenceRecord>,
    pub mentions: Vec<MentionAnnotation>,
    pub stats: CorpusStats,
    /// Unbalanced markup regions dropped while stripping.
    pub markup_warnings: usize,
}

/// Streaming corpus builder; pages are consumed one at a time.
pub struct CorpusCompiler<'a> {
    map: &'a ArticleCuiMap,
    splitter: &'a SentenceSplitter,
    redirects: Option<&'a RedirectTable>,
    wikitext: WikitextOptions,
    sentences: Vec<SentenceRecord>,
    mentions: Vec<MentionAnnotation>,
    markup_warnings: usize,
}

impl<'a> CorpusCompiler<'a> {
    pub fn new(map: &'a ArticleCuiMap, splitter: &'a SentenceSplitter) -> Self {
        CorpusCompiler {
            map,
            splitter,
            redirects: None,
            wikitext: WikitextOptions::default(),
            sentences: Vec::new(),
            mentions: Vec::new(),
            markup_warnings: 0,
        }
    }

    pub fn with_redirects(mut self, redirects: &'a RedirectTable) -> Self {
        self.redirects = Some(redirects);
        self
    }

    pub fn with_wikitext_options(mut self, opts: WikitextOptions) -> Self {
        self.wikitext = opts;
        self
    }

    fn lookup(&self, target: &str) -> Option<&'a ArticleEntry> {
        let key = normalize_title(target);
        let key = match self.redirects {
            Some(r) => r.resolve(&key),
            None => key,
        };
        self.map.get_normalized(&key)
    }

    pub fn add_page(&mut self, page: &WikiPage) {
        if page.redirect.is_some() || page.namespace != 0 {
            return;
        }
        let stripped = strip_wikitext_with(&page.wikitext, &self.wikitext);
        self.markup_warnings += stripped.warnings;
        let chars: Vec<char> = stripped.text.chars().collect();
        let mut links = stripped.links.iter().peekable();
        for (s, e) in self.splitter.split(&stripped.text) {
            // links are ordered by start offset
            while links.peek().is_some_and(|l| l.start < s) {
                links.next();
            }
            let mut found: Vec<(&WikiLink, &ArticleEntry)> = Vec::new();
            while let Some(l) = links.peek() {
                if l.start >= e {
                    break;
                }
                if l.end <= e {
                    if let Some(entry) = self.lookup(&l.target) {
                        found.push((l, entry));
                    }
                }
                links.next();
            }
            if found.is_empty() {
                continue;
            }
            let sentence_id = self.sentences.len() as u64;
            let text: String = chars[s..e].iter().collect();
            for (l, entry) in found {
                self.mentions.push(MentionAnnotation {
                    sentence_id,
                    start: l.start - s,
                    end: l.end - s,
                    anchor: l.anchor.clone(),
                    target_title: l.target.clone(),
                    cui: entry.cui.clone(),
                    qid: entry.qid.clone(),
                });
            }
            self.sentences.push(SentenceRecord::new(sentence_id, page.title.clone(), text));
        }
    }

    pub fn finish(self, ontology: Option<&[OntologyRecord]>) -> CompiledCorpus {
        let stats = CorpusStats::compute(&self.sentences, &self.mentions, ontology);
        CompiledCorpus {
            sentences: self.sentences,
            mentions: self.mentions,
            stats,
            markup_warnings: self.markup_warnings,
        }
    }
}

/// Selects every sentence holding at least one link to a mapped article and
/// annotates each such link.
pub fn compile_corpus<'p, I>(pages: I, map: &ArticleCuiMap, splitter: &SentenceSplitter) -> CompiledCorpus
where
    I: IntoIterator<Item = &'p WikiPage>,
{
    let mut c = CorpusCompiler::new(map, splitter);
    for p in pages {
        c.add_page(p);
    }
    c.finish(None)
}
