use std::collections::BTreeSet;

use belforge_core::corpus::{
    ArticleCuiMap, CorpusStats, MentionAnnotation, SentenceRecord, SentenceSplitter, WikiPage, build_star_subset,
    char_slice, compile_corpus, split_sentences, strip_wikitext,
};
use belforge_core::ontology::OntologyRecord;
use belforge_core::{Cui, SemanticGroup};
use proptest::prelude::*;

const WORDS: [&str; 10] = ["de", "patiënt", "heeft", "koorts", "en", "Griep", "werd", "behandeld", "bij", "ÿ̈ß"];
const TITLES: [&str; 5] = ["Griep", "Hoofdpijn", "Koorts", "Diabetes mellitus", "Onbekend"];

/// Wikitext built from words, links, templates, emphasis, comments and
/// references, possibly nested.
fn markup() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        4 => prop::sample::select(&WORDS[..]).prop_map(|w| format!("{w} ")),
        1 => Just(". ".to_string()),
        1 => Just("\n".to_string()),
        2 => prop::sample::select(&TITLES[..]).prop_map(|t| format!("[[{t}]] ")),
        2 => (prop::sample::select(&TITLES[..]), prop::sample::select(&WORDS[..]))
            .prop_map(|(t, w)| format!("[[{t}|{w} x]] ")),
        1 => Just("[[Bestand:X.jpg|thumb|[[Griep]] foto]]".to_string()),
        1 => Just("<!-- [[Koorts]] -->".to_string()),
        1 => Just("<ref>{{cite|[[Griep]]}}</ref>".to_string()),
        1 => Just("[http://example.org label] ".to_string()),
    ];
    leaf.prop_recursive(3, 40, 6, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..6).prop_map(|v| v.concat()),
            inner.clone().prop_map(|s| format!("'''{s}''' ")),
            inner.clone().prop_map(|s| format!("{{{{infobox|a={s}}}}}")),
            inner.prop_map(|s| format!("== {} ==\n", s.replace('\n', " "))),
        ]
    })
}

fn map() -> ArticleCuiMap {
    let mut m = ArticleCuiMap::new();
    for (i, t) in TITLES[..4].iter().enumerate() {
        m.insert(t, &format!("Q{}", i + 1), Cui::new(&format!("C000000{}", i + 1)).unwrap());
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn link_spans_match_anchors(src in markup()) {
        let s = strip_wikitext(&src);
        for l in &s.links {
            prop_assert!(l.start < l.end);
            prop_assert_eq!(char_slice(&s.text, l.start, l.end), Some(l.anchor.as_str()));
        }
        prop_assert!(s.links.windows(2).all(|w| w[0].end <= w[1].start));
    }

    #[test]
    fn sentence_spans_cover_text(text in "[a-zA-Z .!?\n]{0,120}") {
        let sp = SentenceSplitter::dutch();
        let spans = split_sentences(&text, &sp);
        let chars: Vec<char> = text.chars().collect();
        let mut covered = vec![false; chars.len()];
        let mut prev_end = 0;
        for &(s, e) in &spans {
            prop_assert!(s < e && s >= prev_end && e <= chars.len());
            prop_assert!(!chars[s].is_whitespace() && !chars[e - 1].is_whitespace());
            covered[s..e].iter_mut().for_each(|c| *c = true);
            prev_end = e;
        }
        for (c, cov) in chars.iter().zip(&covered) {
            prop_assert!(c.is_whitespace() || *cov);
        }
    }

    #[test]
    fn compiled_mentions_are_consistent(pages in prop::collection::vec(markup(), 1..6)) {
        let pages: Vec<WikiPage> = pages
            .into_iter()
            .enumerate()
            .map(|(i, w)| WikiPage { page_id: i as u64 + 1, title: format!("P{i}"), namespace: 0, wikitext: w, redirect: None })
            .collect();
        let c = compile_corpus(&pages, &map(), &SentenceSplitter::dutch());
        for m in &c.mentions {
            let s = c.sentences.iter().find(|s| s.sentence_id == m.sentence_id).unwrap();
            prop_assert!(m.is_consistent_with(s));
            prop_assert!(m.target_title != "Onbekend");
        }
        prop_assert!(c.stats.unique_mentions <= c.stats.mentions);
        let ids: Vec<u64> = c.sentences.iter().map(|s| s.sentence_id).collect();
        prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }
}

fn record(id: u64, cui: u32, text: &str) -> OntologyRecord {
    OntologyRecord {
        term_id: id,
        cui: Cui::new(&format!("C{cui:07}")).unwrap(),
        text: text.into(),
        vocab: "V".into(),
        group: SemanticGroup::Diso,
    }
}

fn mentions_strategy() -> impl Strategy<Value = Vec<(u8, u32)>> {
    prop::collection::vec((0u8..15, 0u32..8), 0..60)
}

fn slice_from(raw: &[(u8, u32)]) -> (Vec<SentenceRecord>, Vec<MentionAnnotation>) {
    let mut sentences = Vec::new();
    let mut mentions = Vec::new();
    for (i, &(a, c)) in raw.iter().enumerate() {
        let anchor = format!("term{a}");
        sentences.push(SentenceRecord::new(i as u64, "P".into(), format!("zie {anchor} hier")));
        mentions.push(MentionAnnotation {
            sentence_id: i as u64,
            start: 4,
            end: 4 + anchor.chars().count(),
            anchor,
            target_title: format!("T{c}"),
            cui: Cui::new(&format!("C{c:07}")).unwrap(),
            qid: format!("Q{c}"),
        });
    }
    (sentences, mentions)
}

proptest! {
    #[test]
    fn star_subset_properties(raw in mentions_strategy(), ratio in 0.05f64..0.95, seed in any::<u64>()) {
        let (sentences, mentions) = slice_from(&raw);
        let ontology: Vec<OntologyRecord> = (0..5).map(|c| record(c as u64, c, &format!("t{c}"))).collect();
        let known: BTreeSet<Cui> = ontology.iter().map(|r| r.cui.clone()).collect();
        let a = build_star_subset(&sentences, &mentions, &ontology, ratio, seed);
        let b = build_star_subset(&sentences, &mentions, &ontology, ratio, seed);
        prop_assert_eq!(&a, &b);

        let all: Vec<&MentionAnnotation> = a.train.mentions.iter().chain(&a.validation.mentions).collect();
        let anchors: BTreeSet<&str> = all.iter().map(|m| m.anchor.as_str()).collect();
        prop_assert_eq!(anchors.len(), all.len());
        prop_assert!(all.iter().all(|m| known.contains(&m.cui)));

        // kept set = first occurrence of each anchor, if its concept is known
        let mut seen = BTreeSet::new();
        let expected: BTreeSet<u64> = mentions
            .iter()
            .filter(|m| seen.insert(m.anchor.clone()))
            .filter(|m| known.contains(&m.cui))
            .map(|m| m.sentence_id)
            .collect();
        let got: BTreeSet<u64> = all.iter().map(|m| m.sentence_id).collect();
        prop_assert_eq!(got.len(), all.len());
        prop_assert_eq!(got, expected);
        for slice in [&a.train, &a.validation] {
            for m in &slice.mentions {
                prop_assert!(slice.sentences.iter().any(|s| m.is_consistent_with(s)));
            }
        }
    }

    #[test]
    fn unlinkable_counts_missing_concepts(raw in mentions_strategy()) {
        let (sentences, mentions) = slice_from(&raw);
        let ontology: Vec<OntologyRecord> = (0..4).map(|c| record(c as u64, c, &format!("term{c}"))).collect();
        let stats = CorpusStats::compute(&sentences, &mentions, Some(&ontology));
        let expected = mentions.iter().filter(|m| !ontology.iter().any(|r| r.cui == m.cui)).count();
        prop_assert_eq!(stats.unlinkable_cuis, expected);
        prop_assert!(stats.unique_mentions <= stats.mentions);
        let unseen = mentions.iter().filter(|m| !ontology.iter().any(|r| r.text == m.anchor)).count();
        prop_assert_eq!(stats.unseen_mentions, unseen);
    }
}
