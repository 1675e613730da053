use std::collections::{BTreeMap, BTreeSet};

use belforge_core::ontology::{
    CrosswalkDrop, CrosswalkRow, FilterConfig, SemanticGroupMap, SemanticTypeRow, SubtermPattern, TermRecord,
    build_ontology, crosswalk_terms,
};
use belforge_core::{Cui, SemanticGroup, Tui};
use proptest::prelude::*;

const TOKENS: [&str; 9] = ["Koorts", "koorts", "griep", "(NOS)", "[X]", "pijn", "hoofd", "Ziekte", "ß"];
const VOCABS: [&str; 5] = ["MDRDUT", "MSHDUT", "SNOMEDCT_US", "ICPCDUT", "ATC"];
const TUIS: [&str; 3] = ["T047", "T121", "T999"];

fn cui(i: u32) -> Cui {
    Cui::new(&format!("C{i:07}")).unwrap()
}

fn config() -> FilterConfig {
    let mut c = FilterConfig { language: Some("DUT".into()), ..FilterConfig::default() };
    c.drop_vocabs.insert("MSHDUT".into());
    c.descriptive_subterm_patterns = vec![
        SubtermPattern { pattern: "(NOS)".into(), vocabs: ["MDRDUT".to_string()].into() },
        SubtermPattern { pattern: "[X]".into(), vocabs: ["MDRDUT".to_string(), "ICPCDUT".to_string()].into() },
    ];
    c.drop_tuis.insert(Tui::new("T204").unwrap());
    c.drug_vocabs.insert("ATC".into());
    c
}

fn groups() -> SemanticGroupMap {
    let mut g = SemanticGroupMap::new();
    g.insert(Tui::new("T047").unwrap(), SemanticGroup::Diso);
    g.insert(Tui::new("T121").unwrap(), SemanticGroup::Chem);
    g.insert(Tui::new("T204").unwrap(), SemanticGroup::Livb);
    g
}

#[derive(Debug, Clone)]
struct Input {
    concepts: Vec<TermRecord>,
    sty: Vec<SemanticTypeRow>,
    crosswalk: Vec<CrosswalkRow>,
}

/// Concepts 0..10; concepts 8 and 9 are the only ones typed T204, and drug
/// names never belong to them (see `idempotent_on_own_output`).
fn input() -> impl Strategy<Value = Input> {
    let rec = (0u32..10, 0usize..5, any::<bool>(), prop::collection::vec(0usize..9, 1..4), 100u64..106);
    let sty = prop::collection::vec((0u32..8, 0usize..3), 0..12);
    let cw = prop::collection::vec((100u64..108, prop::collection::vec(0usize..9, 1..3)), 0..6);
    (prop::collection::vec(rec, 0..30), sty, cw).prop_map(|(recs, sty, cw)| {
        let concepts = recs
            .into_iter()
            .enumerate()
            .map(|(i, (c, v, dut, toks, code))| {
                let vocab = VOCABS[v];
                let c = if vocab == "ATC" { c % 8 } else { c };
                TermRecord {
                    term_id: i as u64,
                    cui: cui(c),
                    language: if dut { "DUT" } else { "ENG" }.into(),
                    vocab: vocab.into(),
                    source_code: code.to_string(),
                    text: toks.iter().map(|&t| TOKENS[t]).collect::<Vec<_>>().join(" "),
                }
            })
            .collect();
        let mut sty: Vec<SemanticTypeRow> = sty
            .into_iter()
            .map(|(c, t)| SemanticTypeRow { cui: cui(c), tui: Tui::new(TUIS[t]).unwrap(), type_name: String::new() })
            .collect();
        for c in [8, 9] {
            sty.push(SemanticTypeRow { cui: cui(c), tui: Tui::new("T204").unwrap(), type_name: String::new() });
        }
        let crosswalk = cw
            .into_iter()
            .map(|(id, toks)| CrosswalkRow { sctid: id, text: toks.iter().map(|&t| TOKENS[t]).collect::<Vec<_>>().join(" ") })
            .collect();
        Input { concepts, sty, crosswalk }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn step_counts_move_in_the_right_direction(inp in input()) {
        let b = build_ontology(&inp.concepts, &inp.sty, &groups(), &inp.crosswalk, &config());
        let c = b.stats.counts();
        prop_assert_eq!(c.len(), 7);
        prop_assert!(c[0] <= inp.concepts.len());
        prop_assert!(c[1] <= c[0] && c[2] <= c[1] && c[4] <= c[3]);
        prop_assert!(c[3] >= c[2] && c[5] >= c[4]);
        prop_assert_eq!(c[6], c[5]);
        prop_assert_eq!(c[6], b.records.len());
    }

    #[test]
    fn idempotent_on_own_output(inp in input()) {
        let cfg = config();
        let first = build_ontology(&inp.concepts, &inp.sty, &groups(), &inp.crosswalk, &cfg);
        let again: Vec<TermRecord> = first
            .records
            .iter()
            .map(|r| TermRecord {
                term_id: r.term_id,
                cui: r.cui.clone(),
                language: "DUT".into(),
                vocab: r.vocab.clone(),
                source_code: String::new(),
                text: r.text.clone(),
            })
            .collect();
        let no_adds = FilterConfig { drug_vocabs: BTreeSet::new(), ..cfg };
        let second = build_ontology(&again, &inp.sty, &groups(), &[], &no_adds);
        prop_assert_eq!(second.records, first.records);
    }

    #[test]
    fn groups_follow_first_type(inp in input()) {
        let b = build_ontology(&inp.concepts, &inp.sty, &groups(), &inp.crosswalk, &config());
        let mut first: BTreeMap<&Cui, &Tui> = BTreeMap::new();
        for row in &inp.sty {
            first.entry(&row.cui).or_insert(&row.tui);
        }
        let g = groups();
        for r in &b.records {
            let expected = first.get(&r.cui).map_or(SemanticGroup::Other, |t| g.resolve(t));
            prop_assert_eq!(r.group, expected);
            prop_assert!(!r.text.is_empty());
        }
        let keys: BTreeSet<(&Cui, String)> = b.records.iter().map(|r| (&r.cui, r.text.to_lowercase())).collect();
        prop_assert_eq!(keys.len(), b.records.len());
    }

    #[test]
    fn crosswalk_is_pure_and_skips_ambiguous(inp in input()) {
        let bridge: Vec<TermRecord> = inp.concepts.iter().filter(|r| r.vocab == "SNOMEDCT_US").cloned().collect();
        let a = crosswalk_terms(&inp.crosswalk, &bridge, 1000, "SNOMEDCT_NL", "DUT");
        prop_assert_eq!(&a, &crosswalk_terms(&inp.crosswalk, &bridge, 1000, "SNOMEDCT_NL", "DUT"));
        for r in &a.records {
            let id: u64 = r.source_code.parse().unwrap();
            prop_assert!(!a.dropped.contains_key(&id));
            let owners: BTreeSet<&Cui> = bridge.iter().filter(|b| b.source_code == r.source_code).map(|b| &b.cui).collect();
            prop_assert_eq!(owners.into_iter().collect::<Vec<_>>(), vec![&r.cui]);
        }
        for (id, why) in &a.dropped {
            let owners: BTreeSet<&Cui> = bridge.iter().filter(|b| b.source_code == id.to_string()).map(|b| &b.cui).collect();
            match why {
                CrosswalkDrop::Ambiguous => prop_assert!(owners.len() >= 2),
                CrosswalkDrop::NoMatch => prop_assert!(owners.is_empty()),
            }
        }
    }
}
