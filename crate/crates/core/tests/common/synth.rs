//! Synthetic linking task: concepts named by random syllable words, with
//! synonyms built from shared clinical modifiers and one-edit typos.
//!
//! An untrained n-gram encoder mostly matches on the long shared modifiers,
//! so it links poorly. Held-out and weak-corpus mentions also carry a
//! clinical lead-in phrase that never occurs in the ontology.

#![allow(dead_code)]

use belforge_core::corpus::{MentionAnnotation, SentenceRecord};
use belforge_core::ontology::OntologyRecord;
use belforge_core::{Cui, SemanticGroup};
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ne", "ru", "sto", "ve", "bri", "do", "fa", "gu", "ho", "jes", "pi", "ta", "zo", "mar", "tel",
    "os", "ur", "ein", "pra", "lix", "dum",
];
const MODIFIERS: [&str; 8] =
    ["chronische", "acute", "aangeboren", "linkszijdige", "ernstige", "recidiverende", "idiopathische", "secundaire"];
const LEAD_INS: [&str; 4] = ["verdenking", "status na", "bekend met", "anamnese"];

pub struct SynthTask {
    pub ontology: Vec<OntologyRecord>,
    pub held_out: Vec<(String, Cui)>,
    pub weak_sentences: Vec<SentenceRecord>,
    pub weak_mentions: Vec<MentionAnnotation>,
}

fn word(rng: &mut ChaCha8Rng) -> String {
    (0..rng.random_range(2..4)).map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())]).collect()
}

/// One random deletion, substitution or insertion.
pub fn perturb(rng: &mut ChaCha8Rng, w: &str) -> String {
    let mut c: Vec<char> = w.chars().collect();
    let i = rng.random_range(0..c.len());
    let letter = char::from(b'a' + rng.random_range(0..26u8));
    match rng.random_range(0..3) {
        0 if c.len() > 1 => {
            c.remove(i);
        }
        1 => c[i] = letter,
        _ => c.insert(i, letter),
    }
    c.into_iter().collect()
}

/// `concepts` concepts with four synonyms each, `held_out` test mentions
/// and `weak` weak-corpus mentions.
pub fn synth_task(seed: u64, concepts: usize, held_out: usize, weak: usize) -> SynthTask {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let mut ontology = Vec::new();
    let mut cores = Vec::new();
    for i in 0..concepts {
        let cui = Cui::new(&format!("C{:07}", i + 1)).unwrap();
        let core = word(&mut rng);
        let mut mods = MODIFIERS;
        mods.shuffle(&mut rng);
        let variants = [
            core.clone(),
            format!("{} {}", mods[0], core),
            format!("{} {}", mods[1], perturb(&mut rng, &core)),
            format!("{} {}", perturb(&mut rng, &core), mods[2]),
        ];
        for text in variants {
            ontology.push(OntologyRecord {
                term_id: ontology.len() as u64,
                cui: cui.clone(),
                text,
                vocab: "SYN".into(),
                group: SemanticGroup::Diso,
            });
        }
        cores.push((cui, core));
    }
    let mention = |rng: &mut ChaCha8Rng| {
        let (cui, core) = cores[rng.random_range(0..cores.len())].clone();
        let m = MODIFIERS[rng.random_range(0..MODIFIERS.len())];
        let lead = LEAD_INS[rng.random_range(0..LEAD_INS.len())];
        (format!("{lead} {m} {}", perturb(rng, &core)), cui)
    };
    let held: Vec<(String, Cui)> = (0..held_out).map(|_| mention(&mut rng)).collect();

    let mut weak_sentences = Vec::new();
    let mut weak_mentions = Vec::new();
    for k in 0..weak {
        let (text, cui) = mention(&mut rng);
        let prefix = "De patiënt had ";
        let sentence = format!("{prefix}{text}.");
        let start = prefix.chars().count();
        weak_mentions.push(MentionAnnotation {
            sentence_id: k as u64,
            start,
            end: start + text.chars().count(),
            anchor: text,
            target_title: format!("Artikel {k}"),
            cui,
            qid: format!("Q{}", k + 1),
        });
        weak_sentences.push(SentenceRecord::new(k as u64, format!("Artikel {k}"), sentence));
    }
    SynthTask { ontology, held_out: held, weak_sentences, weak_mentions }
}
