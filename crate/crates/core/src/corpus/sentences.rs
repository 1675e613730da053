//! Rule-based sentence splitter.
//!
//! A boundary follows a run of `.`, `!` or `?` (plus any closing quotes or
//! brackets) when whitespace and then an uppercase letter or digit come
//! next, unless the token ending in the terminator is a listed
//! abbreviation. Line breaks always end a sentence.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SentenceSplitter {
    /// Lowercased abbreviations including their trailing period, e.g. `ca.`.
    abbreviations: BTreeSet<String>,
}

const CLOSERS: [char; 8] = ['"', '\'', ')', ']', '»', '”', '’', '}'];

/// Abbreviations common in Dutch medical prose.
pub const DUTCH_ABBREVIATIONS: &[&str] = &[
    "ca.", "bijv.", "bv.", "o.a.", "d.w.z.", "e.d.", "enz.", "etc.", "m.b.t.", "i.p.v.", "t.g.v.", "z.g.",
    "zgn.", "resp.", "evt.", "nl.", "dr.", "prof.", "mr.", "mevr.", "st.", "vs.", "jr.", "sr.", "no.", "nr.",
    "fig.", "max.", "min.", "o.b.v.", "i.v.m.", "mg.", "ml.",
];

impl SentenceSplitter {
    pub fn new<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        SentenceSplitter {
            abbreviations: abbreviations.into_iter().map(|a| a.as_ref().trim().to_lowercase()).collect(),
        }
    }

    pub fn dutch() -> Self {
        Self::new(DUTCH_ABBREVIATIONS.iter())
    }

    pub fn abbreviations(&self) -> impl Iterator<Item = &str> {
        self.abbreviations.iter().map(String::as_str)
    }

    /// Sentence spans as char offsets, trimmed of surrounding whitespace.
    pub fn split(&self, text: &str) -> Vec<(usize, usize)> {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        let mut cuts: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < n {
            let c = chars[i];
            if c == '\n' {
                cuts.push(i);
                i += 1;
                continue;
            }
            if !matches!(c, '.' | '!' | '?') {
                i += 1;
                continue;
            }
            let run_start = i;
            let mut k = i;
            while k < n && matches!(chars[k], '.' | '!' | '?') {
                k += 1;
            }
            let term_end = k;
            while k < n && CLOSERS.contains(&chars[k]) {
                k += 1;
            }
            i = k;
            if k >= n || !chars[k].is_whitespace() {
                continue;
            }
            let Some(next) = (k..n).map(|m| chars[m]).find(|c| !c.is_whitespace()) else {
                continue;
            };
            if !(next.is_uppercase() || next.is_ascii_digit()) {
                continue;
            }
            if term_end - run_start == 1 && chars[run_start] == '.' && self.is_abbreviation(&chars, run_start) {
                continue;
            }
            cuts.push(k);
        }
        cuts.push(n);

        let mut spans = Vec::new();
        let mut start = 0;
        for cut in cuts {
            let (mut s, mut e) = (start, cut);
            while s < e && chars[s].is_whitespace() {
                s += 1;
            }
            while e > s && chars[e - 1].is_whitespace() {
                e -= 1;
            }
            if s < e {
                spans.push((s, e));
            }
            start = cut;
        }
        spans
    }

    fn is_abbreviation(&self, chars: &[char], period: usize) -> bool {
        if self.abbreviations.is_empty() {
            return false;
        }
        let mut s = period;
        while s > 0 && !chars[s - 1].is_whitespace() {
            s -= 1;
        }
        let token: String = chars[s..=period].iter().collect::<String>().to_lowercase();
        let token = token.trim_start_matches(['(', '"', '\'', '[']).to_string();
        self.abbreviations.contains(&token)
    }
}

/// Splits with the given abbreviation list.
pub fn split_sentences(text: &str, splitter: &SentenceSplitter) -> Vec<(usize, usize)> {
    splitter.split(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pieces(text: &str, sp: &SentenceSplitter) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        sp.split(text).into_iter().map(|(s, e)| chars[s..e].iter().collect()).collect()
    }

    #[test]
    fn two_sentences() {
        let sp = SentenceSplitter::default();
        assert_eq!(pieces("Dit is zin één. Dit is zin twee.", &sp), ["Dit is zin één.", "Dit is zin twee."]);
    }

    #[test]
    fn abbreviation_blocks_split() {
        let sp = SentenceSplitter::new(["ca."]);
        assert_eq!(sp.split("ca. 5 mg per dag."), [(0, 17)]);
        assert_eq!(SentenceSplitter::default().split("ca. 5 mg per dag.").len(), 2);
    }

    #[test]
    fn empty_text() {
        assert!(SentenceSplitter::default().split("").is_empty());
        assert!(SentenceSplitter::default().split("  \n ").is_empty());
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        let sp = SentenceSplitter::default();
        assert_eq!(pieces("Zie fig. hieronder. Klaar!", &sp), ["Zie fig. hieronder.", "Klaar!"]);
    }

    #[test]
    fn closing_quote_and_multiple_terminators() {
        let sp = SentenceSplitter::default();
        assert_eq!(pieces("Hij zei \"stop!\" Daarna?! Niets.", &sp), ["Hij zei \"stop!\"", "Daarna?!", "Niets."]);
    }

    #[test]
    fn newline_is_a_hard_break() {
        let sp = SentenceSplitter::default();
        assert_eq!(pieces("Symptomen\nkoorts en pijn", &sp), ["Symptomen", "koorts en pijn"]);
    }

    #[test]
    fn char_offsets_with_multibyte_text() {
        let sp = SentenceSplitter::default();
        assert_eq!(sp.split("Één. Twee."), [(0, 4), (5, 10)]);
    }
}
