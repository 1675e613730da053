//! Wikitext to plain text with hyperlink spans.
//!
//! Templates, tables, references, comments, and file or category links are
//! removed; internal links are replaced by their anchor text and reported
//! with char offsets into the cleaned text.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// An internal link in the cleaned text; `start..end` are char offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiLink {
    pub start: usize,
    pub end: usize,
    pub anchor: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StrippedText {
    pub text: String,
    pub links: Vec<WikiLink>,
    /// Unbalanced constructs whose remainder was dropped.
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WikitextOptions {
    /// Link namespaces dropped together with their content (compared
    /// case-insensitively, without the colon).
    pub dropped_namespaces: Vec<String>,
    /// Tags whose whole element is removed, not just the tag markup.
    pub dropped_tags: Vec<String>,
}

impl Default for WikitextOptions {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        WikitextOptions {
            dropped_namespaces: s(&[
                "file", "image", "media", "category", "bestand", "afbeelding", "categorie",
            ]),
            dropped_tags: s(&["ref", "math", "gallery", "timeline", "score", "syntaxhighlight", "source", "nowiki"]),
        }
    }
}

pub fn strip_wikitext(markup: &str) -> StrippedText {
    strip_wikitext_with(markup, &WikitextOptions::default())
}

pub fn strip_wikitext_with(markup: &str, opts: &WikitextOptions) -> StrippedText {
    let src: Vec<char> = markup.chars().collect();
    let mut s = Stripper { src: &src, opts, out: Vec::new(), links: Vec::new(), warnings: 0 };
    s.run(0, src.len(), true, true);
    let (text, links) = tidy(&s.out, s.links);
    StrippedText { text, links, warnings: s.warnings }
}

struct RawLink {
    start: usize,
    end: usize,
    target: String,
}

struct Stripper<'a> {
    src: &'a [char],
    opts: &'a WikitextOptions,
    out: Vec<char>,
    links: Vec<RawLink>,
    warnings: usize,
}

impl Stripper<'_> {
    fn starts_with(&self, i: usize, end: usize, pat: &str) -> bool {
        for (k, c) in (i..).zip(pat.chars()) {
            if k >= end || self.src[k] != c {
                return false;
            }
        }
        true
    }

    fn starts_with_ci(&self, i: usize, end: usize, pat: &str) -> bool {
        for (k, c) in (i..).zip(pat.chars()) {
            if k >= end || !self.src[k].eq_ignore_ascii_case(&c) {
                return false;
            }
        }
        true
    }

    fn find(&self, from: usize, end: usize, pat: &str) -> Option<usize> {
        (from..end).find(|&k| self.starts_with(k, end, pat))
    }

    fn find_ci(&self, from: usize, end: usize, pat: &str) -> Option<usize> {
        (from..end).find(|&k| self.starts_with_ci(k, end, pat))
    }

    fn line_end(&self, from: usize, end: usize) -> usize {
        (from..end).find(|&k| self.src[k] == '\n').unwrap_or(end)
    }

    /// Index just past the delimiter closing a construct opened at `i`,
    /// counting nested openers.
    fn matching(&self, i: usize, end: usize, open: &str, close: &str) -> Option<usize> {
        let (ol, cl) = (open.chars().count(), close.chars().count());
        let mut depth = 0usize;
        let mut k = i;
        while k < end {
            if self.starts_with(k, end, open) {
                depth += 1;
                k += ol;
            } else if self.starts_with(k, end, close) {
                depth -= 1;
                k += cl;
                if depth == 0 {
                    return Some(k);
                }
            } else {
                k += 1;
            }
        }
        None
    }

    fn run(&mut self, start: usize, end: usize, line_mode: bool, collect_links: bool) {
        let mut i = start;
        while i < end {
            let at_line_start = line_mode && (i == start || self.src[i - 1] == '\n');
            if at_line_start {
                if let Some(next) = self.line_prefix(i, end, collect_links) {
                    i = next;
                    continue;
                }
            }
            let c = self.src[i];
            i = match c {
                '<' if self.starts_with(i, end, "<!--") => match self.find(i + 4, end, "-->") {
                    Some(k) => k + 3,
                    None => {
                        self.warnings += 1;
                        end
                    }
                },
                '<' => self.tag(i, end),
                '{' if self.starts_with(i, end, "{{") => match self.matching(i, end, "{{", "}}") {
                    Some(k) => k,
                    None => {
                        self.warnings += 1;
                        end
                    }
                },
                '[' if self.starts_with(i, end, "[[") => self.internal_link(i, end, collect_links),
                '[' => self.external_link(i, end),
                '\'' if self.starts_with(i, end, "''") => {
                    let mut k = i;
                    while k < end && self.src[k] == '\'' {
                        k += 1;
                    }
                    k
                }
                '_' if self.starts_with(i, end, "__") => self.magic_word(i, end),
                '&' => self.entity(i, end),
                _ => {
                    self.out.push(c);
                    i + 1
                }
            };
        }
    }

    /// Handles headings, tables and list markers at the start of a line.
    fn line_prefix(&mut self, i: usize, end: usize, collect_links: bool) -> Option<usize> {
        let le = self.line_end(i, end);
        let c = self.src[i];
        if c == '{' && self.starts_with(i, end, "{|") {
            return Some(match self.matching(i, end, "{|", "|}") {
                Some(k) => k,
                None => {
                    self.warnings += 1;
                    end
                }
            });
        }
        if c == '=' {
            let mut tail = le;
            while tail > i && self.src[tail - 1].is_whitespace() {
                tail -= 1;
            }
            let mut lead = i;
            while lead < tail && self.src[lead] == '=' {
                lead += 1;
            }
            let mut trail = tail;
            while trail > lead && self.src[trail - 1] == '=' {
                trail -= 1;
            }
            if trail < tail && lead < trail {
                self.run(lead, trail, false, collect_links);
                return Some(le);
            }
            return None;
        }
        if matches!(c, '*' | '#' | ':' | ';') {
            let mut k = i;
            while k < le && matches!(self.src[k], '*' | '#' | ':' | ';') {
                k += 1;
            }
            while k < le && self.src[k] == ' ' {
                k += 1;
            }
            return Some(k);
        }
        None
    }

    fn tag(&mut self, i: usize, end: usize) -> usize {
        let le = self.line_end(i, end);
        let name_start = if self.starts_with(i, end, "</") { i + 2 } else { i + 1 };
        let is_letter = name_start < end && self.src[name_start].is_ascii_alphabetic();
        let close = (name_start..le).find(|&k| self.src[k] == '>');
        let (true, Some(close)) = (is_letter, close) else {
            self.out.push('<');
            return i + 1;
        };
        let name_end = (name_start..close)
            .find(|&k| !self.src[k].is_ascii_alphanumeric())
            .unwrap_or(close);
        let name: String = self.src[name_start..name_end].iter().collect::<String>().to_ascii_lowercase();
        let self_closing = self.src[close - 1] == '/';
        let opening = name_start == i + 1;
        if opening && !self_closing && self.opts.dropped_tags.contains(&name) {
            let closing = alloc::format!("</{name}");
            return match self.find_ci(close + 1, end, &closing) {
                Some(k) => (k..end).find(|&m| self.src[m] == '>').map_or(end, |m| m + 1),
                None => {
                    self.warnings += 1;
                    end
                }
            };
        }
        close + 1
    }

    fn internal_link(&mut self, i: usize, end: usize, collect_links: bool) -> usize {
        let Some(close) = self.matching(i, end, "[[", "]]") else {
            self.warnings += 1;
            return self.line_end(i, end);
        };
        let (inner_start, inner_end) = (i + 2, close - 2);
        let pipe = self.top_level_pipe(inner_start, inner_end);
        let target_end = pipe.unwrap_or(inner_end);
        let raw_target: String = self.src[inner_start..target_end].iter().collect();
        let target = raw_target.trim();
        let explicit = target.starts_with(':');
        let target = target.trim_start_matches(':').trim();
        if target.is_empty() {
            return close;
        }
        if !explicit {
            if let Some((ns, _)) = target.split_once(':') {
                let ns = ns.trim().to_lowercase();
                if self.opts.dropped_namespaces.contains(&ns) {
                    return close;
                }
            }
        }

        let out_start = self.out.len();
        match pipe {
            Some(p) => self.run(p + 1, inner_end, false, false),
            None => self.out.extend(target.chars()),
        }
        if self.out[out_start..].iter().all(|c| c.is_whitespace()) {
            self.out.truncate(out_start);
            self.out.extend(target.chars());
        }
        let mut s = out_start;
        let mut e = self.out.len();
        while s < e && self.out[s].is_whitespace() {
            s += 1;
        }
        while e > s && self.out[e - 1].is_whitespace() {
            e -= 1;
        }
        if collect_links && s < e {
            self.links.push(RawLink { start: s, end: e, target: target.to_string() });
        }
        close
    }

    fn top_level_pipe(&self, start: usize, end: usize) -> Option<usize> {
        let mut depth = 0i32;
        let mut k = start;
        while k < end {
            if self.starts_with(k, end, "[[") || self.starts_with(k, end, "{{") {
                depth += 1;
                k += 2;
            } else if self.starts_with(k, end, "]]") || self.starts_with(k, end, "}}") {
                depth -= 1;
                k += 2;
            } else {
                if depth == 0 && self.src[k] == '|' {
                    return Some(k);
                }
                k += 1;
            }
        }
        None
    }

    fn external_link(&mut self, i: usize, end: usize) -> usize {
        let url_start = i + 1;
        let is_url = ["http://", "https://", "//"].iter().any(|p| self.starts_with_ci(url_start, end, p));
        let le = self.line_end(i, end);
        let close = (url_start..le).find(|&k| self.src[k] == ']');
        match (is_url, close) {
            (true, Some(close)) => {
                if let Some(sp) = (url_start..close).find(|&k| self.src[k] == ' ') {
                    self.run(sp + 1, close, false, false);
                }
                close + 1
            }
            _ => {
                self.out.push('[');
                i + 1
            }
        }
    }

    fn magic_word(&mut self, i: usize, end: usize) -> usize {
        let mut k = i + 2;
        while k < end && self.src[k].is_ascii_uppercase() {
            k += 1;
        }
        if k > i + 2 && self.starts_with(k, end, "__") {
            k + 2
        } else {
            self.out.push('_');
            i + 1
        }
    }

    fn entity(&mut self, i: usize, end: usize) -> usize {
        const ENTITIES: [(&str, char); 7] = [
            ("&nbsp;", ' '),
            ("&amp;", '&'),
            ("&lt;", '<'),
            ("&gt;", '>'),
            ("&quot;", '"'),
            ("&#39;", '\''),
            ("&apos;", '\''),
        ];
        for (name, c) in ENTITIES {
            if self.starts_with(i, end, name) {
                self.out.push(c);
                return i + name.chars().count();
            }
        }
        self.out.push('&');
        i + 1
    }
}

/// Collapses blank runs left behind by removed markup and remaps link
/// offsets onto the tidied text.
fn tidy(raw: &[char], links: Vec<RawLink>) -> (String, Vec<WikiLink>) {
    // map[i] = position in the tidied output of raw char i
    let mut map = vec![0usize; raw.len() + 1];
    let mut out: Vec<char> = Vec::with_capacity(raw.len());
    let mut pending_space = false;
    let mut pending_newlines = 0usize;
    for (i, &c) in raw.iter().enumerate() {
        if c == '\n' {
            pending_newlines += 1;
            pending_space = false;
            map[i] = out.len();
            continue;
        }
        if c.is_whitespace() {
            pending_space = true;
            map[i] = out.len();
            continue;
        }
        if !out.is_empty() {
            if pending_newlines > 0 {
                out.extend(core::iter::repeat_n('\n', pending_newlines.min(2)));
            } else if pending_space {
                out.push(' ');
            }
        }
        pending_space = false;
        pending_newlines = 0;
        map[i] = out.len();
        out.push(c);
    }
    map[raw.len()] = out.len();

    let links = links
        .into_iter()
        .map(|l| {
            // link spans start and end on non-whitespace chars
            let start = map[l.start];
            let end = map[l.end - 1] + 1;
            WikiLink { start, end, anchor: out[start..end].iter().collect(), target: l.target }
        })
        .collect();
    (out.into_iter().collect(), links)
}
