//! `CUI||term 1||term 2` pair files.

use std::io::{self, BufRead, Write};

use belforge_core::train::{PositivePair, format_pair_line, parse_pair_line};

/// Writes one line per pair and returns how many pairs were dropped because
/// they cannot be written unambiguously (a term holding the separator or a
/// line break, empty or identical terms).
pub fn write_pairs<W: Write>(pairs: &[PositivePair], mut w: W) -> io::Result<usize> {
    let mut dropped = 0;
    for p in pairs {
        let breaks = |t: &str| t.contains(['\n', '\r']);
        match format_pair_line(p) {
            Ok(_) if breaks(&p.term_a) || breaks(&p.term_b) => {
                log::warn!("dropping pair of {}: line break inside a term", p.cui);
                dropped += 1;
            }
            Ok(line) => {
                w.write_all(line.as_bytes())?;
                w.write_all(b"\n")?;
            }
            Err(e) => {
                log::warn!("dropping pair of {}: {e}", p.cui);
                dropped += 1;
            }
        }
    }
    Ok(dropped)
}

/// Reads pairs, skipping blank lines; malformed lines are counted.
pub fn read_pairs<R: BufRead>(r: R) -> io::Result<(Vec<PositivePair>, usize)> {
    let mut pairs = Vec::new();
    let mut malformed = 0;
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_pair_line(&line) {
            Ok(p) => pairs.push(p),
            Err(_) => malformed += 1,
        }
    }
    Ok((pairs, malformed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use belforge_core::Cui;

    fn pair(a: &str, b: &str) -> PositivePair {
        PositivePair { cui: Cui::new("C0000001").unwrap(), term_a: a.into(), term_b: b.into() }
    }

    #[test]
    fn separator_terms_are_dropped() {
        let mut buf = Vec::new();
        let dropped = write_pairs(&[pair("a", "b"), pair("a||x", "b"), pair("c\nd", "e")], &mut buf).unwrap();
        assert_eq!(dropped, 2);
        assert_eq!(buf, b"C0000001||a||b\n");
    }

    #[test]
    fn reads_back() {
        let (p, bad) = read_pairs(&b"C0000001||a||b\n\nC01||x||y\n"[..]).unwrap();
        assert_eq!(p, vec![pair("a", "b")]);
        assert_eq!(bad, 1);
    }
}
