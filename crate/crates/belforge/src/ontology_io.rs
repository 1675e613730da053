//! JSON-lines ontology files and the step statistics file.

use std::io::{self, BufRead, Write};

use belforge_core::ontology::{OntologyRecord, StepStats};

#[derive(Debug, thiserror::Error)]
pub enum OntologyParseError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

/// One JSON object per line with keys `term_id, cui, text, vocab, group`,
/// lines ordered by `term_id`.
pub fn write_ontology<W: Write>(records: &[OntologyRecord], mut w: W) -> io::Result<()> {
    let mut sorted: Vec<&OntologyRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.term_id);
    for r in sorted {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Blank lines are ignored. Any other line that does not hold a valid
/// record, or a `term_id` not greater than the previous one, is fatal.
pub fn parse_ontology<R: BufRead>(r: R) -> Result<Vec<OntologyRecord>, OntologyParseError> {
    let mut out: Vec<OntologyRecord> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| OntologyParseError::Line { line: i + 1, message };
        let rec: OntologyRecord = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        if rec.text.trim().is_empty() {
            return Err(fail("empty text".into()));
        }
        if let Some(prev) = out.last() {
            if rec.term_id <= prev.term_id {
                return Err(fail(format!("term_id {} out of order", rec.term_id)));
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_step_stats<W: Write>(stats: &StepStats, mut w: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, stats)?;
    w.write_all(b"\n")
}

pub fn parse_step_stats(s: &str) -> serde_json::Result<StepStats> {
    serde_json::from_str(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use belforge_core::{Cui, SemanticGroup};

    fn rec(id: u64, text: &str) -> OntologyRecord {
        OntologyRecord {
            term_id: id,
            cui: Cui::new("C0000001").unwrap(),
            text: text.into(),
            vocab: "MDRDUT".into(),
            group: SemanticGroup::Diso,
        }
    }

    #[test]
    fn line_layout() {
        let mut buf = Vec::new();
        write_ontology(&[rec(3, "a|\"b\"")], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"term_id\":3,\"cui\":\"C0000001\",\"text\":\"a|\\\"b\\\"\",\"vocab\":\"MDRDUT\",\"group\":\"DISO\"}\n"
        );
    }

    #[test]
    fn written_in_term_id_order() {
        let mut buf = Vec::new();
        write_ontology(&[rec(2, "b"), rec(1, "a")], &mut buf).unwrap();
        let back = parse_ontology(&buf[..]).unwrap();
        assert_eq!(back, vec![rec(1, "a"), rec(2, "b")]);
    }

    #[test]
    fn bad_line_reports_number() {
        let text = "{\"term_id\":0,\"cui\":\"C0000001\",\"text\":\"x\",\"vocab\":\"V\",\"group\":\"DISO\"}\n\n{oops}\n";
        match parse_ontology(text.as_bytes()) {
            Err(OntologyParseError::Line { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_group_is_rejected() {
        let text = "{\"term_id\":0,\"cui\":\"C0000001\",\"text\":\"x\",\"vocab\":\"V\",\"group\":\"NOPE\"}\n";
        assert!(parse_ontology(text.as_bytes()).is_err());
    }

    #[test]
    fn empty_file() {
        assert!(parse_ontology(&b""[..]).unwrap().is_empty());
    }
}
