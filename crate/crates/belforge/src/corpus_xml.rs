//! Corpus XML: `<corpus>` holding `<sentence id page>` elements whose text
//! carries inline `<mention cui qid start end target>anchor</mention>`.

use std::collections::BTreeMap;
use std::io::BufRead;

use belforge_core::Cui;
use belforge_core::corpus::{CorpusSlice, MentionAnnotation, SentenceRecord, char_slice};
use quick_xml::escape::{escape, partial_escape, resolve_predefined_entity};
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

#[derive(Debug, thiserror::Error)]
pub enum CorpusXmlError {
    #[error("corpus XML at byte {offset}: {message}")]
    Schema { offset: u64, message: String },
    #[error("cannot serialize sentence {sentence_id}: {message}")]
    Invalid { sentence_id: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const HEADER: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

fn attr_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in escape(s).chars() {
        match c {
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn text_escape(s: &str) -> String {
    partial_escape(s).replace('\r', "&#13;")
}

/// Serializes `slice`. Mentions must lie inside a sentence of the slice,
/// match their span, and not overlap one another.
pub fn render_corpus(slice: &CorpusSlice) -> Result<String, CorpusXmlError> {
    if slice.sentences.is_empty() && slice.mentions.is_empty() {
        return Ok(format!("{HEADER}<corpus/>\n"));
    }
    let mut by_sentence: BTreeMap<u64, Vec<&MentionAnnotation>> = BTreeMap::new();
    for m in &slice.mentions {
        by_sentence.entry(m.sentence_id).or_default().push(m);
    }
    let mut out = String::from(HEADER);
    out.push_str("<corpus>\n");
    for s in &slice.sentences {
        let invalid = |message: &str| CorpusXmlError::Invalid { sentence_id: s.sentence_id, message: message.into() };
        let mut ms = by_sentence.remove(&s.sentence_id).unwrap_or_default();
        ms.sort_by_key(|m| (m.start, m.end));
        out.push_str(&format!(
            "  <sentence id=\"{}\" page=\"{}\">",
            s.sentence_id,
            attr_escape(&s.page_title)
        ));
        let len = s.text.chars().count();
        let mut pos = 0;
        for m in ms {
            if !m.is_consistent_with(s) {
                return Err(invalid("mention span does not match its anchor"));
            }
            if m.start < pos {
                return Err(invalid("overlapping mentions"));
            }
            out.push_str(&text_escape(char_slice(&s.text, pos, m.start).expect("checked span")));
            out.push_str(&format!(
                "<mention cui=\"{}\" qid=\"{}\" start=\"{}\" end=\"{}\" target=\"{}\">{}</mention>",
                m.cui,
                attr_escape(&m.qid),
                m.start,
                m.end,
                attr_escape(&m.target_title),
                text_escape(&m.anchor)
            ));
            pos = m.end;
        }
        out.push_str(&text_escape(char_slice(&s.text, pos, len).expect("in range")));
        out.push_str("</sentence>\n");
    }
    if let Some((id, _)) = by_sentence.into_iter().next() {
        return Err(CorpusXmlError::Invalid { sentence_id: id, message: "mention without sentence".into() });
    }
    out.push_str("</corpus>\n");
    Ok(out)
}

struct OpenMention {
    cui: Cui,
    qid: String,
    start: usize,
    end: usize,
    target: String,
    anchor: String,
    at_char: usize,
}

struct OpenSentence {
    id: u64,
    page: String,
    text: String,
    chars: usize,
    mentions: Vec<MentionAnnotation>,
    mention: Option<OpenMention>,
}

fn attrs(e: &BytesStart<'_>, offset: u64) -> Result<BTreeMap<String, String>, CorpusXmlError> {
    let mut out = BTreeMap::new();
    for a in e.attributes() {
        let a = a.map_err(|err| CorpusXmlError::Schema { offset, message: err.to_string() })?;
        let v = a
            .normalized_value(XmlVersion::Implicit1_0)
            .map_err(|err| CorpusXmlError::Schema { offset, message: err.to_string() })?;
        out.insert(a.key.as_ref().to_string(), v.into_owned());
    }
    Ok(out)
}

/// Parses corpus XML. Any element other than `corpus`, `sentence` and
/// `mention`, text outside sentences, or mention offsets that disagree with
/// the mention's position in the text are fatal.
pub fn parse_corpus<R: BufRead>(source: R) -> Result<CorpusSlice, CorpusXmlError> {
    let mut reader = Reader::from_reader(source);
    reader.config_mut().trim_text(false);
    let mut buf = Vec::new();
    let mut slice = CorpusSlice::default();
    let mut in_corpus = false;
    let mut closed = false;
    let mut sentence: Option<OpenSentence> = None;

    loop {
        buf.clear();
        let ev = match reader.read_event_into(&mut buf) {
            Ok(ev) => ev,
            Err(quick_xml::Error::Io(e)) => return Err(std::io::Error::new(e.kind(), e.to_string()).into()),
            Err(e) => {
                return Err(CorpusXmlError::Schema { offset: reader.error_position(), message: e.to_string() });
            }
        };
        let at = reader.buffer_position();
        let schema = |message: String| CorpusXmlError::Schema { offset: at, message };
        let text_piece: Option<String> = match &ev {
            Event::Text(t) => Some(t.xml10_content().into_owned()),
            Event::CData(t) => Some(t.to_string()),
            Event::GeneralRef(r) => Some(match r.resolve_char_ref().map_err(|e| schema(e.to_string()))? {
                Some(c) => c.to_string(),
                None => resolve_predefined_entity(r)
                    .ok_or_else(|| schema(format!("unknown entity &{};", &**r)))?
                    .to_string(),
            }),
            _ => None,
        };
        if let Some(piece) = text_piece {
            match sentence.as_mut() {
                Some(s) => {
                    s.text.push_str(&piece);
                    s.chars += piece.chars().count();
                    if let Some(m) = s.mention.as_mut() {
                        m.anchor.push_str(&piece);
                    }
                }
                None if piece.trim().is_empty() => {}
                None => return Err(schema("text outside <sentence>".into())),
            }
            continue;
        }
        if !in_corpus {
            match &ev {
                Event::Start(e) | Event::Empty(e) if e.local_name().as_ref() == "corpus" => {
                    in_corpus = true;
                    closed = matches!(ev, Event::Empty(_));
                    continue;
                }
                Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => continue,
                _ => return Err(schema("expected a <corpus> root".into())),
            }
        }
        if closed {
            match ev {
                Event::Eof => return Ok(slice),
                Event::Comment(_) | Event::PI(_) => continue,
                _ => return Err(schema("content after </corpus>".into())),
            }
        }
        match ev {
            Event::Start(e) => {
                let name = e.local_name().as_ref().to_string();
                let a = attrs(&e, at)?;
                match (name.as_str(), sentence.as_mut()) {
                    ("sentence", None) => {
                        let id = a.get("id").and_then(|v| v.parse().ok()).ok_or_else(|| schema("sentence needs a numeric id".into()))?;
                        let page = a.get("page").cloned().ok_or_else(|| schema("sentence needs a page".into()))?;
                        sentence = Some(OpenSentence { id, page, text: String::new(), chars: 0, mentions: Vec::new(), mention: None });
                    }
                    ("mention", Some(s)) if s.mention.is_none() => {
                        let num = |k: &str| a.get(k).and_then(|v| v.parse::<usize>().ok());
                        let cui = a.get("cui").and_then(|c| Cui::new(c).ok()).ok_or_else(|| schema("mention needs a valid cui".into()))?;
                        let (Some(start), Some(end)) = (num("start"), num("end")) else {
                            return Err(schema("mention needs numeric start and end".into()));
                        };
                        s.mention = Some(OpenMention {
                            cui,
                            qid: a.get("qid").cloned().unwrap_or_default(),
                            start,
                            end,
                            target: a.get("target").cloned().unwrap_or_default(),
                            anchor: String::new(),
                            at_char: s.chars,
                        });
                    }
                    _ => return Err(schema(format!("unexpected <{name}>"))),
                }
            }
            Event::Empty(e) => {
                let name = e.local_name().as_ref().to_string();
                if name != "sentence" || sentence.is_some() {
                    return Err(schema(format!("unexpected <{name}/>")));
                }
                let a = attrs(&e, at)?;
                let id = a.get("id").and_then(|v| v.parse().ok()).ok_or_else(|| schema("sentence needs a numeric id".into()))?;
                let page = a.get("page").cloned().ok_or_else(|| schema("sentence needs a page".into()))?;
                slice.sentences.push(SentenceRecord::new(id, page, String::new()));
            }
            Event::End(e) => match e.local_name().as_ref() {
                "mention" => {
                    let s = sentence.as_mut().expect("mention closes inside a sentence");
                    let m = s.mention.take().expect("matched start tag");
                    if m.start != m.at_char || m.end != s.chars || m.start >= m.end {
                        return Err(schema(format!(
                            "mention offsets {}..{} disagree with position {}..{}",
                            m.start, m.end, m.at_char, s.chars
                        )));
                    }
                    s.mentions.push(MentionAnnotation {
                        sentence_id: s.id,
                        start: m.start,
                        end: m.end,
                        anchor: m.anchor,
                        target_title: m.target,
                        cui: m.cui,
                        qid: m.qid,
                    });
                }
                "sentence" => {
                    let s = sentence.take().expect("matched start tag");
                    slice.sentences.push(SentenceRecord::new(s.id, s.page, s.text));
                    slice.mentions.extend(s.mentions);
                }
                _ => closed = true,
            },
            Event::Eof => return Err(schema("missing </corpus>".into())),
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            _ => return Err(schema("unexpected content".into())),
        }
    }
}
