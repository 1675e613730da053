//! Streaming reader for MediaWiki export XML.

use std::io::BufRead;

use belforge_core::corpus::WikiPage;
use quick_xml::Reader;
use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("malformed dump XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Ns,
    Id,
    Text,
    Other,
}

#[derive(Default)]
struct PageBuilder {
    title: Option<String>,
    ns: Option<String>,
    id: Option<String>,
    redirect: Option<String>,
    text: Option<String>,
}

/// Yields the pages of a dump one at a time, in document order.
///
/// Only namespace 0 is yielded unless [`DumpReader::all_namespaces`] is set.
/// Pages without a `<text>` element are skipped and counted. The first XML
/// error ends the iteration.
pub struct DumpReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    all_namespaces: bool,
    done: bool,
    skipped_without_text: usize,
}

impl<R: BufRead> DumpReader<R> {
    pub fn new(source: R) -> Self {
        let mut reader = Reader::from_reader(source);
        reader.config_mut().trim_text(false);
        DumpReader { reader, buf: Vec::new(), all_namespaces: false, done: false, skipped_without_text: 0 }
    }

    pub fn all_namespaces(mut self, yes: bool) -> Self {
        self.all_namespaces = yes;
        self
    }

    pub fn skipped_without_text(&self) -> usize {
        self.skipped_without_text
    }

    fn fail<T>(&mut self, offset: u64, message: impl Into<String>) -> Option<Result<T, DumpError>> {
        self.done = true;
        Some(Err(DumpError::Xml { offset, message: message.into() }))
    }

    fn next_page(&mut self) -> Option<Result<WikiPage, DumpError>> {
        let mut page: Option<PageBuilder> = None;
        // element names below <page>
        let mut path: Vec<String> = Vec::new();
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(e) => e,
                Err(quick_xml::Error::Io(e)) => {
                    self.done = true;
                    return Some(Err(DumpError::Io(std::io::Error::new(e.kind(), e.to_string()))));
                }
                Err(e) => {
                    let at = self.reader.error_position();
                    return self.fail(at, e.to_string());
                }
            };
            let field = |path: &[String]| match path {
                [t] if t == "title" => Field::Title,
                [t] if t == "ns" => Field::Ns,
                [t] if t == "id" => Field::Id,
                [r, t] if r == "revision" && t == "text" => Field::Text,
                _ => Field::Other,
            };
            match event {
                Event::Start(e) => {
                    let name = e.local_name().as_ref().to_string();
                    match page.as_mut() {
                        None if name == "page" => page = Some(PageBuilder::default()),
                        None => {}
                        Some(p) => {
                            if name == "redirect" && path.is_empty() {
                                p.redirect = redirect_title(&e);
                            }
                            path.push(name);
                            if field(&path) == Field::Text {
                                p.text = Some(String::new());
                            }
                        }
                    }
                }
                Event::Empty(e) => {
                    if let Some(p) = page.as_mut() {
                        let name = e.local_name().as_ref().to_string();
                        if name == "redirect" && path.is_empty() {
                            p.redirect = redirect_title(&e);
                        }
                        if name == "text" && path.len() == 1 && path[0] == "revision" {
                            p.text = Some(String::new());
                        }
                    }
                }
                Event::End(e) => {
                    let Some(p) = page.as_mut() else { continue };
                    if path.pop().is_some() {
                        continue;
                    }
                    debug_assert_eq!(e.local_name().as_ref(), "page");
                    let p = std::mem::take(p);
                    page = None;
                    let at = self.reader.buffer_position();
                    match self.finish(p, at) {
                        Ok(Some(wp)) => return Some(Ok(wp)),
                        Ok(None) => {}
                        Err(e) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                    }
                }
                Event::Text(t) => {
                    if let Some(p) = page.as_mut() {
                        append(p, field(&path), &t.xml10_content());
                    }
                }
                Event::CData(t) => {
                    if let Some(p) = page.as_mut() {
                        let s = t.to_string();
                        append(p, field(&path), &s);
                    }
                }
                Event::GeneralRef(r) => {
                    let Some(p) = page.as_mut() else { continue };
                    let resolved = match r.resolve_char_ref() {
                        Ok(Some(c)) => c.to_string(),
                        Ok(None) => match resolve_predefined_entity(&r) {
                            Some(s) => s.to_string(),
                            None => {
                                let msg = format!("unknown entity &{};", &*r);
                                let at = self.reader.buffer_position();
                                return self.fail(at, msg);
                            }
                        },
                        Err(e) => {
                            let msg = e.to_string();
                            let at = self.reader.buffer_position();
                            return self.fail(at, msg);
                        }
                    };
                    append(p, field(&path), &resolved);
                }
                Event::Eof => {
                    self.done = true;
                    if page.is_some() {
                        let at = self.reader.buffer_position();
                        return self.fail(at, "document ends inside <page>");
                    }
                    return None;
                }
                _ => {}
            }
        }
    }

    fn finish(&mut self, p: PageBuilder, at: u64) -> Result<Option<WikiPage>, DumpError> {
        let bad = |m: &str| DumpError::Xml { offset: at, message: m.to_string() };
        let namespace = match p.ns.as_deref().map(str::trim) {
            None => 0,
            Some(s) => s.parse().map_err(|_| bad("<ns> is not an integer"))?,
        };
        let page_id = p
            .id
            .as_deref()
            .ok_or_else(|| bad("page without <id>"))?
            .trim()
            .parse()
            .map_err(|_| bad("<id> is not an integer"))?;
        let title = p.title.ok_or_else(|| bad("page without <title>"))?;
        let Some(wikitext) = p.text else {
            self.skipped_without_text += 1;
            return Ok(None);
        };
        if namespace != 0 && !self.all_namespaces {
            return Ok(None);
        }
        Ok(Some(WikiPage { page_id, title, namespace, wikitext, redirect: p.redirect }))
    }
}

fn redirect_title(e: &BytesStart<'_>) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.as_ref() == "title")
        .and_then(|a| a.normalized_value(quick_xml::XmlVersion::Implicit1_0).ok().map(|v| v.into_owned()))
}

fn append(p: &mut PageBuilder, field: Field, s: &str) {
    let slot = match field {
        Field::Title => &mut p.title,
        Field::Ns => &mut p.ns,
        Field::Id => &mut p.id,
        Field::Text => &mut p.text,
        Field::Other => return,
    };
    slot.get_or_insert_with(String::new).push_str(s);
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<WikiPage, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        self.next_page()
    }
}
