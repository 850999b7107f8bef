//! Gold-annotated corpora.
//!
//! Two input formats are supported.
//!
//! **Native**: JSON Lines, one document per line. Offsets are byte offsets
//! into `text`; `gold` is an entity title, `"NIL"`, or absent.
//!
//! ```text
//! {"doc_id":"d1","text":"Saadi was born in Shiraz.","mentions":[{"start":0,"end":5,"surface":"Saadi","gold":"Saadi"}]}
//! ```
//!
//! **NIF subset**: N-Triples using these NIF Core / ITS properties (matched by
//! local name): `isString`, `beginIndex`, `endIndex`, `anchorOf`,
//! `referenceContext` and `taIdentRef`. Any other predicate is ignored. A
//! subject with `isString` is a document; a subject with `referenceContext` is
//! a mention of that document. Indices count Unicode characters. The gold
//! title is the last path segment of the `taIdentRef` IRI, percent-decoded,
//! with underscores read as spaces.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::str::FromStr;

use percent_encoding::percent_decode_str;

use crate::document::{Document, Mention, NIL};
use crate::error::{Error, Result};
use crate::store::KnowledgeSnapshot;
use crate::EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Native,
    Nif,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "native" => Ok(CorpusFormat::Native),
            "nif" | "nif_subset" => Ok(CorpusFormat::Nif),
            other => Err(format!(
                "unknown corpus format {other:?} (expected native or nif)"
            )),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        for d in &documents {
            if !seen.insert(d.doc_id.as_str()) {
                return Err(Error::Input(format!("duplicate doc_id {:?}", d.doc_id)));
            }
            d.validate()?;
        }
        Ok(Corpus { documents })
    }

    pub fn mention_count(&self) -> usize {
        self.documents.iter().map(|d| d.mentions.len()).sum()
    }

    /// Resolve every gold title against the snapshot, indexed
    /// `[document][mention]`. Unresolvable titles are logged and read as NIL.
    pub fn resolve_gold(&self, snapshot: &KnowledgeSnapshot) -> Vec<Vec<Option<EntityId>>> {
        self.documents
            .iter()
            .map(|d| {
                d.mentions
                    .iter()
                    .map(|m| {
                        if m.gold_is_nil() {
                            return None;
                        }
                        let gold = m.gold.as_deref().unwrap_or(NIL);
                        let id = snapshot.resolve_title(gold);
                        if id.is_none() {
                            log::warn!(
                                "document {:?}: gold title {gold:?} not in snapshot; counted as NIL",
                                d.doc_id
                            );
                        }
                        id
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, format)
}

pub fn parse_corpus(text: &str, format: CorpusFormat) -> Result<Corpus> {
    match format {
        CorpusFormat::Native => parse_native(text),
        CorpusFormat::Nif => parse_nif(text),
    }
}

pub fn parse_native(text: &str) -> Result<Corpus> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        doc.validate().map_err(|e| match e {
            Error::Input(msg) => Error::parse(i + 1, msg),
            other => other,
        })?;
        docs.push(doc);
    }
    Corpus::new(docs)
}

/// Serialize a corpus in the native format.
pub fn write_native(corpus: &Corpus) -> String {
    let mut out = String::new();
    for d in &corpus.documents {
        out.push_str(&serde_json::to_string(d).expect("document serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Term {
    Iri(String),
    Blank(String),
    Literal(String),
}

impl Term {
    fn node_id(&self) -> Option<&str> {
        match self {
            Term::Iri(s) | Term::Blank(s) => Some(s),
            Term::Literal(_) => None,
        }
    }
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, msg)
    }

    fn skip_ws(&mut self) {
        let rest = &self.s[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.s[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn iri(&mut self) -> Result<String> {
        // at '<'
        self.bump();
        let rest = &self.s[self.pos..];
        let close = rest.find('>').ok_or_else(|| self.err("unterminated IRI"))?;
        let iri = rest[..close].to_string();
        self.pos += close + 1;
        Ok(iri)
    }

    fn blank(&mut self) -> Result<String> {
        let rest = &self.s[self.pos..];
        let len = rest.find(|c: char| c.is_whitespace()).unwrap_or(rest.len());
        if len <= 2 {
            return Err(self.err("empty blank node label"));
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char> {
        let rest = &self.s[self.pos..];
        let hex = rest
            .get(..digits)
            .ok_or_else(|| self.err("truncated \\u escape"))?;
        let code = u32::from_str_radix(hex, 16).map_err(|_| self.err("bad \\u escape"))?;
        self.pos += digits;
        char::from_u32(code).ok_or_else(|| self.err("escape is not a Unicode scalar"))
    }

    fn literal(&mut self) -> Result<String> {
        // at '"'
        self.bump();
        let mut out = String::new();
        loop {
            match self
                .bump()
                .ok_or_else(|| self.err("unterminated literal"))?
            {
                '"' => break,
                '\\' => {
                    let c = match self.bump().ok_or_else(|| self.err("dangling escape"))? {
                        't' => '\t',
                        'b' => '\u{8}',
                        'n' => '\n',
                        'r' => '\r',
                        'f' => '\u{c}',
                        '"' => '"',
                        '\'' => '\'',
                        '\\' => '\\',
                        'u' => self.hex_escape(4)?,
                        'U' => self.hex_escape(8)?,
                        other => return Err(self.err(format!("unknown escape \\{other}"))),
                    };
                    out.push(c);
                }
                c => out.push(c),
            }
        }
        // optional datatype or language tag
        if self.s[self.pos..].starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(self.err("datatype must be an IRI"));
            }
            self.iri()?;
        } else if self.peek() == Some('@') {
            let rest = &self.s[self.pos..];
            let len = rest
                .find(|c: char| c.is_whitespace() || c == '.')
                .unwrap_or(rest.len());
            self.pos += len;
        }
        Ok(out)
    }

    fn term(&mut self, allow_literal: bool) -> Result<Term> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') if self.s[self.pos..].starts_with("_:") => Ok(Term::Blank(self.blank()?)),
            Some('"') if allow_literal => Ok(Term::Literal(self.literal()?)),
            Some(c) => Err(self.err(format!("unexpected character {c:?}"))),
            None => Err(self.err("unexpected end of line")),
        }
    }
}

fn parse_triple(line: &str, lineno: usize) -> Result<(String, String, Term)> {
    let mut cur = Cursor {
        s: line,
        pos: 0,
        line: lineno,
    };
    let subject = cur
        .term(false)?
        .node_id()
        .map(str::to_string)
        .ok_or_else(|| cur.err("subject must be an IRI or blank node"))?;
    let predicate = match cur.term(false)? {
        Term::Iri(p) => p,
        _ => return Err(cur.err("predicate must be an IRI")),
    };
    let object = cur.term(true)?;
    cur.skip_ws();
    if cur.bump() != Some('.') {
        return Err(cur.err("missing terminating '.'"));
    }
    cur.skip_ws();
    if cur.peek().is_some_and(|c| c != '#') {
        return Err(cur.err("trailing content after '.'"));
    }
    Ok((subject, predicate, object))
}

fn local_name(iri: &str) -> &str {
    iri.rsplit(['#', '/']).next().unwrap_or(iri)
}

/// Gold title encoded by an entity IRI such as
/// `http://dbpedia.org/resource/Saadi_Shirazi`.
pub fn title_from_iri(iri: &str) -> String {
    let segment = iri.trim_end_matches('/').rsplit('/').next().unwrap_or(iri);
    percent_decode_str(segment)
        .decode_utf8_lossy()
        .replace('_', " ")
}

#[derive(Default)]
struct NifNode {
    first_line: usize,
    is_string: Option<String>,
    begin: Option<(usize, usize)>,
    end: Option<(usize, usize)>,
    anchor: Option<String>,
    context: Option<String>,
    ident: Option<String>,
}

fn char_to_byte(text: &str, idx: usize) -> Option<usize> {
    if idx == 0 {
        return Some(0);
    }
    text.char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()))
        .nth(idx)
}

pub fn parse_nif(text: &str) -> Result<Corpus> {
    let mut order: Vec<String> = Vec::new();
    let mut nodes: HashMap<String, NifNode> = HashMap::new();

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (subject, predicate, object) = parse_triple(trimmed, lineno)?;
        let node = nodes.entry(subject.clone()).or_insert_with(|| {
            order.push(subject.clone());
            NifNode {
                first_line: lineno,
                ..Default::default()
            }
        });
        let literal = |o: &Term| match o {
            Term::Literal(s) => Ok(s.clone()),
            _ => Err(Error::parse(
                lineno,
                format!("{} expects a literal", local_name(&predicate)),
            )),
        };
        let index = |o: &Term| -> Result<(usize, usize)> {
            let s = literal(o)?;
            s.trim()
                .parse()
                .map(|v| (v, lineno))
                .map_err(|_| Error::parse(lineno, format!("bad index {s:?}")))
        };
        match local_name(&predicate) {
            "isString" => node.is_string = Some(literal(&object)?),
            "beginIndex" => node.begin = Some(index(&object)?),
            "endIndex" => node.end = Some(index(&object)?),
            "anchorOf" => node.anchor = Some(literal(&object)?),
            "referenceContext" => {
                node.context = Some(
                    object
                        .node_id()
                        .ok_or_else(|| Error::parse(lineno, "referenceContext expects a node"))?
                        .to_string(),
                )
            }
            "taIdentRef" => {
                node.ident = Some(
                    object
                        .node_id()
                        .ok_or_else(|| Error::parse(lineno, "taIdentRef expects an IRI"))?
                        .to_string(),
                )
            }
            _ => {}
        }
    }

    let mut docs: Vec<Document> = Vec::new();
    let mut doc_index: HashMap<&str, usize> = HashMap::new();
    for id in &order {
        if let Some(text) = &nodes[id].is_string {
            doc_index.insert(id, docs.len());
            docs.push(Document::new(id.clone(), text.clone()));
        }
    }

    for id in &order {
        let node = &nodes[id];
        if node.is_string.is_some() {
            continue;
        }
        let Some(ctx) = &node.context else { continue };
        let line = node.first_line;
        let &d = doc_index
            .get(ctx.as_str())
            .ok_or_else(|| Error::parse(line, format!("unknown referenceContext {ctx:?}")))?;
        let (begin, _) = node
            .begin
            .ok_or_else(|| Error::parse(line, format!("mention {id:?} has no beginIndex")))?;
        let (end, end_line) = node
            .end
            .ok_or_else(|| Error::parse(line, format!("mention {id:?} has no endIndex")))?;
        if end <= begin {
            return Err(Error::parse(
                end_line,
                format!("mention {id:?}: endIndex {end} is not after beginIndex {begin}"),
            ));
        }
        let doc = &mut docs[d];
        let (Some(start), Some(stop)) =
            (char_to_byte(&doc.text, begin), char_to_byte(&doc.text, end))
        else {
            return Err(Error::parse(
                end_line,
                format!("mention {id:?}: indices {begin}..{end} exceed the context length"),
            ));
        };
        let surface = doc.text[start..stop].to_string();
        if let Some(anchor) = &node.anchor {
            if *anchor != surface {
                return Err(Error::parse(
                    line,
                    format!("mention {id:?}: anchorOf {anchor:?} does not match context text {surface:?}"),
                ));
            }
        }
        let gold = node
            .ident
            .as_deref()
            .map_or(NIL.to_string(), title_from_iri);
        doc.mentions
            .push(Mention::new(start, stop, surface).with_gold(gold));
    }
    for doc in &mut docs {
        doc.mentions.sort_by_key(|m| (m.start, m.end));
    }
    Corpus::new(docs)
}
