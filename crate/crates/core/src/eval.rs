//! Micro precision / recall / F1 over linked mentions.
//!
//! Per mention, with gold `g` and prediction `p`:
//!
//! | prediction      | gold entity = p | gold other entity | gold NIL |
//! |-----------------|-----------------|-------------------|----------|
//! | entity `p`      | tp              | fp + fn           | fp       |
//! | NIL             | fn              | fn                | ignored  |

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linker::{link_corpus, LinkerConfig};
use crate::scoring::ScorerConfig;
use crate::store::KnowledgeSnapshot;
use crate::EntityId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn record(&mut self, gold: Option<EntityId>, predicted: Option<EntityId>) {
        match (predicted, gold) {
            (Some(p), Some(g)) if p == g => self.tp += 1,
            (Some(_), Some(_)) => {
                self.fp += 1;
                self.fn_ += 1;
            }
            (Some(_), None) => self.fp += 1,
            (None, Some(_)) => self.fn_ += 1,
            (None, None) => {}
        }
    }

    /// tp / (tp + fp), or 1 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// tp / (tp + fn), or 1 when nothing was linkable.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentCounts {
    pub doc_id: String,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub documents: usize,
    pub mentions: usize,
    #[serde(flatten)]
    pub counts: Counts,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub per_document: Vec<DocumentCounts>,
}

impl EvalReport {
    pub fn from_documents(per_document: Vec<DocumentCounts>, mentions: usize) -> Self {
        let counts = per_document
            .iter()
            .fold(Counts::default(), |acc, d| acc + d.counts);
        EvalReport {
            documents: per_document.len(),
            mentions,
            counts,
            micro_precision: counts.precision(),
            micro_recall: counts.recall(),
            micro_f1: counts.f1(),
            per_document,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents        {}", self.documents)?;
        writeln!(f, "mentions         {}", self.mentions)?;
        writeln!(f, "tp               {}", self.counts.tp)?;
        writeln!(f, "fp               {}", self.counts.fp)?;
        writeln!(f, "fn               {}", self.counts.fn_)?;
        writeln!(f, "micro_precision  {:.4}", self.micro_precision)?;
        writeln!(f, "micro_recall     {:.4}", self.micro_recall)?;
        writeln!(f, "micro_f1         {:.4}", self.micro_f1)
    }
}

/// Compare predictions against resolved gold ids, both indexed
/// `[document][mention]`.
pub fn score_predictions(
    corpus: &Corpus,
    gold: &[Vec<Option<EntityId>>],
    predicted: &[Vec<Option<EntityId>>],
) -> Result<EvalReport> {
    if gold.len() != corpus.documents.len() || predicted.len() != corpus.documents.len() {
        return Err(Error::Contract(
            "gold/prediction shape does not match corpus".into(),
        ));
    }
    let mut per_document = Vec::with_capacity(corpus.documents.len());
    for ((doc, g), p) in corpus.documents.iter().zip(gold).zip(predicted) {
        if g.len() != doc.mentions.len() || p.len() != doc.mentions.len() {
            return Err(Error::Contract(format!(
                "gold/prediction shape does not match document {:?}",
                doc.doc_id
            )));
        }
        let mut counts = Counts::default();
        for (&g, &p) in g.iter().zip(p) {
            counts.record(g, p);
        }
        per_document.push(DocumentCounts {
            doc_id: doc.doc_id.clone(),
            counts,
        });
    }
    Ok(EvalReport::from_documents(
        per_document,
        corpus.mention_count(),
    ))
}

/// Link every document of the corpus and score it against its gold titles.
pub fn evaluate(
    corpus: &Corpus,
    snapshot: &KnowledgeSnapshot,
    scorer: &ScorerConfig,
    linker: &LinkerConfig,
) -> Result<EvalReport> {
    evaluate_with_workers(corpus, snapshot, scorer, linker, 1)
}

pub fn evaluate_with_workers(
    corpus: &Corpus,
    snapshot: &KnowledgeSnapshot,
    scorer: &ScorerConfig,
    linker: &LinkerConfig,
    workers: usize,
) -> Result<EvalReport> {
    let gold = corpus.resolve_gold(snapshot);
    let annotations = link_corpus(&corpus.documents, snapshot, scorer, linker, workers)?;

    let mut predicted: Vec<Vec<Option<EntityId>>> = corpus
        .documents
        .iter()
        .map(|d| vec![None; d.mentions.len()])
        .collect();
    // annotations come back sorted by (doc_id, start, end); map them back to
    // corpus positions, consuming duplicates of the same span in order
    type Span<'a> = (&'a str, usize, usize);
    let mut slots: std::collections::HashMap<Span, Vec<(usize, usize)>> =
        std::collections::HashMap::new();
    for (di, d) in corpus.documents.iter().enumerate() {
        for (mi, m) in d.mentions.iter().enumerate().rev() {
            slots
                .entry((d.doc_id.as_str(), m.start, m.end))
                .or_default()
                .push((di, mi));
        }
    }
    for a in &annotations {
        let key = (a.doc_id.as_str(), a.mention.start, a.mention.end);
        let (di, mi) = slots
            .get_mut(&key)
            .and_then(Vec::pop)
            .ok_or_else(|| Error::Contract("annotation without a corpus mention".into()))?;
        predicted[di][mi] = a.decision_id();
    }
    score_predictions(corpus, &gold, &predicted)
}
