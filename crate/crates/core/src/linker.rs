//! Top-weight selection, NIL detection and annotation output.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{build_context, DEFAULT_MAX_CANDIDATES};
use crate::document::{Document, Mention, NIL};
use crate::error::{Error, Result};
use crate::scoring::{score_all, Module, ScoreVector, ScorerConfig};
use crate::store::KnowledgeSnapshot;
use crate::EntityId;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkerConfig {
    /// Mentions whose best final weight is below this are tagged NIL.
    pub nil_threshold: f64,
    pub max_candidates: usize,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            nil_threshold: 0.05,
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

impl LinkerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.nil_threshold) {
            return Err(Error::Config(format!(
                "nil_threshold must be in [0, 1], got {}",
                self.nil_threshold
            )));
        }
        if self.max_candidates == 0 {
            return Err(Error::Config("max_candidates must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub entity: EntityId,
    pub title: String,
    pub scores: ScoreVector,
}

/// Descending final weight, then ascending title, then ascending id.
pub fn rank_order(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    b.scores
        .final_weight
        .total_cmp(&a.scores.final_weight)
        .then_with(|| a.title.cmp(&b.title))
        .then_with(|| a.entity.cmp(&b.entity))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkedAnnotation {
    pub doc_id: String,
    pub mention: Mention,
    /// `None` is NIL.
    pub decision: Option<RankedCandidate>,
    /// Final weight of the top candidate; 0 when there were no candidates.
    pub confidence: f64,
    /// Rejected candidates, best first.
    pub ambiguity_list: Vec<RankedCandidate>,
}

impl LinkedAnnotation {
    pub fn is_nil(&self) -> bool {
        self.decision.is_none()
    }

    pub fn decision_id(&self) -> Option<EntityId> {
        self.decision.as_ref().map(|c| c.entity)
    }

    pub fn decision_title(&self) -> &str {
        self.decision.as_ref().map_or(NIL, |c| c.title.as_str())
    }
}

/// Rank scored candidates and apply the NIL threshold.
pub fn decide(
    doc_id: &str,
    mention: Mention,
    mut ranked: Vec<RankedCandidate>,
    nil_threshold: f64,
) -> LinkedAnnotation {
    ranked.sort_by(rank_order);
    let confidence = ranked.first().map_or(0.0, |c| c.scores.final_weight);
    let decision = if ranked
        .first()
        .is_some_and(|c| c.scores.final_weight >= nil_threshold)
    {
        Some(ranked.remove(0))
    } else {
        None
    };
    LinkedAnnotation {
        doc_id: doc_id.to_string(),
        mention,
        decision,
        confidence,
        ambiguity_list: ranked,
    }
}

/// Disambiguate every mention of one document, in mention order.
pub fn link_document(
    document: &Document,
    snapshot: &KnowledgeSnapshot,
    scorer: &ScorerConfig,
    linker: &LinkerConfig,
) -> Result<Vec<LinkedAnnotation>> {
    linker.validate()?;
    let context = build_context(
        &document.text,
        &document.mentions,
        snapshot,
        linker.max_candidates,
    )?;
    let scores = score_all(document, &context, snapshot, scorer)?;

    let mut out = Vec::with_capacity(document.mentions.len());
    for (i, (mention, mention_scores)) in document.mentions.iter().zip(scores).enumerate() {
        let ranked = context
            .candidates(i)
            .iter()
            .zip(mention_scores)
            .map(|(&entity, scores)| {
                Ok(RankedCandidate {
                    entity,
                    title: snapshot.entity(entity)?.title.clone(),
                    scores,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(decide(
            &document.doc_id,
            mention.clone(),
            ranked,
            linker.nil_threshold,
        ));
    }
    Ok(out)
}

/// Link a set of documents on `workers` threads. The output is ordered by
/// (doc_id, mention start, mention end) whatever the worker count.
pub fn link_corpus(
    documents: &[Document],
    snapshot: &KnowledgeSnapshot,
    scorer: &ScorerConfig,
    linker: &LinkerConfig,
    workers: usize,
) -> Result<Vec<LinkedAnnotation>> {
    let run = || -> Result<Vec<Vec<LinkedAnnotation>>> {
        documents
            .par_iter()
            .map(|d| link_document(d, snapshot, scorer, linker))
            .collect()
    };
    let per_doc = if workers <= 1 {
        documents
            .iter()
            .map(|d| link_document(d, snapshot, scorer, linker))
            .collect::<Result<Vec<_>>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?
    };
    let mut all: Vec<LinkedAnnotation> = per_doc.into_iter().flatten().collect();
    all.sort_by(|a, b| {
        (&a.doc_id, a.mention.start, a.mention.end).cmp(&(
            &b.doc_id,
            b.mention.start,
            b.mention.end,
        ))
    });
    Ok(all)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub title: String,
    #[serde(rename = "final")]
    pub final_weight: f64,
    pub weights: BTreeMap<Module, f64>,
}

impl From<&RankedCandidate> for CandidateRecord {
    fn from(c: &RankedCandidate) -> Self {
        CandidateRecord {
            title: c.title.clone(),
            final_weight: c.scores.final_weight,
            weights: c.scores.weights.clone(),
        }
    }
}

/// One line of annotation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    /// Entity title or `NIL`.
    pub decision: String,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambiguity_list: Option<Vec<CandidateRecord>>,
}

impl AnnotationRecord {
    pub fn new(a: &LinkedAnnotation, with_ambiguity: bool) -> Self {
        AnnotationRecord {
            doc_id: a.doc_id.clone(),
            start: a.mention.start,
            end: a.mention.end,
            surface: a.mention.surface.clone(),
            decision: a.decision_title().to_string(),
            confidence: a.confidence,
            ambiguity_list: with_ambiguity
                .then(|| a.ambiguity_list.iter().map(CandidateRecord::from).collect()),
        }
    }
}

/// Line-delimited JSON, one record per annotation.
pub fn write_annotations(annotations: &[LinkedAnnotation], with_ambiguity: bool) -> String {
    let mut out = String::new();
    for a in annotations {
        let rec = AnnotationRecord::new(a, with_ambiguity);
        out.push_str(&serde_json::to_string(&rec).expect("annotation serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainRow {
    pub rank: usize,
    pub chosen: bool,
    #[serde(flatten)]
    pub candidate: CandidateRecord,
}

/// Every candidate of one annotation with its per-module weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainReport {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub decision: String,
    pub nil: bool,
    pub confidence: f64,
    pub rows: Vec<ExplainRow>,
}

pub fn explain(annotation: &LinkedAnnotation) -> ExplainReport {
    let rows = annotation
        .decision
        .iter()
        .map(|c| (true, c))
        .chain(annotation.ambiguity_list.iter().map(|c| (false, c)))
        .enumerate()
        .map(|(i, (chosen, c))| ExplainRow {
            rank: i + 1,
            chosen,
            candidate: c.into(),
        })
        .collect();
    ExplainReport {
        doc_id: annotation.doc_id.clone(),
        start: annotation.mention.start,
        end: annotation.mention.end,
        surface: annotation.mention.surface.clone(),
        decision: annotation.decision_title().to_string(),
        nil: annotation.is_nil(),
        confidence: annotation.confidence,
        rows,
    }
}

impl fmt::Display for ExplainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} [{}..{}] {:?} -> {} (confidence {:.6})",
            self.doc_id, self.start, self.end, self.surface, self.decision, self.confidence
        )?;
        if self.rows.is_empty() {
            return writeln!(f, "  no candidates");
        }
        for row in &self.rows {
            let marker = if row.chosen { "*" } else { " " };
            let weights: Vec<String> = row
                .candidate
                .weights
                .iter()
                .map(|(m, w)| format!("{m}={w:.6}"))
                .collect();
            writeln!(
                f,
                " {marker}{:>3}. {:<30} final={:.6} {}",
                row.rank,
                row.candidate.title,
                row.candidate.final_weight,
                weights.join(" ")
            )?;
        }
        Ok(())
    }
}
