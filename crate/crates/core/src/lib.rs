//! Unsupervised, language-independent entity disambiguation.
//!
//! A wiki-style dump is indexed into an immutable [`KnowledgeSnapshot`]
//! (titles, redirects, disambiguation pages, infobox classes, term vectors and
//! per-article link counts). Each pre-marked mention of a document gets
//! candidates from exact title, redirect and disambiguation-page matches.
//! Candidates are weighted by four modules (infobox cues, TF-IDF similarity,
//! first- and second-hop link coherence with the other mentions' candidates),
//! the weights are multiplied, and the best candidate is linked unless it
//! falls below the NIL threshold.
//!
//! ```
//! use nedkit::{DumpRecord, Document, KnowledgeSnapshot, LinkerConfig, ScorerConfig, link_document};
//!
//! let snapshot = KnowledgeSnapshot::from_records(&[
//!     DumpRecord::article("Shiraz", "A city in [[Iran]]."),
//!     DumpRecord::article("Iran", "A country."),
//! ]).unwrap();
//! let doc = Document::new("d1", "Shiraz is in Iran.").mark("Shiraz").mark("Iran");
//! let links = link_document(&doc, &snapshot, &ScorerConfig::default(), &LinkerConfig::default()).unwrap();
//! assert_eq!(links[0].decision_title(), "Shiraz");
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod candidates;
pub mod cli;
pub mod corpus;
pub mod document;
pub mod dump;
pub mod error;
pub mod eval;
pub mod linker;
pub mod links;
pub mod rules;
pub mod scoring;
pub mod snapshot;
pub mod store;
pub mod text;

pub use candidates::{build_context, generate_candidates, CandidateContext};
pub use corpus::{load_corpus, parse_corpus, Corpus, CorpusFormat};
pub use document::{Document, Mention, NIL};
pub use dump::{parse_dump, parse_dump_str, write_dump, DumpRecord, PageKind};
pub use error::{Error, Result};
pub use eval::{evaluate, evaluate_with_workers, Counts, EvalReport};
pub use linker::{
    explain, link_corpus, link_document, ExplainReport, LinkedAnnotation, LinkerConfig,
};
pub use links::{extract_links, Link, LinkList};
pub use rules::{InfoboxRule, InfoboxRules};
pub use scoring::{
    infobox_score, linkgraph_weight, normalize_mention_scores, score_all, textual_score,
    GraphLevel, Module, ScoreVector, ScorerConfig,
};
pub use snapshot::{build_snapshot, BuildOptions, SnapshotData, SnapshotManifest, FORMAT_VERSION};
pub use store::{load_snapshot, Entity, KnowledgeSnapshot};
pub use text::tokenize;

/// Dense article identifier, `0..entity_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
