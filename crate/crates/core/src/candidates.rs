//! Candidate generation from titles, redirects and disambiguation pages.

use std::collections::{BTreeSet, HashMap};

use crate::document::Mention;
use crate::error::{Error, Result};
use crate::store::KnowledgeSnapshot;
use crate::EntityId;

pub const DEFAULT_MAX_CANDIDATES: usize = 64;

/// Candidates for one surface string: the direct title/redirect match first,
/// then the targets of a same-titled disambiguation page in page order.
/// Duplicates are removed and at most `max` ids are kept.
pub fn generate_candidates(
    surface: &str,
    snapshot: &KnowledgeSnapshot,
    max: usize,
) -> Vec<EntityId> {
    let mut out = Vec::new();
    let direct = snapshot.resolve_title(surface);
    let listed = snapshot.disambiguation_targets(surface).iter().copied();
    for id in direct.into_iter().chain(listed) {
        if out.len() == max {
            break;
        }
        if !out.contains(&id) {
            out.push(id);
        }
    }
    out
}

/// The candidate sets of every mention of one document, and their union.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateContext {
    per_mention: Vec<Vec<EntityId>>,
    /// How many mentions list each candidate.
    membership: HashMap<EntityId, usize>,
    cl: BTreeSet<EntityId>,
}

impl CandidateContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a mention's candidate set; returns the mention's index.
    pub fn push_mention(&mut self, candidates: Vec<EntityId>) -> usize {
        let mut set = Vec::with_capacity(candidates.len());
        for id in candidates {
            if !set.contains(&id) {
                set.push(id);
            }
        }
        for &id in &set {
            *self.membership.entry(id).or_default() += 1;
            self.cl.insert(id);
        }
        self.per_mention.push(set);
        self.per_mention.len() - 1
    }

    pub fn mention_count(&self) -> usize {
        self.per_mention.len()
    }

    pub fn candidates(&self, mention: usize) -> &[EntityId] {
        &self.per_mention[mention]
    }

    pub fn per_mention(&self) -> &[Vec<EntityId>] {
        &self.per_mention
    }

    /// The document-wide candidate list.
    pub fn cl(&self) -> &BTreeSet<EntityId> {
        &self.cl
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.cl.contains(&id)
    }

    /// Whether a link from a candidate of `mention` to `target` counts as
    /// coherence evidence. With `intra_mention_edges` off, a target only
    /// counts if some *other* mention lists it.
    pub fn is_evidence(&self, mention: usize, target: EntityId, intra_mention_edges: bool) -> bool {
        let Some(&n) = self.membership.get(&target) else {
            return false;
        };
        if intra_mention_edges {
            return true;
        }
        let own = usize::from(self.per_mention[mention].contains(&target));
        n > own
    }
}

/// Generate candidates for every mention of a document.
pub fn build_context(
    text: &str,
    mentions: &[Mention],
    snapshot: &KnowledgeSnapshot,
    max_candidates: usize,
) -> Result<CandidateContext> {
    let mut ctx = CandidateContext::new();
    for m in mentions {
        m.validate(text)?;
        ctx.push_mention(generate_candidates(&m.surface, snapshot, max_candidates));
    }
    if ctx
        .per_mention
        .iter()
        .flatten()
        .any(|id| id.index() >= snapshot.entity_count())
    {
        return Err(Error::Contract("candidate id outside snapshot".into()));
    }
    Ok(ctx)
}
