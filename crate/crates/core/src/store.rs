//! In-memory, read-only view of a knowledge snapshot.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::dump::DumpRecord;
use crate::error::{Error, Result};
use crate::links::LinkList;
use crate::snapshot::{build_snapshot, BuildOptions, SnapshotData, SnapshotManifest};
use crate::text::case_fold;
use crate::EntityId;

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: EntityId,
    pub title: String,
    pub infobox_type: Option<String>,
    pub term_vector: HashMap<String, u32>,
    pub llc1: LinkList,
}

/// Immutable entity index. Safe to share between threads; the only interior
/// state is the per-entity second-hop link cache, which is filled at most
/// once per entity.
#[derive(Debug)]
pub struct KnowledgeSnapshot {
    manifest: SnapshotManifest,
    entities: Vec<Entity>,
    title_index: HashMap<String, EntityId>,
    redirects: HashMap<String, EntityId>,
    disambig: HashMap<String, Vec<EntityId>>,
    doc_freq: HashMap<String, u32>,
    llc2_cache: Vec<OnceLock<LinkList>>,
}

/// Read and index a snapshot file.
pub fn load_snapshot(path: impl AsRef<Path>) -> Result<KnowledgeSnapshot> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    KnowledgeSnapshot::from_data(SnapshotData::from_bytes(&bytes)?)
}

impl KnowledgeSnapshot {
    pub fn from_data(data: SnapshotData) -> Result<Self> {
        data.check()?;
        let SnapshotData {
            manifest,
            entities,
            redirects,
            disambiguations,
            doc_freq,
        } = data;

        let entities: Vec<Entity> = entities
            .into_iter()
            .enumerate()
            .map(|(i, e)| Entity {
                id: EntityId(i as u32),
                title: e.title,
                infobox_type: e.infobox_type,
                term_vector: e.terms.into_iter().collect(),
                llc1: e.links,
            })
            .collect();

        let mut title_index = HashMap::with_capacity(entities.len());
        for e in &entities {
            if title_index.insert(case_fold(&e.title), e.id).is_some() {
                return Err(Error::Corrupt(format!("duplicate title {:?}", e.title)));
            }
        }
        let redirects = redirects
            .into_iter()
            .map(|(t, id)| (case_fold(&t), id))
            .collect();
        let disambig = disambiguations
            .into_iter()
            .map(|d| (case_fold(&d.title), d.targets))
            .collect();
        let llc2_cache = (0..entities.len()).map(|_| OnceLock::new()).collect();

        Ok(KnowledgeSnapshot {
            manifest,
            entities,
            title_index,
            redirects,
            disambig,
            doc_freq: doc_freq.into_iter().collect(),
            llc2_cache,
        })
    }

    /// Build in memory, skipping the file round trip.
    pub fn from_records(records: &[DumpRecord]) -> Result<Self> {
        Self::from_data(build_snapshot(records, BuildOptions::default())?)
    }

    pub fn manifest(&self) -> &SnapshotManifest {
        &self.manifest
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity(&self, id: EntityId) -> Result<&Entity> {
        self.entities.get(id.index()).ok_or_else(|| {
            Error::Contract(format!(
                "entity id {id} out of range (snapshot has {})",
                self.entities.len()
            ))
        })
    }

    pub fn title(&self, id: EntityId) -> Option<&str> {
        self.entities.get(id.index()).map(|e| e.title.as_str())
    }

    /// Case-folded exact article title, else a redirect title.
    pub fn resolve_title(&self, surface: &str) -> Option<EntityId> {
        let key = case_fold(surface.trim());
        self.title_index
            .get(&key)
            .or_else(|| self.redirects.get(&key))
            .copied()
    }

    /// Targets of the disambiguation page whose case-folded title equals the
    /// case-folded surface, in page order.
    pub fn disambiguation_targets(&self, surface: &str) -> &[EntityId] {
        self.disambig
            .get(&case_fold(surface.trim()))
            .map_or(&[], Vec::as_slice)
    }

    pub fn llc1(&self, id: EntityId) -> Result<&LinkList> {
        Ok(&self.entity(id)?.llc1)
    }

    /// First-hop links merged with the first-hop links of every direct link
    /// target. Counts of repeated targets are summed; the entity itself is
    /// never a target. Computed on first use and cached.
    pub fn llc2(&self, id: EntityId) -> Result<&LinkList> {
        let first = self.llc1(id)?;
        Ok(self.llc2_cache[id.index()].get_or_init(|| {
            let mut merged = first.clone();
            for hop in first.iter() {
                for link in self.entities[hop.target.index()].llc1.iter() {
                    if link.target != id {
                        merged.add(link.target, link.count);
                    }
                }
            }
            merged
        }))
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    /// `ln(1 + N / (1 + df))`, with N the number of articles.
    pub fn idf(&self, term: &str) -> f64 {
        smoothed_idf(self.entities.len(), self.doc_freq(term))
    }
}

pub(crate) fn smoothed_idf(n: usize, df: u32) -> f64 {
    (1.0 + n as f64 / (1.0 + f64::from(df))).ln()
}
