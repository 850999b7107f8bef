//! Building and (de)serializing knowledge snapshots.
//!
//! File layout, all UTF-8:
//!
//! ```text
//! nedkit-snapshot
//! version 1
//! sha256 <hex digest of the payload>
//! <JSON payload>
//! ```
//!
//! The payload is fully ordered (entities in dump order, maps sorted by key),
//! so identical dumps produce byte-identical files.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dump::{check_unique_titles, DumpRecord, PageKind};
use crate::error::{Error, Result};
use crate::links::{extract_links, render_plain_text, LinkList, TitleResolver};
use crate::text::{case_fold, tokenize};
use crate::EntityId;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "nedkit-snapshot";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub format_version: u32,
    pub entity_count: usize,
    pub redirect_count: usize,
    pub disambig_count: usize,
    pub vocabulary_size: usize,
    /// Seconds since the Unix epoch; supplied by the caller so builds stay
    /// reproducible.
    pub build_timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub title: String,
    pub infobox_type: Option<String>,
    /// Raw term frequencies of the article's visible text, sorted by term.
    pub terms: Vec<(String, u32)>,
    pub links: LinkList,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisambigEntry {
    pub title: String,
    pub targets: Vec<EntityId>,
}

/// The serialized form of a knowledge snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotData {
    pub manifest: SnapshotManifest,
    pub entities: Vec<EntityRecord>,
    /// Redirect title → final article, sorted by title.
    pub redirects: Vec<(String, EntityId)>,
    /// Sorted by title.
    pub disambiguations: Vec<DisambigEntry>,
    /// Number of articles containing each term, sorted by term.
    pub doc_freq: Vec<(String, u32)>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    pub build_timestamp: u64,
}

fn term_frequencies(body: &str) -> Vec<(String, u32)> {
    let mut tf: BTreeMap<String, u32> = BTreeMap::new();
    for tok in tokenize(&render_plain_text(body)) {
        *tf.entry(tok).or_default() += 1;
    }
    tf.into_iter().collect()
}

/// Index a list of dump records.
pub fn build_snapshot(records: &[DumpRecord], opts: BuildOptions) -> Result<SnapshotData> {
    for r in records {
        r.validate()?;
    }
    check_unique_titles(records)?;

    let mut article_ids = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        if r.kind == PageKind::Article {
            let id = EntityId(article_ids.len() as u32);
            article_ids.insert(i, id);
        }
    }
    let resolver = TitleResolver::new(records, &article_ids)?;

    let mut entities = Vec::with_capacity(article_ids.len());
    let mut df: BTreeMap<String, u32> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if r.kind != PageKind::Article {
            continue;
        }
        let id = article_ids[&i];
        let terms = term_frequencies(&r.body);
        for (t, _) in &terms {
            *df.entry(t.clone()).or_default() += 1;
        }
        entities.push(EntityRecord {
            title: r.title.clone(),
            infobox_type: r.infobox_type.clone(),
            terms,
            links: extract_links(&r.body, &resolver, Some(id)),
        });
    }

    let mut redirects: Vec<(String, EntityId)> = records
        .iter()
        .filter(|r| r.kind == PageKind::Redirect)
        .filter_map(|r| {
            resolver
                .redirects()
                .get(&case_fold(&r.title))
                .map(|&id| (r.title.clone(), id))
        })
        .collect();
    redirects.sort();

    let mut disambiguations = Vec::new();
    let mut seen_disambig = HashSet::new();
    for r in records
        .iter()
        .filter(|r| r.kind == PageKind::Disambiguation)
    {
        if !seen_disambig.insert(case_fold(&r.title)) {
            return Err(Error::Conflict(format!(
                "disambiguation page {:?} collides with another after case folding",
                r.title
            )));
        }
        let mut targets = Vec::new();
        for t in &r.disambig_targets {
            match resolver.resolve(t) {
                Some(id) if !targets.contains(&id) => targets.push(id),
                Some(_) => {}
                None => log::warn!(
                    "disambiguation page {:?} lists unknown title {t:?}; dropped",
                    r.title
                ),
            }
        }
        disambiguations.push(DisambigEntry {
            title: r.title.clone(),
            targets,
        });
    }
    disambiguations.sort_by(|a, b| a.title.cmp(&b.title));

    let manifest = SnapshotManifest {
        format_version: FORMAT_VERSION,
        entity_count: entities.len(),
        redirect_count: redirects.len(),
        disambig_count: disambiguations.len(),
        vocabulary_size: df.len(),
        build_timestamp: opts.build_timestamp,
    };
    Ok(SnapshotData {
        manifest,
        entities,
        redirects,
        disambiguations,
        doc_freq: df.into_iter().collect(),
    })
}

impl SnapshotData {
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = serde_json::to_vec(self).expect("snapshot payload serializes");
        let digest = hex::encode(Sha256::digest(&payload));
        let mut out = format!("{MAGIC}\nversion {FORMAT_VERSION}\nsha256 {digest}\n").into_bytes();
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rest = bytes;
        let mut header = |what: &str| -> Result<String> {
            let nl = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| Error::Corrupt(format!("truncated header: missing {what}")))?;
            let line = std::str::from_utf8(&rest[..nl])
                .map_err(|_| Error::Corrupt(format!("{what} line is not UTF-8")))?
                .to_string();
            rest = &rest[nl + 1..];
            Ok(line)
        };

        if header("magic")? != MAGIC {
            return Err(Error::Corrupt("not a snapshot file".into()));
        }
        let version = header("version")?;
        let version: u32 = version
            .strip_prefix("version ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Corrupt(format!("bad version line {version:?}")))?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let sum = header("checksum")?;
        let expected = sum
            .strip_prefix("sha256 ")
            .ok_or_else(|| Error::Corrupt(format!("bad checksum line {sum:?}")))?
            .to_string();
        let payload = rest;
        if hex::encode(Sha256::digest(payload)) != expected {
            return Err(Error::Corrupt("checksum mismatch".into()));
        }
        let data: SnapshotData =
            serde_json::from_slice(payload).map_err(|e| Error::Corrupt(format!("payload: {e}")))?;
        if data.manifest.format_version != version {
            return Err(Error::Corrupt(
                "manifest version disagrees with header".into(),
            ));
        }
        data.check()?;
        Ok(data)
    }

    /// Structural consistency between manifest and sections.
    pub fn check(&self) -> Result<()> {
        let m = &self.manifest;
        let n = self.entities.len();
        let bad = |msg: String| Err(Error::Corrupt(msg));
        if m.entity_count != n
            || m.redirect_count != self.redirects.len()
            || m.disambig_count != self.disambiguations.len()
            || m.vocabulary_size != self.doc_freq.len()
        {
            return bad("manifest counts disagree with sections".into());
        }
        for (i, e) in self.entities.iter().enumerate() {
            if let Err(msg) = e.links.check(n) {
                return bad(format!("entity {i}: {msg}"));
            }
        }
        let in_range = |id: &EntityId| id.index() < n;
        if !self.redirects.iter().all(|(_, id)| in_range(id)) {
            return bad("redirect target out of range".into());
        }
        if !self
            .disambiguations
            .iter()
            .all(|d| d.targets.iter().all(in_range))
        {
            return bad("disambiguation target out of range".into());
        }
        if self
            .doc_freq
            .iter()
            .any(|(_, c)| *c as usize > n || *c == 0)
        {
            return bad("document frequency out of range".into());
        }
        Ok(())
    }

    /// Write to `path` through a temporary file in the same directory and a
    /// rename, so readers never observe a partial snapshot.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(&self.to_bytes())
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
        Ok(())
    }
}
