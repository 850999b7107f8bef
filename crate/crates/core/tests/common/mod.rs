//! Shared fixtures and brute-force oracles for the integration tests.
//!
//! The oracles work on titles and raw dump text only. They never call into
//! the crate's link scanner, resolver or store.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use nedkit::{Document, DumpRecord, KnowledgeSnapshot, Mention, PageKind};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn saadi_records() -> Vec<DumpRecord> {
    nedkit::parse_dump_str(&read_fixture("saadi.dump")).unwrap()
}

pub fn saadi_snapshot() -> KnowledgeSnapshot {
    KnowledgeSnapshot::from_records(&saadi_records()).unwrap()
}

pub fn level2_snapshot() -> KnowledgeSnapshot {
    KnowledgeSnapshot::from_records(&nedkit::parse_dump_str(&read_fixture("level2.dump")).unwrap())
        .unwrap()
}

pub fn id_of(s: &KnowledgeSnapshot, title: &str) -> nedkit::EntityId {
    s.resolve_title(title)
        .unwrap_or_else(|| panic!("{title:?} not in snapshot"))
}

const WORDS: &[&str] = &[
    "river", "city", "poet", "garden", "king", "book", "war", "music", "school", "bridge",
    "mountain", "film", "road", "market", "temple", "island", "song", "law", "bank", "star",
];

/// A random dump: up to `max_entities` articles `E0..`, redirects `R0..`
/// (chains allowed, never cyclic), a few disambiguation pages `D0..`, and
/// bodies with up to `max_links` links. Links use random case, anchors, and
/// occasionally point at unknown titles or at the page itself.
pub fn random_records(rng: &mut TestRng, max_entities: usize, max_links: usize) -> Vec<DumpRecord> {
    let n = rng.gen_range(1..=max_entities);
    let n_redirects = rng.gen_range(0..=n / 2);
    let n_disambig = rng.gen_range(0..=3);

    let mut redirect_targets = Vec::new();
    for r in 0..n_redirects {
        let target = if r > 0 && rng.gen_bool(0.3) {
            format!("R{}", rng.gen_range(0..r))
        } else {
            format!("E{}", rng.gen_range(0..n))
        };
        redirect_targets.push(target);
    }
    let mut linkable: Vec<String> = (0..n).map(|i| format!("E{i}")).collect();
    linkable.extend((0..n_redirects).map(|r| format!("R{r}")));

    let mut records = Vec::new();
    for i in 0..n {
        let mut body = Vec::new();
        let n_links = rng.gen_range(0..=max_links);
        for _ in 0..rng.gen_range(0..6) {
            body.push(WORDS.choose(rng).unwrap().to_string());
        }
        for _ in 0..n_links {
            let target = match rng.gen_range(0..10) {
                0 => format!("Missing{}", rng.gen_range(0..3)),
                1 => format!("E{i}"),
                _ => linkable.choose(rng).unwrap().clone(),
            };
            let target = if rng.gen_bool(0.3) {
                target.to_lowercase()
            } else {
                target
            };
            if rng.gen_bool(0.3) {
                body.push(format!("[[{target}|{}]]", WORDS.choose(rng).unwrap()));
            } else {
                body.push(format!("[[{target}]]"));
            }
            body.push(WORDS.choose(rng).unwrap().to_string());
        }
        let mut rec = DumpRecord::article(format!("E{i}"), body.join(" "));
        if rng.gen_bool(0.2) {
            rec = rec.with_infobox(if rng.gen_bool(0.5) { "film" } else { "person" });
        }
        records.push(rec);
    }
    for (r, target) in redirect_targets.into_iter().enumerate() {
        records.push(DumpRecord::redirect(format!("R{r}"), target));
    }
    for d in 0..n_disambig {
        let k = rng.gen_range(1..=4.min(n));
        let mut targets: Vec<String> = (0..n).map(|i| format!("E{i}")).collect();
        targets.shuffle(rng);
        targets.truncate(k);
        records.push(DumpRecord::disambiguation(format!("D{d}"), targets));
    }
    records
}

/// Title-keyed link counts, computed from raw bodies.
pub type TitleLinks = BTreeMap<String, u64>;

pub struct Oracle {
    /// lower-cased title -> record
    pages: HashMap<String, DumpRecord>,
    pub articles: Vec<String>,
}

impl Oracle {
    pub fn new(records: &[DumpRecord]) -> Self {
        let pages = records
            .iter()
            .filter(|r| r.kind != PageKind::Disambiguation)
            .map(|r| (r.title.to_lowercase(), r.clone()))
            .collect();
        let articles = records
            .iter()
            .filter(|r| r.kind == PageKind::Article)
            .map(|r| r.title.clone())
            .collect();
        Oracle { pages, articles }
    }

    /// Follow redirects by walking the page table.
    pub fn resolve(&self, title: &str) -> Option<String> {
        let mut cur = title.trim().to_lowercase();
        for _ in 0..64 {
            let page = self.pages.get(&cur)?;
            match page.kind {
                PageKind::Article => return Some(page.title.clone()),
                _ => cur = page.redirect_target.as_ref()?.to_lowercase(),
            }
        }
        None
    }

    /// Naive scanner: split on "[[", cut at "]]", keep the part before "|".
    pub fn llc1(&self, title: &str) -> TitleLinks {
        let body = &self.pages[&title.to_lowercase()].body;
        let mut out = TitleLinks::new();
        for piece in body.split("[[").skip(1) {
            let Some(end) = piece.find("]]") else {
                continue;
            };
            let target = piece[..end].split('|').next().unwrap();
            if let Some(t) = self.resolve(target) {
                if t != title {
                    *out.entry(t).or_default() += 1;
                }
            }
        }
        out
    }

    /// Two-hop traversal.
    pub fn llc2(&self, title: &str) -> TitleLinks {
        let mut out = self.llc1(title);
        for hop in self.llc1(title).keys() {
            for (t, c) in self.llc1(hop) {
                if t != title {
                    *out.entry(t).or_default() += c;
                }
            }
        }
        out
    }

    /// Sum of counts whose target is a candidate of some other mention (or of
    /// any mention, with `intra`).
    pub fn linkgraph(
        &self,
        candidate: &str,
        mention: usize,
        per_mention: &[Vec<String>],
        level: u8,
        intra: bool,
    ) -> u64 {
        let evidence: BTreeSet<&String> = per_mention
            .iter()
            .enumerate()
            .filter(|(m, _)| intra || *m != mention)
            .flat_map(|(_, c)| c.iter())
            .collect();
        let list = if level == 1 {
            self.llc1(candidate)
        } else {
            self.llc2(candidate)
        };
        list.iter()
            .filter(|(t, _)| evidence.contains(t))
            .map(|(_, c)| c)
            .sum()
    }
}

pub fn as_title_links(s: &KnowledgeSnapshot, list: &nedkit::LinkList) -> TitleLinks {
    list.iter()
        .map(|l| (s.title(l.target).unwrap().to_string(), u64::from(l.count)))
        .collect()
}

/// A document over a random snapshot: filler words interleaved with mentions
/// of article, redirect, disambiguation and unknown titles.
pub fn random_document(rng: &mut TestRng, records: &[DumpRecord], doc_id: String) -> Document {
    let titles: Vec<&str> = records.iter().map(|r| r.title.as_str()).collect();
    let mut text = String::new();
    let mut mentions = Vec::new();
    for _ in 0..rng.gen_range(1..=5) {
        for _ in 0..rng.gen_range(0..4) {
            text.push_str(WORDS.choose(rng).unwrap());
            text.push(' ');
        }
        let surface = if rng.gen_bool(0.1) {
            "Nowhere".to_string()
        } else {
            titles.choose(rng).unwrap().to_string()
        };
        let start = text.len();
        text.push_str(&surface);
        mentions.push(Mention::new(start, text.len(), surface));
        text.push(' ');
    }
    for _ in 0..rng.gen_range(0..4) {
        text.push_str(WORDS.choose(rng).unwrap());
        text.push(' ');
    }
    Document {
        doc_id,
        text,
        mentions,
    }
}
