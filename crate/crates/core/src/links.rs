//! Internal link extraction and title resolution.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dump::{DumpRecord, PageKind};
use crate::error::{Error, Result};
use crate::text::case_fold;
use crate::EntityId;

/// Redirect chains longer than this are rejected at build time.
pub const MAX_REDIRECT_DEPTH: usize = 16;

/// One occurrence of `[[Target]]` or `[[Target|anchor]]` in a body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WikiLink<'a> {
    pub target: &'a str,
    pub anchor: Option<&'a str>,
    /// Byte range of the whole `[[...]]` in the body.
    pub span: (usize, usize),
}

/// Scan a body for internal links, in order of appearance.
///
/// `#Section` fragments are stripped from the target. Links whose target is
/// empty after stripping are skipped. An unterminated `[[` ends the scan.
pub fn scan_links(body: &str) -> Vec<WikiLink<'_>> {
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(open) = body[pos..].find("[[").map(|i| pos + i) {
        let inner_start = open + 2;
        let Some(close) = body[inner_start..].find("]]").map(|i| inner_start + i) else {
            break;
        };
        let inner = &body[inner_start..close];
        if let Some(nested) = inner.rfind("[[") {
            // restart from the innermost opener
            pos = inner_start + nested;
            continue;
        }
        let (raw_target, anchor) = match inner.split_once('|') {
            Some((t, a)) => (t, Some(a)),
            None => (inner, None),
        };
        let target = raw_target.split('#').next().unwrap_or("").trim();
        if !target.is_empty() {
            out.push(WikiLink {
                target,
                anchor,
                span: (open, close + 2),
            });
        }
        pos = close + 2;
    }
    out
}

/// The visible text of a body: every link replaced by its anchor text (or its
/// target when there is no anchor).
pub fn render_plain_text(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut last = 0;
    for link in scan_links(body) {
        out.push_str(&body[last..link.span.0]);
        match link.anchor {
            Some(a) if !a.trim().is_empty() => out.push_str(a),
            _ => out.push_str(link.target),
        }
        last = link.span.1;
    }
    out.push_str(&body[last..]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub target: EntityId,
    pub count: u32,
}

/// Aggregated `(target, count)` pairs, in order of first occurrence.
/// Targets are distinct and every count is at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkList {
    entries: Vec<Link>,
}

impl LinkList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `count` occurrences of `target`, merging with an existing entry.
    pub fn add(&mut self, target: EntityId, count: u32) {
        if count == 0 {
            return;
        }
        match self.entries.iter_mut().find(|l| l.target == target) {
            Some(l) => l.count += count,
            None => self.entries.push(Link { target, count }),
        }
    }

    pub fn entries(&self) -> &[Link] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &Link> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count_of(&self, target: EntityId) -> u32 {
        self.entries
            .iter()
            .find(|l| l.target == target)
            .map_or(0, |l| l.count)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|l| u64::from(l.count)).sum()
    }

    pub(crate) fn check(&self, entity_count: usize) -> std::result::Result<(), String> {
        let mut seen = HashSet::new();
        for l in &self.entries {
            if l.count == 0 {
                return Err(format!("zero count for target {}", l.target));
            }
            if l.target.index() >= entity_count {
                return Err(format!("link target {} out of range", l.target));
            }
            if !seen.insert(l.target) {
                return Err(format!("duplicate link target {}", l.target));
            }
        }
        Ok(())
    }
}

impl FromIterator<(EntityId, u32)> for LinkList {
    fn from_iter<I: IntoIterator<Item = (EntityId, u32)>>(iter: I) -> Self {
        let mut list = LinkList::new();
        for (t, c) in iter {
            list.add(t, c);
        }
        list
    }
}

/// Maps case-folded article and redirect titles to article ids, with
/// redirect chains already followed to their final article.
#[derive(Debug, Clone, Default)]
pub struct TitleResolver {
    articles: HashMap<String, EntityId>,
    redirects: HashMap<String, EntityId>,
}

impl TitleResolver {
    /// `article_ids` gives the id of each article record (by index into
    /// `records`). Redirects whose chain ends at an unknown title are dropped.
    pub fn new(records: &[DumpRecord], article_ids: &HashMap<usize, EntityId>) -> Result<Self> {
        let mut articles = HashMap::new();
        let mut raw_redirects: HashMap<String, (&str, &str)> = HashMap::new();
        let mut originals: HashMap<String, &str> = HashMap::new();

        for (i, r) in records.iter().enumerate() {
            if r.kind == PageKind::Disambiguation {
                continue;
            }
            let key = case_fold(&r.title);
            if let Some(prev) = originals.insert(key.clone(), &r.title) {
                return Err(Error::Conflict(format!(
                    "titles {prev:?} and {:?} collide after case folding",
                    r.title
                )));
            }
            match r.kind {
                PageKind::Article => {
                    let id = article_ids[&i];
                    articles.insert(key, id);
                }
                PageKind::Redirect => {
                    let target = r.redirect_target.as_deref().unwrap_or_default();
                    raw_redirects.insert(key, (&r.title, target));
                }
                PageKind::Disambiguation => unreachable!(),
            }
        }

        let mut redirects = HashMap::new();
        for (key, (title, _)) in &raw_redirects {
            let mut chain = vec![title.to_string()];
            let mut seen = HashSet::from([key.clone()]);
            let mut cur = key.clone();
            let resolved = loop {
                let (_, target) = raw_redirects[&cur];
                let next = case_fold(target);
                if let Some(&id) = articles.get(&next) {
                    break Some(id);
                }
                let Some((next_title, _)) = raw_redirects.get(&next) else {
                    break None;
                };
                chain.push(next_title.to_string());
                if !seen.insert(next.clone()) {
                    return Err(Error::RedirectCycle(chain));
                }
                if chain.len() > MAX_REDIRECT_DEPTH {
                    return Err(Error::RedirectTooDeep(
                        title.to_string(),
                        MAX_REDIRECT_DEPTH,
                    ));
                }
                cur = next;
            };
            if let Some(id) = resolved {
                redirects.insert(key.clone(), id);
            } else {
                log::warn!("redirect {title:?} points to a missing article; dropped");
            }
        }

        Ok(TitleResolver {
            articles,
            redirects,
        })
    }

    /// Case-folded article match first, then redirects.
    pub fn resolve(&self, title: &str) -> Option<EntityId> {
        let key = case_fold(title.trim());
        self.articles
            .get(&key)
            .or_else(|| self.redirects.get(&key))
            .copied()
    }

    pub fn article(&self, folded: &str) -> Option<EntityId> {
        self.articles.get(folded).copied()
    }

    /// Resolved redirects, keyed by case-folded redirect title.
    pub fn redirects(&self) -> &HashMap<String, EntityId> {
        &self.redirects
    }
}

/// Build the link list of one article body. Links to unknown titles and links
/// from a page to itself are dropped.
pub fn extract_links(body: &str, resolver: &TitleResolver, source: Option<EntityId>) -> LinkList {
    let mut list = LinkList::new();
    for link in scan_links(body) {
        if let Some(id) = resolver.resolve(link.target) {
            if Some(id) != source {
                list.add(id, 1);
            }
        }
    }
    list
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolver(records: &[DumpRecord]) -> Result<TitleResolver> {
        let mut ids = HashMap::new();
        let mut next = 0;
        for (i, r) in records.iter().enumerate() {
            if r.kind == PageKind::Article {
                ids.insert(i, EntityId(next));
                next += 1;
            }
        }
        TitleResolver::new(records, &ids)
    }

    #[test]
    fn scan_variants() {
        let links = scan_links("a [[X]] b [[Y|why]] [[Z#History|z]] [[ ]] [[unterminated");
        let targets: Vec<_> = links.iter().map(|l| l.target).collect();
        assert_eq!(targets, vec!["X", "Y", "Z"]);
        assert_eq!(links[1].anchor, Some("why"));
    }

    #[test]
    fn nested_opener_restarts() {
        let links = scan_links("[[File:x.png|thumb|[[Shiraz]] at night]]");
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].target, "Shiraz");
    }

    #[test]
    fn plain_text_uses_anchor() {
        assert_eq!(
            render_plain_text("born in [[Shiraz|the city]] near [[Iran]]."),
            "born in the city near Iran."
        );
    }

    #[test]
    fn eq1_link_list() {
        let recs = vec![
            DumpRecord::article("Saadi", ""),
            DumpRecord::article("Shiraz", ""),
            DumpRecord::article("Persian", ""),
            DumpRecord::article("Poet", ""),
        ];
        let r = resolver(&recs).unwrap();
        let mut body = String::new();
        for _ in 0..10 {
            body.push_str("[[Shiraz]] ");
        }
        for _ in 0..4 {
            body.push_str("[[Persian|Persian language]] ");
        }
        for _ in 0..12 {
            body.push_str("[[poet]] ");
        }
        let list = extract_links(&body, &r, Some(EntityId(0)));
        let pairs: Vec<_> = list.iter().map(|l| (l.target.0, l.count)).collect();
        assert_eq!(pairs, vec![(1, 10), (2, 4), (3, 12)]);
    }

    #[test]
    fn no_links_is_empty() {
        let r = resolver(&[DumpRecord::article("A", "")]).unwrap();
        assert!(extract_links("just text", &r, None).is_empty());
    }

    #[test]
    fn redirect_followed() {
        let recs = vec![
            DumpRecord::article("Shiraz", ""),
            DumpRecord::redirect("Old Shiraz", "Shiraz"),
        ];
        let r = resolver(&recs).unwrap();
        let list = extract_links("[[Old Shiraz]]", &r, None);
        assert_eq!(
            list.entries(),
            &[Link {
                target: EntityId(0),
                count: 1
            }]
        );
    }

    #[test]
    fn self_links_and_unknown_dropped() {
        let recs = vec![
            DumpRecord::article("A", ""),
            DumpRecord::redirect("AA", "A"),
        ];
        let r = resolver(&recs).unwrap();
        assert!(extract_links("[[A]] [[AA]] [[Nowhere]]", &r, Some(EntityId(0))).is_empty());
    }

    #[test]
    fn redirect_cycle_named() {
        let recs = vec![
            DumpRecord::redirect("A", "B"),
            DumpRecord::redirect("B", "C"),
            DumpRecord::redirect("C", "A"),
        ];
        match resolver(&recs).unwrap_err() {
            Error::RedirectCycle(chain) => {
                assert!(chain.len() >= 3);
                for t in ["A", "B", "C"] {
                    assert!(chain.iter().any(|c| c == t));
                }
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn redirect_chain_depth() {
        let mut recs = vec![DumpRecord::article("T", "")];
        for i in 0..MAX_REDIRECT_DEPTH {
            let next = if i == 0 {
                "T".to_string()
            } else {
                format!("R{}", i - 1)
            };
            recs.push(DumpRecord::redirect(format!("R{i}"), next));
        }
        let r = resolver(&recs).unwrap();
        assert_eq!(
            r.resolve(&format!("R{}", MAX_REDIRECT_DEPTH - 1)),
            Some(EntityId(0))
        );

        let n = MAX_REDIRECT_DEPTH;
        recs.push(DumpRecord::redirect(format!("R{n}"), format!("R{}", n - 1)));
        assert!(matches!(resolver(&recs), Err(Error::RedirectTooDeep(..))));
    }

    #[test]
    fn case_fold_collision() {
        let recs = vec![
            DumpRecord::article("Saadi", ""),
            DumpRecord::redirect("SAADI", "Saadi"),
        ];
        assert!(matches!(resolver(&recs), Err(Error::Conflict(_))));
    }

    #[test]
    fn dangling_redirect_dropped() {
        let recs = vec![DumpRecord::redirect("A", "Missing")];
        let r = resolver(&recs).unwrap();
        assert!(r.redirects().is_empty());
    }
}
