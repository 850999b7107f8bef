//! The four candidate-weighting modules and their combination.
//!
//! * `infobox`: penalize candidates of "individual" infobox classes (films,
//!   books, ...) when no cue phrase for the class appears near the mention.
//! * `textual`: TF-IDF cosine between the document and the candidate article.
//! * `llc1` / `llc2`: link-graph coherence. A candidate scores the summed
//!   counts of its outgoing links (first hop, or first plus second hop) whose
//!   targets are candidates of other mentions in the same document.
//!
//! Every module's per-mention weights are brought into (0, 1] before they are
//! multiplied: link-graph counts are divided by the per-mention maximum,
//! bounded scores are used as-is. Zeros are floored at `smoothing_eps`, and a
//! module that gives every candidate zero abstains (all 1.0).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateContext;
use crate::document::{Document, Mention};
use crate::error::{Error, Result};
use crate::rules::InfoboxRules;
use crate::store::{Entity, KnowledgeSnapshot};
use crate::text::tokenize;
use crate::EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Module {
    Infobox,
    Textual,
    Llc1,
    Llc2,
}

impl Module {
    pub const ALL: [Module; 4] = [Module::Infobox, Module::Textual, Module::Llc1, Module::Llc2];

    pub fn as_str(self) -> &'static str {
        match self {
            Module::Infobox => "infobox",
            Module::Textual => "textual",
            Module::Llc1 => "llc1",
            Module::Llc2 => "llc2",
        }
    }

    /// Parse a comma-separated list such as `llc1,textual`.
    pub fn parse_list(s: &str) -> Result<BTreeSet<Module>> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(Error::Config))
            .collect()
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Module {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Module::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown module {s:?} (expected infobox, textual, llc1, llc2)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphLevel {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerConfig {
    /// Default factor for candidates whose class cues are missing.
    pub infobox_penalty: f64,
    pub infobox_rules: InfoboxRules,
    /// Tokens examined on each side of a mention for infobox cues.
    pub context_window: usize,
    pub enabled_modules: BTreeSet<Module>,
    pub smoothing_eps: f64,
    /// Count links to sibling candidates of the same mention.
    pub intra_mention_edges: bool,
    /// Weight of second-hop link counts at level 2.
    pub second_hop_damping: f64,
    /// Restrict the textual module to this many tokens around the mention
    /// instead of the whole document.
    pub textual_window: Option<usize>,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            infobox_penalty: 0.5,
            infobox_rules: InfoboxRules::default(),
            context_window: 50,
            enabled_modules: Module::ALL.into_iter().collect(),
            smoothing_eps: 0.01,
            intra_mention_edges: false,
            second_hop_damping: 1.0,
            textual_window: None,
        }
    }
}

impl ScorerConfig {
    pub fn with_modules(mut self, modules: impl IntoIterator<Item = Module>) -> Self {
        self.enabled_modules = modules.into_iter().collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.infobox_penalty) {
            return Err(Error::Config(format!(
                "infobox_penalty must be in (0, 1), got {}",
                self.infobox_penalty
            )));
        }
        if !open_unit(self.smoothing_eps) {
            return Err(Error::Config(format!(
                "smoothing_eps must be in (0, 1), got {}",
                self.smoothing_eps
            )));
        }
        if !(self.second_hop_damping.is_finite() && self.second_hop_damping >= 0.0) {
            return Err(Error::Config(
                "second_hop_damping must be finite and >= 0".into(),
            ));
        }
        if self.enabled_modules.is_empty() {
            return Err(Error::Config("no scoring modules enabled".into()));
        }
        self.infobox_rules.validate()
    }
}

/// Per-module normalized weights of one candidate and their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub weights: BTreeMap<Module, f64>,
    #[serde(rename = "final")]
    pub final_weight: f64,
}

impl ScoreVector {
    pub fn from_weights(weights: BTreeMap<Module, f64>) -> Self {
        let final_weight = weights.values().product();
        ScoreVector {
            weights,
            final_weight,
        }
    }
}

fn window_tokens(text: &str, mention: &Mention, width: usize) -> (Vec<String>, Vec<String>) {
    let mut before = tokenize(&text[..mention.start]);
    let keep_from = before.len().saturating_sub(width);
    before.drain(..keep_from);
    let mut after = tokenize(&text[mention.end..]);
    after.truncate(width);
    (before, after)
}

fn contains_sequence(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// 1.0 unless the candidate's infobox class has cue rules and none of the
/// cues occurs within `context_window` tokens on either side of the mention.
pub fn infobox_score(
    mention: &Mention,
    candidate: &Entity,
    text: &str,
    config: &ScorerConfig,
) -> f64 {
    let Some(rule) = candidate
        .infobox_type
        .as_deref()
        .and_then(|class| config.infobox_rules.rule(class))
    else {
        return 1.0;
    };
    let (before, after) = window_tokens(text, mention, config.context_window);
    let found = rule.cues.iter().any(|cue| {
        let cue = tokenize(cue);
        contains_sequence(&before, &cue) || contains_sequence(&after, &cue)
    });
    if found {
        1.0
    } else {
        rule.penalty.unwrap_or(config.infobox_penalty)
    }
}

fn term_counts<I: IntoIterator<Item = String>>(tokens: I) -> HashMap<String, u32> {
    let mut tf = HashMap::new();
    for t in tokens {
        *tf.entry(t).or_default() += 1;
    }
    tf
}

/// Cosine between the tf·idf weightings of two raw term-frequency maps.
/// Returns 0 when either weighted vector is zero.
pub fn tfidf_cosine<F>(a: &HashMap<String, u32>, b: &HashMap<String, u32>, idf: F) -> f64
where
    F: Fn(&str) -> f64,
{
    // iterate the smaller map for the dot product, sorted for a fixed
    // summation order
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut terms: Vec<&String> = small.keys().collect();
    terms.sort();
    let mut dot = 0.0;
    for t in terms {
        if let Some(&other) = large.get(t) {
            let w = idf(t);
            dot += f64::from(small[t]) * w * f64::from(other) * w;
        }
    }
    let norm = |m: &HashMap<String, u32>| {
        let mut terms: Vec<&String> = m.keys().collect();
        terms.sort();
        terms
            .into_iter()
            .map(|t| {
                let w = f64::from(m[t]) * idf(t);
                w * w
            })
            .sum::<f64>()
            .sqrt()
    };
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 || dot == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Raw term frequencies of the text the textual module compares against.
pub fn mention_context_terms(
    text: &str,
    mention: &Mention,
    config: &ScorerConfig,
) -> HashMap<String, u32> {
    match config.textual_window {
        None => term_counts(tokenize(text)),
        Some(w) => {
            let (before, after) = window_tokens(text, mention, w);
            term_counts(
                before
                    .into_iter()
                    .chain(tokenize(&mention.surface))
                    .chain(after),
            )
        }
    }
}

/// TF-IDF cosine between the mention's document and the candidate article.
pub fn textual_score(
    mention: &Mention,
    candidate: &Entity,
    text: &str,
    snapshot: &KnowledgeSnapshot,
    config: &ScorerConfig,
) -> f64 {
    let doc = mention_context_terms(text, mention, config);
    tfidf_cosine(&doc, &candidate.term_vector, |t| snapshot.idf(t))
}

/// Raw link-graph weight of `candidate` as a candidate of mention `mention`:
/// the sum of `count` over its link list entries whose target is evidence in
/// `context` (see [`CandidateContext::is_evidence`]).
pub fn linkgraph_weight(
    candidate: EntityId,
    mention: usize,
    context: &CandidateContext,
    level: GraphLevel,
    snapshot: &KnowledgeSnapshot,
    config: &ScorerConfig,
) -> Result<f64> {
    if mention >= context.mention_count() || !context.candidates(mention).contains(&candidate) {
        return Err(Error::Contract(format!(
            "entity {candidate} is not a candidate of mention {mention}"
        )));
    }
    let intra = config.intra_mention_edges;
    let in_context = |list: &crate::links::LinkList| -> u64 {
        list.iter()
            .filter(|l| context.is_evidence(mention, l.target, intra))
            .map(|l| u64::from(l.count))
            .sum()
    };
    let first = snapshot.llc1(candidate)?;
    match level {
        GraphLevel::One => Ok(in_context(first) as f64),
        GraphLevel::Two if config.second_hop_damping == 1.0 => {
            Ok(in_context(snapshot.llc2(candidate)?) as f64)
        }
        GraphLevel::Two => {
            let mut second = 0u64;
            for hop in first.iter() {
                second += snapshot
                    .llc1(hop.target)?
                    .iter()
                    .filter(|l| {
                        l.target != candidate && context.is_evidence(mention, l.target, intra)
                    })
                    .map(|l| u64::from(l.count))
                    .sum::<u64>();
            }
            Ok(in_context(first) as f64 + config.second_hop_damping * second as f64)
        }
    }
}

/// Max-normalize one mention's raw weights into (0, 1].
///
/// All zeros means the module abstains and every candidate gets 1.0.
/// Otherwise `v -> max(v / max, eps)`.
pub fn normalize_mention_scores(raw: &[f64], eps: f64) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::Contract(
            "cannot normalize an empty score set".into(),
        ));
    }
    if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Contract(format!(
            "raw weights must be finite and >= 0: {raw:?}"
        )));
    }
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(vec![1.0; raw.len()]);
    }
    Ok(raw.iter().map(|v| (v / max).max(eps)).collect())
}

/// Floor scores that are already in [0, 1]: all zeros abstain (1.0),
/// otherwise `v -> max(v, eps)`.
pub fn clamp_bounded_scores(raw: &[f64], eps: f64) -> Vec<f64> {
    if raw.iter().all(|v| *v == 0.0) {
        return vec![1.0; raw.len()];
    }
    raw.iter().map(|v| v.clamp(0.0, 1.0).max(eps)).collect()
}

/// Raw (pre-normalization) weights of one module for each candidate of a
/// mention.
pub fn raw_module_scores(
    module: Module,
    document: &Document,
    mention: usize,
    context: &CandidateContext,
    snapshot: &KnowledgeSnapshot,
    config: &ScorerConfig,
    doc_terms: &HashMap<String, u32>,
) -> Result<Vec<f64>> {
    let m = &document.mentions[mention];
    context
        .candidates(mention)
        .iter()
        .map(|&c| {
            let entity = snapshot.entity(c)?;
            Ok(match module {
                Module::Infobox => infobox_score(m, entity, &document.text, config),
                Module::Textual => match config.textual_window {
                    None => tfidf_cosine(doc_terms, &entity.term_vector, |t| snapshot.idf(t)),
                    Some(_) => textual_score(m, entity, &document.text, snapshot, config),
                },
                Module::Llc1 => {
                    linkgraph_weight(c, mention, context, GraphLevel::One, snapshot, config)?
                }
                Module::Llc2 => {
                    linkgraph_weight(c, mention, context, GraphLevel::Two, snapshot, config)?
                }
            })
        })
        .collect()
}

/// Normalize one module's raw weights the way `score_all` does.
pub fn normalize_module(module: Module, raw: &[f64], eps: f64) -> Result<Vec<f64>> {
    match module {
        Module::Llc1 | Module::Llc2 => normalize_mention_scores(raw, eps),
        Module::Infobox | Module::Textual => Ok(clamp_bounded_scores(raw, eps)),
    }
}

/// Score every candidate of every mention. The result is indexed
/// `[mention][candidate]`, aligned with `context.candidates(mention)`.
pub fn score_all(
    document: &Document,
    context: &CandidateContext,
    snapshot: &KnowledgeSnapshot,
    config: &ScorerConfig,
) -> Result<Vec<Vec<ScoreVector>>> {
    config.validate()?;
    if context.mention_count() != document.mentions.len() {
        return Err(Error::Contract(format!(
            "context has {} mentions, document has {}",
            context.mention_count(),
            document.mentions.len()
        )));
    }
    let doc_terms = if config.enabled_modules.contains(&Module::Textual) {
        term_counts(tokenize(&document.text))
    } else {
        HashMap::new()
    };

    let mut out = Vec::with_capacity(document.mentions.len());
    for mention in 0..document.mentions.len() {
        let n = context.candidates(mention).len();
        if n == 0 {
            out.push(Vec::new());
            continue;
        }
        let mut per_candidate: Vec<BTreeMap<Module, f64>> = vec![BTreeMap::new(); n];
        for &module in &config.enabled_modules {
            let raw = raw_module_scores(
                module, document, mention, context, snapshot, config, &doc_terms,
            )?;
            let norm = normalize_module(module, &raw, config.smoothing_eps)?;
            for (weights, w) in per_candidate.iter_mut().zip(norm) {
                weights.insert(module, w);
            }
        }
        out.push(
            per_candidate
                .into_iter()
                .map(ScoreVector::from_weights)
                .collect(),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::build_context;
    use crate::dump::DumpRecord;
    use crate::rules::InfoboxRule;

    fn film_rules() -> InfoboxRules {
        let mut rules = InfoboxRules::default();
        rules.insert(
            "film",
            InfoboxRule {
                cues: vec!["director".into(), "cinema".into(), "movie".into()],
                penalty: None,
            },
        );
        rules
    }

    fn film_entity(class: &str) -> Entity {
        Entity {
            id: EntityId(0),
            title: "At the age of 40".into(),
            infobox_type: Some(class.into()),
            term_vector: HashMap::new(),
            llc1: Default::default(),
        }
    }

    #[test]
    fn infobox_unlisted_class_passes() {
        let cfg = ScorerConfig {
            infobox_rules: film_rules(),
            ..Default::default()
        };
        let text = "Vahid died At the age of 40";
        let m = Mention::find(text, "At the age of 40", 0).unwrap();
        assert_eq!(infobox_score(&m, &film_entity("person"), text, &cfg), 1.0);
    }

    #[test]
    fn infobox_cue_present_and_absent() {
        let cfg = ScorerConfig {
            infobox_rules: film_rules(),
            ..Default::default()
        };
        let e = film_entity("film");
        let text = "the director praised the film At the age of 40 yesterday";
        let m = Mention::find(text, "At the age of 40", 0).unwrap();
        assert_eq!(infobox_score(&m, &e, text, &cfg), 1.0);

        let text = "Vahid died at the age of 40";
        let m = Mention::find(text, "at the age of 40", 0).unwrap();
        assert_eq!(infobox_score(&m, &e, text, &cfg), 0.5);

        // cue outside the window
        let text = "movie a b c d e at the age of 40";
        let m = Mention::find(text, "at the age of 40", 0).unwrap();
        let narrow = ScorerConfig {
            context_window: 3,
            ..cfg.clone()
        };
        assert_eq!(infobox_score(&m, &e, text, &narrow), 0.5);
        assert_eq!(infobox_score(&m, &e, text, &cfg), 1.0);
    }

    #[test]
    fn infobox_multi_token_cue() {
        let mut rules = InfoboxRules::default();
        rules.insert(
            "film",
            InfoboxRule {
                cues: vec!["box office".into()],
                penalty: Some(0.2),
            },
        );
        let cfg = ScorerConfig {
            infobox_rules: rules,
            ..Default::default()
        };
        let e = film_entity("film");
        let text = "X topped the Box-Office";
        let m = Mention::find(text, "X", 0).unwrap();
        assert_eq!(infobox_score(&m, &e, text, &cfg), 1.0);
        let text = "X topped the box and the office";
        let m = Mention::find(text, "X", 0).unwrap();
        assert_eq!(infobox_score(&m, &e, text, &cfg), 0.2);
    }

    #[test]
    fn cosine_edges() {
        let a: HashMap<String, u32> = [("x".to_string(), 2), ("y".to_string(), 1)].into();
        let b: HashMap<String, u32> = [("z".to_string(), 2)].into();
        assert!((tfidf_cosine(&a, &a, |_| 0.7) - 1.0).abs() < 1e-12);
        assert_eq!(tfidf_cosine(&a, &b, |_| 1.0), 0.0);
        assert_eq!(tfidf_cosine(&a, &HashMap::new(), |_| 1.0), 0.0);
        assert_eq!(tfidf_cosine(&a, &a, |_| 0.0), 0.0);
    }

    #[test]
    fn textual_identical_text() {
        let body = "Saadi was a Persian poet from Shiraz";
        let s = KnowledgeSnapshot::from_records(&[
            DumpRecord::article("Saadi", body),
            DumpRecord::article("Other", "unrelated words here"),
        ])
        .unwrap();
        let m = Mention::find(body, "Saadi", 0).unwrap();
        let cfg = ScorerConfig::default();
        let same = textual_score(&m, &s.entities()[0], body, &s, &cfg);
        assert!((same - 1.0).abs() < 1e-9);
        assert_eq!(textual_score(&m, &s.entities()[1], body, &s, &cfg), 0.0);
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(
            normalize_mention_scores(&[22.0, 0.0], 0.01).unwrap(),
            vec![1.0, 0.01]
        );
        assert_eq!(
            normalize_mention_scores(&[0.0, 0.0], 0.01).unwrap(),
            vec![1.0, 1.0]
        );
        assert_eq!(normalize_mention_scores(&[5.0], 0.01).unwrap(), vec![1.0]);
        assert!(normalize_mention_scores(&[], 0.01).is_err());
        assert_eq!(clamp_bounded_scores(&[0.0, 0.3], 0.01), vec![0.01, 0.3]);
        assert_eq!(clamp_bounded_scores(&[0.0, 0.0], 0.01), vec![1.0, 1.0]);
    }

    fn a1_d2_c2() -> (KnowledgeSnapshot, Document, CandidateContext) {
        let s = KnowledgeSnapshot::from_records(&[
            DumpRecord::article("A1", "[[D2]]"),
            DumpRecord::article("A2", "nothing"),
            DumpRecord::article("D2", "[[C2]] [[C2]] [[C2]]"),
            DumpRecord::article("C2", "city"),
            DumpRecord::disambiguation("Saadi", ["A1", "A2"]),
            DumpRecord::redirect("Shiraz", "C2"),
        ])
        .unwrap();
        let doc = Document::new("d", "Saadi was born in Shiraz.")
            .mark("Saadi")
            .mark("Shiraz");
        let ctx = build_context(&doc.text, &doc.mentions, &s, 64).unwrap();
        (s, doc, ctx)
    }

    #[test]
    fn level_two_prefers_a1() {
        let (s, _, ctx) = a1_d2_c2();
        let cfg = ScorerConfig::default();
        let w = |id, level| linkgraph_weight(EntityId(id), 0, &ctx, level, &s, &cfg).unwrap();
        assert_eq!(w(0, GraphLevel::One), 0.0);
        assert_eq!(w(1, GraphLevel::One), 0.0);
        assert_eq!(w(0, GraphLevel::Two), 3.0);
        assert_eq!(w(1, GraphLevel::Two), 0.0);

        let damped = ScorerConfig {
            second_hop_damping: 0.5,
            ..Default::default()
        };
        assert_eq!(
            linkgraph_weight(EntityId(0), 0, &ctx, GraphLevel::Two, &s, &damped).unwrap(),
            1.5
        );
    }

    #[test]
    fn linkgraph_requires_membership() {
        let (s, _, ctx) = a1_d2_c2();
        let cfg = ScorerConfig::default();
        assert!(linkgraph_weight(EntityId(2), 0, &ctx, GraphLevel::One, &s, &cfg).is_err());
        assert!(linkgraph_weight(EntityId(0), 9, &ctx, GraphLevel::One, &s, &cfg).is_err());
    }

    #[test]
    fn score_all_product() {
        let (s, doc, ctx) = a1_d2_c2();
        let scores = score_all(&doc, &ctx, &s, &ScorerConfig::default()).unwrap();
        assert_eq!(scores[1].len(), 1);
        assert_eq!(scores[1][0].final_weight, 1.0);
        let (a1, a2) = (&scores[0][0], &scores[0][1]);
        assert_eq!(a1.weights[&Module::Llc2], 1.0);
        assert_eq!(a2.weights[&Module::Llc2], 0.01);
        assert!(a1.final_weight > a2.final_weight);
        for sv in scores.iter().flatten() {
            let p: f64 = sv.weights.values().product();
            assert_eq!(p, sv.final_weight);
            assert!(sv.weights.values().all(|w| *w > 0.0 && *w <= 1.0));
        }

        let only = ScorerConfig::default().with_modules([Module::Llc2]);
        let scores = score_all(&doc, &ctx, &s, &only).unwrap();
        assert_eq!(scores[0][1].final_weight, 0.01);
        assert_eq!(scores[0][1].weights.len(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(ScorerConfig::default().validate().is_ok());
        for bad in [
            ScorerConfig {
                infobox_penalty: 1.0,
                ..Default::default()
            },
            ScorerConfig {
                smoothing_eps: 0.0,
                ..Default::default()
            },
            ScorerConfig::default().with_modules([]),
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn module_list_parsing() {
        let m = Module::parse_list("llc1, textual").unwrap();
        assert_eq!(
            m.into_iter().collect::<Vec<_>>(),
            vec![Module::Textual, Module::Llc1]
        );
        assert!(Module::parse_list("llc3").is_err());
    }
}
