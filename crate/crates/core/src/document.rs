use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Literal gold value for "no entity".
pub const NIL: &str = "NIL";

/// A marked span of document text. Offsets are byte offsets into the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
}

impl Mention {
    pub fn new(start: usize, end: usize, surface: impl Into<String>) -> Self {
        Mention {
            start,
            end,
            surface: surface.into(),
            gold: None,
        }
    }

    /// Locate the `nth` occurrence of `surface` in `text`.
    pub fn find(text: &str, surface: &str, nth: usize) -> Option<Self> {
        let (start, _) = text.match_indices(surface).nth(nth)?;
        Some(Mention::new(start, start + surface.len(), surface))
    }

    pub fn with_gold(mut self, gold: impl Into<String>) -> Self {
        self.gold = Some(gold.into());
        self
    }

    /// True when the gold annotation is absent or the NIL marker.
    pub fn gold_is_nil(&self) -> bool {
        self.gold.as_deref().is_none_or(|g| g == NIL)
    }

    pub fn validate(&self, text: &str) -> Result<()> {
        if self.start >= self.end || self.end > text.len() {
            return Err(Error::Input(format!(
                "mention span {}..{} invalid for text of {} bytes",
                self.start,
                self.end,
                text.len()
            )));
        }
        match text.get(self.start..self.end) {
            Some(slice) if slice == self.surface => Ok(()),
            Some(slice) => Err(Error::Input(format!(
                "mention surface {:?} does not match text slice {slice:?} at {}..{}",
                self.surface, self.start, self.end
            ))),
            None => Err(Error::Input(format!(
                "mention span {}..{} is not on character boundaries",
                self.start, self.end
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    #[serde(default)]
    pub mentions: Vec<Mention>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            text: text.into(),
            mentions: Vec::new(),
        }
    }

    /// Add a mention for the first occurrence of `surface` at or after the end
    /// of the previous mention.
    pub fn mark(mut self, surface: &str) -> Self {
        let from = self.mentions.last().map_or(0, |m| m.end);
        let start = from
            + self.text[from..]
                .find(surface)
                .unwrap_or_else(|| panic!("{surface:?} not found in document text"));
        self.mentions
            .push(Mention::new(start, start + surface.len(), surface));
        self
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.mentions {
            m.validate(&self.text).map_err(|e| match e {
                Error::Input(msg) => Error::Input(format!("document {:?}: {msg}", self.doc_id)),
                other => other,
            })?;
        }
        Ok(())
    }
}
