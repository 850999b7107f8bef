//! Cue-phrase rules for "individual" infobox classes.
//!
//! Rules are read from TOML, one table per class:
//!
//! ```toml
//! [classes.film]
//! cues = ["director", "cinema", "movie", "box office"]
//! penalty = 0.4        # optional, overrides the global infobox penalty
//! ```
//!
//! Class names are matched exactly against the infobox type of a candidate.
//! Cue phrases are tokenized like document text and must appear as a
//! contiguous token sequence near the mention.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoboxRule {
    pub cues: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoboxRules {
    #[serde(default)]
    classes: BTreeMap<String, InfoboxRule>,
}

impl InfoboxRules {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let rules: InfoboxRules =
            toml::from_str(s).map_err(|e| Error::Config(format!("infobox rules: {e}")))?;
        rules.validate()?;
        Ok(rules)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn insert(&mut self, class: impl Into<String>, rule: InfoboxRule) {
        self.classes.insert(class.into(), rule);
    }

    pub fn rule(&self, class: &str) -> Option<&InfoboxRule> {
        self.classes.get(class)
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (class, rule) in &self.classes {
            if let Some(p) = rule.penalty {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Config(format!(
                        "penalty for class {class:?} must be in (0, 1), got {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}
