//! Language-independent tokenization.
//!
//! Tokens are maximal runs of characters that are neither whitespace nor in a
//! Unicode punctuation category, case folded with full Unicode case folding.
//! There is no stemming and no stop-word list.

use unicode_general_category::{get_general_category, GeneralCategory};

/// Unicode full case folding.
pub fn case_fold(s: &str) -> String {
    caseless::default_case_fold_str(s)
}

fn is_separator(c: char) -> bool {
    if c.is_whitespace() {
        return true;
    }
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Split `text` into case-folded tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(is_separator)
        .filter(|t| !t.is_empty())
        .map(case_fold)
        .filter(|t| !t.is_empty())
        .collect()
}
