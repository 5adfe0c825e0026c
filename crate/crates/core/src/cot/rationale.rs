use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static FIRST_PERSON: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(i think|i am trying|let me)\b").unwrap());
static BLANK_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\n[ \t\r]*\n").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    FirstPerson { phrase: String },
    MultiParagraph,
    Empty,
    /// Unbalanced `(*`/`*)` would break the enclosing comment; raised by
    /// training-instance assembly.
    CommentDelimiter,
}

/// Syntactic checks only; whether the rationale is true is not judged.
pub fn validate_rationale(text: &str) -> Result<(), Vec<Violation>> {
    if text.trim().is_empty() {
        return Err(vec![Violation::Empty]);
    }
    let mut violations: Vec<Violation> = FIRST_PERSON
        .find_iter(text)
        .map(|m| Violation::FirstPerson { phrase: m.as_str().to_string() })
        .collect();
    if BLANK_LINE.is_match(text.trim()) {
        violations.push(Violation::MultiParagraph);
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
