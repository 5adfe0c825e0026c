//! Detection of `sorry` / `oops` placeholder commands.

use serde::{Deserialize, Serialize};

use super::lexer::{scan, Literals, RegionKind};
use super::TextError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceholderKind {
    Sorry,
    Oops,
}

impl PlaceholderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlaceholderKind::Sorry => "sorry",
            PlaceholderKind::Oops => "oops",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placeholder {
    pub kind: PlaceholderKind,
    /// Byte offset of the first letter.
    pub location: usize,
}

/// Characters that may continue an identifier. Matches of `sorry`/`oops`
/// adjacent to one of these are not placeholders (`sorrys`, `x_oops`).
pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Every identifier-boundary `sorry`/`oops` outside comments, string
/// literals and cartouches, in offset order.
pub fn detect_placeholders(script_text: &str) -> Result<Vec<Placeholder>, TextError> {
    let mut found = Vec::new();
    for region in scan(script_text, Literals::Lenient)? {
        if region.kind != RegionKind::Code {
            continue;
        }
        let code = &script_text[region.span.clone()];
        for kind in [PlaceholderKind::Sorry, PlaceholderKind::Oops] {
            let word = kind.as_str();
            for (rel, _) in code.match_indices(word) {
                let at = region.span.start + rel;
                let before = script_text[..at].chars().next_back();
                let after = script_text[at + word.len()..].chars().next();
                if !before.is_some_and(is_ident_char) && !after.is_some_and(is_ident_char) {
                    found.push(Placeholder { kind, location: at });
                }
            }
        }
    }
    found.sort_by_key(|p| p.location);
    Ok(found)
}
