use super::lexer::{scan, Literals, RegionKind};
use super::TextError;

/// Canonical form of a script: comments removed, whitespace runs collapsed
/// to one space, trimmed. Case and symbols are preserved.
///
/// Two scripts "differ" exactly when their canonical forms differ.
pub fn normalize_script(script_text: &str) -> Result<String, TextError> {
    let mut out = String::with_capacity(script_text.len());
    let mut pending_space = false;
    for region in scan(script_text, Literals::Lenient)? {
        if region.kind == RegionKind::Comment {
            pending_space = true;
            continue;
        }
        for c in script_text[region.span].chars() {
            if c.is_whitespace() {
                pending_space = true;
            } else {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c);
            }
        }
    }
    Ok(out)
}
