//! Reading Isabelle goal-state renderings into sequents.

use serde::{Deserialize, Serialize};

use super::TextError;

/// One subgoal `⋀params. ⟦A₁; …; Aₙ⟧ ⟹ C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequent {
    /// Variables bound by a leading `⋀`, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    pub premises: Vec<String>,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofState {
    pub mode: String,
    pub subgoals: Vec<Sequent>,
}

const ESCAPES: &[(&str, &str)] = &[
    ("\\<Longrightarrow>", "⟹"),
    ("\\<lbrakk>", "⟦"),
    ("\\<rbrakk>", "⟧"),
    ("\\<And>", "⋀"),
    ("==>", "⟹"),
    ("[|", "⟦"),
    ("|]", "⟧"),
    ("!!", "⋀"),
];

/// Rewrites ASCII spellings of `⟹ ⟦ ⟧ ⋀` to their Unicode forms.
pub fn normalize_symbols(text: &str) -> String {
    ESCAPES.iter().fold(text.to_string(), |acc, (from, to)| acc.replace(from, to))
}

pub fn parse_proof_state(text: &str) -> Result<ProofState, TextError> {
    let text = normalize_symbols(text);
    let mut mode = String::new();
    let mut declared: Option<usize> = None;
    let mut bodies: Vec<String> = Vec::new();

    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(m) = trimmed.strip_prefix("proof").map(str::trim) {
            if let Some(inner) = m.strip_prefix('(').and_then(|m| m.strip_suffix(')')) {
                mode = inner.trim().to_string();
                continue;
            }
        }
        if let Some(n) = trimmed.strip_prefix("goal").and_then(goal_count) {
            declared = Some(n);
            continue;
        }
        if trimmed == "No subgoals!" {
            declared = Some(0);
            continue;
        }
        if let Some((n, body)) = numbered(trimmed) {
            if n != bodies.len() + 1 {
                return Err(malformed(line));
            }
            bodies.push(body.to_string());
            continue;
        }
        match bodies.last_mut() {
            Some(body) => {
                body.push(' ');
                body.push_str(trimmed);
            }
            None => return Err(malformed(line)),
        }
    }

    if let Some(declared) = declared {
        if declared != bodies.len() {
            return Err(TextError::HeaderCountMismatch { declared, parsed: bodies.len() });
        }
    }
    let subgoals = bodies.iter().map(|b| parse_sequent(b)).collect::<Result<_, _>>()?;
    Ok(ProofState { mode, subgoals })
}

fn malformed(line: &str) -> TextError {
    TextError::MalformedSubgoalLine { line: line.to_string() }
}

/// `" (2 subgoals):"` → 2, `":"` → 0.
fn goal_count(rest: &str) -> Option<usize> {
    let rest = rest.trim();
    if rest == ":" {
        return Some(0);
    }
    let inner = rest.strip_prefix('(')?.strip_suffix("):")?;
    let (num, word) = inner.trim().split_once(char::is_whitespace)?;
    matches!(word.trim(), "subgoal" | "subgoals").then_some(())?;
    num.parse().ok()
}

fn numbered(line: &str) -> Option<(usize, &str)> {
    let (num, rest) = line.split_once('.')?;
    let n = num.parse().ok()?;
    Some((n, rest.trim()))
}

/// Parses one subgoal body (already symbol-normalized).
pub fn parse_sequent(body: &str) -> Result<Sequent, TextError> {
    let mut body = body.trim();
    let mut params = Vec::new();
    if let Some(rest) = body.strip_prefix('⋀') {
        let dot = top_level_positions(rest, '.').into_iter().next().ok_or_else(|| malformed(body))?;
        params = rest[..dot].split_whitespace().map(str::to_string).collect();
        body = rest[dot + 1..].trim();
    }

    let mut parts = split_top_level(body, '⟹');
    let conclusion = parts.pop().unwrap_or_default().trim().to_string();
    if conclusion.is_empty() {
        return Err(malformed(body));
    }
    let mut premises = Vec::new();
    for part in parts {
        let part = part.trim();
        match bracketed(part) {
            Some(inner) => {
                premises.extend(split_top_level(inner, ';').into_iter().map(|p| p.trim().to_string()))
            }
            None => premises.push(part.to_string()),
        }
    }
    if premises.iter().any(String::is_empty) {
        return Err(malformed(body));
    }
    Ok(Sequent { params, premises, conclusion })
}

/// Inner text when `part` is exactly one `⟦ … ⟧` group.
fn bracketed(part: &str) -> Option<&str> {
    let inner = part.strip_prefix('⟦')?.strip_suffix('⟧')?;
    let balanced = inner.chars().try_fold(0i32, |d, c| {
        let d = match c {
            '⟦' => d + 1,
            '⟧' => d - 1,
            _ => d,
        };
        (d >= 0).then_some(d)
    });
    (balanced == Some(0)).then_some(inner)
}

fn depth_delta(c: char) -> i32 {
    match c {
        '(' | '[' | '{' | '⟦' | '‹' | '⦃' => 1,
        ')' | ']' | '}' | '⟧' | '›' | '⦄' => -1,
        _ => 0,
    }
}

fn top_level_positions(text: &str, sep: char) -> Vec<usize> {
    let mut depth = 0i32;
    let mut in_str = false;
    let mut out = Vec::new();
    for (i, c) in text.char_indices() {
        if c == '"' {
            in_str = !in_str;
        } else if !in_str {
            if c == sep && depth == 0 {
                out.push(i);
            } else {
                depth += depth_delta(c);
            }
        }
    }
    out
}

fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut from = 0;
    for at in top_level_positions(text, sep) {
        out.push(&text[from..at]);
        from = at + sep.len_utf8();
    }
    out.push(&text[from..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracketed_premises() {
        let s = parse_sequent("⟦A; f (x; y) = z⟧ ⟹ C").unwrap();
        assert_eq!(s.premises, ["A", "f (x; y) = z"]);
        assert_eq!(s.conclusion, "C");
    }

    #[test]
    fn bare_chain() {
        let s = parse_sequent("A ⟹ B ⟹ C").unwrap();
        assert_eq!(s.premises, ["A", "B"]);
        assert_eq!(s.conclusion, "C");
    }

    #[test]
    fn nested_implication_in_parens_is_not_split() {
        let s = parse_sequent("(A ⟹ B) ⟹ C").unwrap();
        assert_eq!(s.premises, ["(A ⟹ B)"]);
    }

    #[test]
    fn premise_free() {
        let s = parse_sequent("x = x").unwrap();
        assert!(s.premises.is_empty());
        assert_eq!(s.conclusion, "x = x");
    }

    #[test]
    fn meta_binder() {
        let s = parse_sequent("⋀x y. ⟦P x⟧ ⟹ Q y").unwrap();
        assert_eq!(s.params, ["x", "y"]);
        assert_eq!(s.premises, ["P x"]);
    }

    #[test]
    fn ascii_forms_normalized() {
        let st = parse_proof_state(
            "goal (1 subgoal):\n 1. \\<lbrakk>A; B\\<rbrakk> \\<Longrightarrow> C ==> D",
        )
        .unwrap();
        assert_eq!(st.subgoals[0].premises, ["A", "B", "C"]);
        assert_eq!(st.subgoals[0].conclusion, "D");
    }

    #[test]
    fn no_subgoals_marker() {
        let st = parse_proof_state("proof (prove)\ngoal:\nNo subgoals!").unwrap();
        assert!(st.subgoals.is_empty());
        assert_eq!(st.mode, "prove");
        assert!(parse_proof_state("No subgoals!").unwrap().subgoals.is_empty());
    }

    #[test]
    fn continuation_lines_join() {
        let st = parse_proof_state("goal (1 subgoal):\n 1. ⟦A;\n     B⟧\n    ⟹ C").unwrap();
        assert_eq!(st.subgoals[0].premises, ["A", "B"]);
    }

    #[test]
    fn header_mismatch() {
        assert_eq!(
            parse_proof_state("goal (2 subgoals):\n 1. A"),
            Err(TextError::HeaderCountMismatch { declared: 2, parsed: 1 })
        );
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_proof_state("junk"), Err(TextError::MalformedSubgoalLine { .. })));
        assert!(matches!(
            parse_proof_state("goal (2 subgoals):\n 1. A\n 3. B"),
            Err(TextError::MalformedSubgoalLine { .. })
        ));
        assert!(matches!(
            parse_proof_state("goal (1 subgoal):\n 1. A ⟹"),
            Err(TextError::MalformedSubgoalLine { .. })
        ));
    }
}
