//! Locating `lemma`/`theorem` declarations and their proof bodies.

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Delim, Literals, Token, TokenKind};
use super::{Span, TextError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremEntry {
    pub name: String,
    #[serde(default)]
    pub attributes: Vec<String>,
    pub statement: String,
    pub proof_span: Span,
    #[serde(default)]
    pub category: Option<String>,
    pub theory_name: String,
}

impl TheoremEntry {
    /// `lemma name[attrs]: statement`, the declaration line used in prompts.
    pub fn declaration(&self) -> String {
        let attrs = if self.attributes.is_empty() {
            String::new()
        } else {
            format!("[{}]", self.attributes.join(", "))
        };
        format!("lemma {}{}: {}", self.name, attrs, self.statement)
    }

    pub fn proof_text<'s>(&self, source: &'s str) -> &'s str {
        &source[self.proof_span.range()]
    }
}

const DECLARATIONS: &[&str] = &["lemma", "theorem"];

/// Commands that end a statement without a proof having started.
const THEORY_COMMANDS: &[&str] = &[
    "lemma", "theorem", "corollary", "proposition", "schematic_goal", "lemmas", "definition",
    "abbreviation", "fun", "function", "primrec", "datatype", "record", "type_synonym",
    "typedef", "inductive", "inductive_set", "consts", "axiomatization", "locale", "context",
    "end", "text", "section", "subsection", "subsubsection", "chapter", "declare", "notation",
    "instantiation", "instance", "interpretation", "sublocale", "termination", "ML", "setup",
    "method", "bundle", "hide_const", "hide_fact", "crunch", "crunches",
];

pub(crate) fn is_proof_start(word: &str) -> bool {
    matches!(
        word,
        "apply" | "by" | "unfolding" | "using" | "supply" | "include" | "including" | "proof"
            | "done" | "sorry" | "oops" | "subgoal"
    )
}

/// One entry per named `lemma`/`theorem`, in source order.
///
/// Anonymous declarations (`lemma "P"`) are skipped: they cannot be
/// targeted by name.
pub fn parse_theory(source: &str) -> Result<Vec<TheoremEntry>, TextError> {
    let tokens = tokenize(source, Literals::Strict)?;
    let code: Vec<&Token<'_>> = tokens.iter().filter(|t| t.kind != TokenKind::Comment).collect();
    let theory_name = theory_name(&code).unwrap_or_default();

    let mut entries = Vec::new();
    let mut i = 0;
    let mut depth = 0i32;
    while i < code.len() {
        let tok = code[i];
        match tok.kind {
            TokenKind::Open(_) => depth += 1,
            TokenKind::Close(_) => depth -= 1,
            TokenKind::Word if depth == 0 && DECLARATIONS.contains(&tok.text) => {
                let (entry, next) = parse_declaration(source, &code, i, &theory_name)?;
                if let Some(entry) = entry {
                    entries.push(entry);
                }
                i = next;
                continue;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(TextError::UnbalancedParens { offset: tok.span.start });
        }
        i += 1;
    }
    Ok(entries)
}

fn theory_name(code: &[&Token<'_>]) -> Option<String> {
    let pos = code.iter().position(|t| t.is_word("theory"))?;
    code.get(pos + 1).filter(|t| t.kind == TokenKind::Word).map(|t| t.text.to_string())
}

fn parse_declaration(
    source: &str,
    code: &[&Token<'_>],
    decl: usize,
    theory_name: &str,
) -> Result<(Option<TheoremEntry>, usize), TextError> {
    let decl_tok = code[decl];
    let mut i = decl + 1;

    // `(in locale)` target
    if code.get(i).is_some_and(|t| t.kind == TokenKind::Open(Delim::Paren))
        && code.get(i + 1).is_some_and(|t| t.is_word("in"))
    {
        i = skip_group(code, i)?;
    }

    let mut name = None;
    let mut attributes = Vec::new();
    let has_name = code.get(i).is_some_and(|t| {
        t.kind == TokenKind::Word && !is_proof_start(t.text) && !is_statement_keyword(t.text)
    });
    let names_follow = has_name && {
        let mut j = i + 1;
        if code.get(j).is_some_and(|t| t.kind == TokenKind::Open(Delim::Bracket)) {
            j = skip_group(code, j)?;
        }
        code.get(j).is_some_and(|t| t.is_symbol(":"))
    };
    if names_follow {
        name = Some(code[i].text.to_string());
        i += 1;
    }
    if code.get(i).is_some_and(|t| t.kind == TokenKind::Open(Delim::Bracket)) {
        let close = skip_group(code, i)?;
        attributes = split_attributes(source, code[i].span.end, code[close - 1].span.start);
        i = close;
    }
    if code.get(i).is_some_and(|t| t.is_symbol(":")) {
        i += 1;
    }

    let stmt_start = i;
    let mut depth = 0i32;
    let proof_start = loop {
        let Some(tok) = code.get(i) else {
            return Err(missing(name, decl_tok));
        };
        match tok.kind {
            TokenKind::Open(_) => depth += 1,
            TokenKind::Close(_) => depth -= 1,
            TokenKind::Word if depth == 0 && is_proof_start(tok.text) => break i,
            TokenKind::Word if depth == 0 && THEORY_COMMANDS.contains(&tok.text) => {
                return Err(missing(name, decl_tok));
            }
            _ => {}
        }
        i += 1;
    };
    if proof_start == stmt_start {
        return Err(missing(name, decl_tok));
    }
    let statement =
        source[code[stmt_start].span.start..code[proof_start - 1].span.end].trim().to_string();

    let proof_end = proof_extent(code, proof_start)?;
    let span = Span { start: code[proof_start].span.start, end: code[proof_end - 1].span.end };

    let entry = name.map(|name| TheoremEntry {
        name,
        attributes,
        statement,
        proof_span: span,
        category: None,
        theory_name: theory_name.to_string(),
    });
    Ok((entry, proof_end))
}

fn missing(name: Option<String>, decl: &Token<'_>) -> TextError {
    TextError::MissingProofBody {
        name: name.unwrap_or_else(|| decl.text.to_string()),
        offset: decl.span.start,
    }
}

fn is_statement_keyword(word: &str) -> bool {
    matches!(word, "fixes" | "assumes" | "shows" | "obtains" | "defines" | "notes" | "includes")
}

/// Index just past the group opened at `open`.
fn skip_group(code: &[&Token<'_>], open: usize) -> Result<usize, TextError> {
    let mut depth = 0i32;
    for (i, t) in code.iter().enumerate().skip(open) {
        match t.kind {
            TokenKind::Open(_) => depth += 1,
            TokenKind::Close(_) => {
                depth -= 1;
                if depth == 0 {
                    return Ok(i + 1);
                }
            }
            _ => {}
        }
    }
    Err(TextError::UnbalancedParens { offset: code[open].span.start })
}

fn split_attributes(source: &str, start: usize, end: usize) -> Vec<String> {
    let inner = &source[start..end];
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut from = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(inner[from..i].trim().to_string());
                from = i + 1;
            }
            _ => {}
        }
    }
    out.push(inner[from..].trim().to_string());
    out.retain(|a| !a.is_empty());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    /// apply-style: the lemma itself or a `subgoal`
    Apply,
    /// `proof ... qed`
    Isar,
}

/// Index one past the last token of the proof starting at `start`.
///
/// Terminals (`by`, `done`, `sorry`, `qed`) close apply-style blocks;
/// inside Isar blocks only `proof`/`qed` nesting matters. If the text ends
/// or a new theory command appears first, the proof runs up to there.
fn proof_extent(code: &[&Token<'_>], start: usize) -> Result<usize, TextError> {
    let mut stack = vec![Block::Apply];
    let mut i = start;
    let mut last = start;
    let mut depth = 0i32;
    while i < code.len() {
        let tok = code[i];
        match tok.kind {
            TokenKind::Open(_) => depth += 1,
            TokenKind::Close(_) => {
                depth -= 1;
                if depth < 0 {
                    return Err(TextError::UnbalancedParens { offset: tok.span.start });
                }
            }
            TokenKind::Word if depth == 0 => {
                let top = *stack.last().expect("non-empty while scanning");
                match (top, tok.text) {
                    (_, w) if THEORY_COMMANDS.contains(&w) && top == Block::Apply => break,
                    (_, "proof") => stack.push(Block::Isar),
                    (_, "oops") => return Ok(i + 1),
                    (Block::Isar, "qed") => {
                        stack.pop();
                        i = skip_optional_method(code, i + 1)?;
                        if stack.last() == Some(&Block::Apply) {
                            stack.pop();
                        }
                        if stack.is_empty() {
                            return Ok(i);
                        }
                        last = i;
                        continue;
                    }
                    (Block::Apply, "subgoal") => stack.push(Block::Apply),
                    (Block::Apply, "done" | "sorry") => {
                        stack.pop();
                        if stack.is_empty() {
                            return Ok(i + 1);
                        }
                    }
                    (Block::Apply, "by") => {
                        i = skip_method(code, i + 1)?;
                        i = skip_optional_method(code, i)?;
                        stack.pop();
                        if stack.is_empty() {
                            return Ok(i);
                        }
                        last = i;
                        continue;
                    }
                    _ => {}
                }
            }
            _ => {}
        }
        i += 1;
        last = i;
    }
    Ok(last)
}

/// Skips one method expression: a parenthesized group or a name, each with
/// optional `+`/`?` and `[n]` suffixes.
fn skip_method(code: &[&Token<'_>], at: usize) -> Result<usize, TextError> {
    let Some(tok) = code.get(at) else { return Ok(at) };
    let mut i = match tok.kind {
        TokenKind::Open(Delim::Paren) => skip_group(code, at)?,
        TokenKind::Word => at + 1,
        _ => return Ok(at),
    };
    loop {
        match code.get(i) {
            Some(t) if t.is_symbol("+") || t.is_symbol("?") => i += 1,
            Some(t) if t.kind == TokenKind::Open(Delim::Bracket) => i = skip_group(code, i)?,
            _ => return Ok(i),
        }
    }
}

fn skip_optional_method(code: &[&Token<'_>], at: usize) -> Result<usize, TextError> {
    if code.get(at).is_some_and(|t| t.kind == TokenKind::Open(Delim::Paren)) {
        skip_method(code, at)
    } else {
        Ok(at)
    }
}
