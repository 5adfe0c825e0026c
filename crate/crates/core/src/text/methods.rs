//! Counting proof methods and referenced facts per proof.
//!
//! Methods are the heads of method expressions after `apply`/`by` (each
//! alternative of `|`, `,` and `;` is a separate head), plus one
//! `unfolding` per unfolding command. Facts are the identifiers passed
//! after modifiers (`add:`, `simp:`, `wp:`, `intro!:`, `split del:`, …),
//! the arguments of `OF`, and `unfolding`/`using`/`supply` targets.
//! Positional method arguments (`rule foo`, `unfold bar_def`) count as facts
//! when they are listed in the known-fact set, or always when that set is
//! empty.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Delim, Literals, Token, TokenKind};
use super::script::{ProofScript, StepKind};
use super::TextError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodCount {
    pub method_invocations: Vec<String>,
    pub fact_references: Vec<String>,
    pub total: usize,
}

impl MethodCount {
    pub fn methods(&self) -> BTreeMap<&str, usize> {
        multiset(&self.method_invocations)
    }

    pub fn facts(&self) -> BTreeMap<&str, usize> {
        multiset(&self.fact_references)
    }
}

fn multiset(items: &[String]) -> BTreeMap<&str, usize> {
    let mut m = BTreeMap::new();
    for i in items {
        *m.entry(i.as_str()).or_insert(0) += 1;
    }
    m
}

/// Words that never name a fact even in argument position.
const RESERVED: &[&str] = &[
    "in", "where", "and", "OF", "of", "THEN", "for", "is", "rule_format", "sorry", "oops", "asm",
    "no_asm", "no_asm_simp", "no_asm_use",
];

/// Isar words that end an `unfolding`/`using` fact list inside opaque blocks.
const ISAR_WORDS: &[&str] = &[
    "proof", "qed", "next", "have", "show", "hence", "thus", "obtain", "then", "from", "with",
    "note", "fix", "assume", "case", "moreover", "ultimately", "also", "finally", "let", "define",
    "consider", "by", "apply", "using", "unfolding", "done", "sorry", "oops", "supply", "subgoal",
    "where", "and", "is", "for",
];

pub fn count_methods(
    script: &ProofScript,
    known_facts: &BTreeSet<String>,
) -> Result<MethodCount, TextError> {
    let mut counter = Counter { known: known_facts, methods: Vec::new(), facts: Vec::new() };
    for step in &script.steps {
        let tokens: Vec<Token<'_>> = tokenize(&step.raw, Literals::Lenient)?
            .into_iter()
            .filter(|t| t.kind != TokenKind::Comment)
            .collect();
        check_balanced(&tokens)?;
        let args = tokens.get(1..).unwrap_or_default();
        match step.kind {
            StepKind::Apply | StepKind::By => {
                counter.method_expr(args, 0)?;
            }
            StepKind::Unfolding => {
                counter.methods.push("unfolding".into());
                counter.fact_list(args, 0)?;
            }
            StepKind::Using | StepKind::Supply => {
                counter.fact_list(args, 0)?;
            }
            StepKind::OpaqueIsar => counter.opaque(&tokens)?,
            StepKind::Include | StepKind::Done | StepKind::Placeholder => {}
        }
    }
    let total = counter.methods.len() + counter.facts.len();
    Ok(MethodCount { method_invocations: counter.methods, fact_references: counter.facts, total })
}

fn check_balanced(tokens: &[Token<'_>]) -> Result<(), TextError> {
    let mut open = Vec::new();
    for t in tokens {
        match t.kind {
            TokenKind::Open(_) => open.push(t.span.start),
            TokenKind::Close(_) => {
                open.pop().ok_or(TextError::UnbalancedParens { offset: t.span.start })?;
            }
            _ => {}
        }
    }
    match open.first() {
        Some(&offset) => Err(TextError::UnbalancedParens { offset }),
        None => Ok(()),
    }
}

struct Counter<'k> {
    known: &'k BTreeSet<String>,
    methods: Vec<String>,
    facts: Vec<String>,
}

fn is_name(t: &Token<'_>) -> bool {
    t.kind == TokenKind::Word
        && t.text != "_"
        && !t.text.starts_with(|c: char| c.is_ascii_digit())
        && !RESERVED.contains(&t.text)
}

/// Token count of a modifier such as `add:`, `intro!:` or `split del:`.
fn modifier_len(toks: &[Token<'_>], i: usize) -> Option<usize> {
    let word = |k: usize| toks.get(k).filter(|t| t.kind == TokenKind::Word);
    let sym = |k: usize, s: &str| toks.get(k).is_some_and(|t| t.is_symbol(s));
    word(i)?;
    if sym(i + 1, ":") {
        Some(2)
    } else if (sym(i + 1, "!") || sym(i + 1, "?")) && sym(i + 2, ":") {
        Some(3)
    } else if word(i + 1).is_some_and(|t| matches!(t.text, "add" | "del" | "only")) && sym(i + 2, ":")
    {
        Some(3)
    } else {
        None
    }
}

impl Counter<'_> {
    fn positional(&mut self, name: &str) {
        if self.known.is_empty() || self.known.contains(name) {
            self.facts.push(name.to_string());
        }
    }

    /// Top-level method expression: a bare name or parenthesized groups,
    /// each with optional `+`, `?`, `[n]` suffixes. Returns the index after it.
    fn method_expr(&mut self, toks: &[Token<'_>], mut i: usize) -> Result<usize, TextError> {
        let mut units = 0;
        loop {
            match toks.get(i) {
                Some(t) if t.kind == TokenKind::Open(Delim::Paren) => i = self.group(toks, i)?,
                Some(t) if units == 0 && is_name(t) && !ISAR_WORDS.contains(&t.text) => {
                    self.methods.push(t.text.to_string());
                    i += 1;
                }
                _ => return Ok(i),
            }
            units += 1;
            while let Some(t) = toks.get(i) {
                if t.is_symbol("+") || t.is_symbol("?") {
                    i += 1;
                } else if t.kind == TokenKind::Open(Delim::Bracket) {
                    i = self.attribute(toks, i)?;
                } else {
                    break;
                }
            }
        }
    }

    /// A parenthesized method group; `open` indexes the `(`.
    fn group(&mut self, toks: &[Token<'_>], open: usize) -> Result<usize, TextError> {
        let mut expect_head = true;
        let mut after_modifier = false;
        let mut i = open + 1;
        while let Some(t) = toks.get(i) {
            match t.kind {
                TokenKind::Close(_) => return Ok(i + 1),
                TokenKind::Open(Delim::Paren) if expect_head => {
                    i = self.group(toks, i)?;
                    expect_head = false;
                    continue;
                }
                TokenKind::Open(Delim::Paren) => {
                    i = skip_group(toks, i)?;
                    continue;
                }
                TokenKind::Open(Delim::Bracket) => {
                    i = self.attribute(toks, i)?;
                    continue;
                }
                TokenKind::Symbol if matches!(t.text, "|" | "," | ";") => {
                    expect_head = true;
                    after_modifier = false;
                }
                TokenKind::Word if expect_head => {
                    self.methods.push(t.text.to_string());
                    expect_head = false;
                    after_modifier = false;
                }
                TokenKind::Word => {
                    if let Some(n) = modifier_len(toks, i) {
                        after_modifier = true;
                        i += n;
                        continue;
                    }
                    if toks.get(i + 1).is_some_and(|n| n.is_symbol("=")) {
                        // `f="..."` instantiation
                    } else if is_name(t) {
                        if after_modifier {
                            self.facts.push(t.text.to_string());
                        } else {
                            self.positional(t.text);
                        }
                    }
                }
                _ => {}
            }
            i += 1;
        }
        Err(TextError::UnbalancedParens { offset: toks[open].span.start })
    }

    /// Attribute list `[...]`; counts the arguments of `OF`.
    fn attribute(&mut self, toks: &[Token<'_>], open: usize) -> Result<usize, TextError> {
        let mut in_of = false;
        let mut i = open + 1;
        while let Some(t) = toks.get(i) {
            match t.kind {
                TokenKind::Close(_) => return Ok(i + 1),
                TokenKind::Open(Delim::Bracket) => {
                    i = self.attribute(toks, i)?;
                    continue;
                }
                TokenKind::Open(Delim::Paren) => {
                    i = skip_group(toks, i)?;
                    continue;
                }
                TokenKind::Symbol if t.text == "," => in_of = false,
                TokenKind::Word if t.text == "OF" => in_of = true,
                TokenKind::Word if in_of && is_name(t) => self.facts.push(t.text.to_string()),
                _ => {}
            }
            i += 1;
        }
        Err(TextError::UnbalancedParens { offset: toks[open].span.start })
    }

    /// Fact names up to the end of the tokens or the next Isar keyword.
    fn fact_list(&mut self, toks: &[Token<'_>], mut i: usize) -> Result<usize, TextError> {
        while let Some(t) = toks.get(i) {
            match t.kind {
                TokenKind::Word if ISAR_WORDS.contains(&t.text) => return Ok(i),
                TokenKind::Open(Delim::Bracket) => {
                    i = self.attribute(toks, i)?;
                    continue;
                }
                TokenKind::Open(Delim::Paren) => {
                    i = skip_group(toks, i)?;
                    continue;
                }
                TokenKind::Word if is_name(t) => self.facts.push(t.text.to_string()),
                _ => {}
            }
            i += 1;
        }
        Ok(i)
    }

    /// Counts `apply`/`by`/`proof (m)` methods and fact lists inside an
    /// opaque Isar block.
    fn opaque(&mut self, toks: &[Token<'_>]) -> Result<(), TextError> {
        let mut i = 0;
        while let Some(t) = toks.get(i) {
            match t.kind {
                TokenKind::Word if matches!(t.text, "apply" | "by" | "proof" | "qed") => {
                    i = self.method_expr(toks, i + 1)?;
                    continue;
                }
                TokenKind::Word if t.text == "unfolding" => {
                    self.methods.push("unfolding".into());
                    i = self.fact_list(toks, i + 1)?;
                    continue;
                }
                TokenKind::Word if matches!(t.text, "using" | "from" | "with" | "note") => {
                    i = self.fact_list(toks, i + 1)?;
                    continue;
                }
                TokenKind::Open(_) => {
                    i = skip_group(toks, i)?;
                    continue;
                }
                _ => {}
            }
            i += 1;
        }
        Ok(())
    }
}

fn skip_group(toks: &[Token<'_>], open: usize) -> Result<usize, TextError> {
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate().skip(open) {
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
    Err(TextError::UnbalancedParens { offset: toks[open].span.start })
}
