//! Proof scripts interleaved with per-step rationale comments.

use serde::{Deserialize, Serialize};

use super::lexer::{comment_body, tokenize, Literals, Token, TokenKind};
use super::script::{script_from, split_steps, ProofScript};
use super::TextError;

pub const WHOLE_PROOF_HEADER: &str = "whole proof:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rationale {
    pub text: String,
    pub step_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavedProof {
    pub steps: ProofScript,
    pub rationales: Vec<Rationale>,
}

impl InterleavedProof {
    pub fn rationale_for(&self, step_index: usize) -> Option<&Rationale> {
        self.rationales.iter().find(|r| r.step_index == step_index)
    }
}

/// Parses model output of the form `whole proof:` followed by commands,
/// each optionally followed by a `(* rationale *)` comment.
///
/// A leading `lemma`/`theorem` declaration (as echoed by some models) is
/// skipped up to the first proof command. Several comments after one step
/// are joined into a single rationale.
pub fn parse_interleaved(generated: &str) -> Result<InterleavedProof, TextError> {
    let body = strip_header(generated);
    let tokens = tokenize(body, Literals::Strict)?;
    let tokens = skip_declaration(&tokens);
    let segmented = split_steps(tokens)?;
    if let Some(first) = segmented.leading_comments.first() {
        return Err(TextError::DanglingRationale { offset: first.start });
    }
    if segmented.steps.is_empty() {
        return Err(TextError::NoStepsFound);
    }
    let rationales = segmented
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.trailing_comments.is_empty())
        .map(|(step_index, s)| {
            let text = s
                .trailing_comments
                .iter()
                .map(|c| comment_body(&body[c.clone()]))
                .collect::<Vec<_>>()
                .join(" ");
            Rationale { text, step_index }
        })
        .collect();
    Ok(InterleavedProof { steps: script_from(body, &segmented), rationales })
}

fn strip_header(text: &str) -> &str {
    let trimmed = text.trim_start();
    match trimmed.strip_prefix(WHOLE_PROOF_HEADER) {
        Some(rest) => rest,
        None => text,
    }
}

fn skip_declaration<'t, 'a>(tokens: &'t [Token<'a>]) -> &'t [Token<'a>] {
    let first = tokens.iter().position(|t| t.kind != TokenKind::Comment);
    let Some(first) = first else { return tokens };
    if !(tokens[first].is_word("lemma") || tokens[first].is_word("theorem")) {
        return tokens;
    }
    let mut depth = 0i32;
    for (i, t) in tokens.iter().enumerate().skip(first + 1) {
        match t.kind {
            TokenKind::Open(_) => depth += 1,
            TokenKind::Close(_) => depth -= 1,
            TokenKind::Word if depth == 0 && super::theory::is_proof_start(t.text) => {
                return &tokens[i..];
            }
            _ => {}
        }
    }
    &tokens[tokens.len()..]
}

/// The checkable script: step texts joined by newlines, comments removed.
pub fn strip_rationales(proof: &InterleavedProof) -> String {
    proof
        .steps
        .steps
        .iter()
        .map(|s| remove_comments(&s.raw))
        .collect::<Vec<_>>()
        .join("\n")
}

fn remove_comments(raw: &str) -> String {
    let Ok(tokens) = tokenize(raw, Literals::Lenient) else {
        return raw.to_string();
    };
    let comments: Vec<_> =
        tokens.iter().filter(|t| t.kind == TokenKind::Comment).map(|t| t.span.clone()).collect();
    if comments.is_empty() {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len());
    let mut at = 0;
    for c in comments {
        out.push_str(&raw[at..c.start]);
        at = c.end;
    }
    out.push_str(&raw[at..]);
    out.trim().to_string()
}
