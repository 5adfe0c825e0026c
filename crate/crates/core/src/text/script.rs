//! Segmentation of proof bodies into commands.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Literals, Token, TokenKind};
use super::TextError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Apply,
    By,
    Unfolding,
    Using,
    Supply,
    Include,
    Done,
    /// A structured `proof ... qed` block, kept whole.
    OpaqueIsar,
    /// A bare `sorry` or `oops` command.
    Placeholder,
}

impl StepKind {
    pub fn from_keyword(word: &str) -> Option<StepKind> {
        Some(match word {
            "apply" => StepKind::Apply,
            "by" => StepKind::By,
            "unfolding" => StepKind::Unfolding,
            "using" => StepKind::Using,
            "supply" => StepKind::Supply,
            "include" | "including" => StepKind::Include,
            "done" => StepKind::Done,
            "proof" => StepKind::OpaqueIsar,
            "sorry" | "oops" => StepKind::Placeholder,
            _ => return None,
        })
    }

    fn takes_arguments(self) -> bool {
        !matches!(self, StepKind::Done | StepKind::Placeholder)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    pub raw: String,
    pub kind: StepKind,
    pub index: usize,
}

impl ProofStep {
    /// Wraps a single, already-isolated command without re-splitting it.
    ///
    /// The kind comes from the leading keyword; text that does not start
    /// with a step keyword is treated as opaque Isar.
    pub fn from_command(raw: &str, index: usize) -> ProofStep {
        let raw = raw.trim();
        let kind = tokenize(raw, Literals::Lenient)
            .ok()
            .and_then(|toks| {
                toks.into_iter()
                    .find(|t| t.kind != TokenKind::Comment)
                    .filter(|t| t.kind == TokenKind::Word)
                    .and_then(|t| StepKind::from_keyword(t.text))
            })
            .unwrap_or(StepKind::OpaqueIsar);
        ProofStep { raw: raw.to_string(), kind, index }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofScript {
    pub steps: Vec<ProofStep>,
}

impl ProofScript {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Raw step texts joined by single spaces.
    pub fn joined(&self) -> String {
        self.steps.iter().map(|s| s.raw.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// A command located in source text, plus the comments that trail it.
#[derive(Debug, Clone)]
pub(crate) struct RawStep {
    pub kind: StepKind,
    pub span: Range<usize>,
    pub trailing_comments: Vec<Range<usize>>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Segmented {
    pub leading_comments: Vec<Range<usize>>,
    pub steps: Vec<RawStep>,
}

/// Splits a token stream at step keywords in command position.
///
/// Command position means outside comments, strings and cartouches, at
/// parenthesis/bracket depth zero, and not inside an open `proof` block.
pub(crate) fn split_steps(tokens: &[Token<'_>]) -> Result<Segmented, TextError> {
    let mut out = Segmented::default();
    let mut delims: Vec<usize> = Vec::new();
    let mut isar: Vec<usize> = Vec::new();
    let mut current: Option<RawStep> = None;
    let mut pending: Vec<Range<usize>> = Vec::new();

    for tok in tokens {
        match tok.kind {
            TokenKind::Comment => {
                if current.is_some() {
                    pending.push(tok.span.clone());
                } else {
                    out.leading_comments.push(tok.span.clone());
                }
                continue;
            }
            TokenKind::Open(_) => delims.push(tok.span.start),
            TokenKind::Close(_) => {
                if delims.pop().is_none() {
                    return Err(TextError::UnbalancedParens { offset: tok.span.start });
                }
            }
            TokenKind::Word if delims.is_empty() && !isar.is_empty() => {
                match tok.text {
                    "proof" => isar.push(tok.span.start),
                    "qed" => {
                        isar.pop();
                    }
                    _ => {}
                }
            }
            TokenKind::Word if delims.is_empty() => {
                if let Some(kind) = StepKind::from_keyword(tok.text) {
                    if let Some(mut done) = current.take() {
                        done.trailing_comments = std::mem::take(&mut pending);
                        out.steps.push(done);
                    }
                    if kind == StepKind::OpaqueIsar {
                        isar.push(tok.span.start);
                    }
                    current = Some(RawStep {
                        kind,
                        span: tok.span.clone(),
                        trailing_comments: Vec::new(),
                    });
                    continue;
                }
            }
            _ => {}
        }
        // any other token extends the open step
        match current.as_mut() {
            Some(step) if step.kind.takes_arguments() || !isar.is_empty() => {
                pending.clear();
                step.span.end = tok.span.end;
            }
            _ => return Err(TextError::UnexpectedText { offset: tok.span.start }),
        }
    }

    if let Some(&offset) = delims.first() {
        return Err(TextError::UnbalancedParens { offset });
    }
    if let Some(&offset) = isar.first() {
        return Err(TextError::UnclosedProofBlock { offset });
    }
    if let Some(mut last) = current {
        last.trailing_comments = pending;
        out.steps.push(last);
    }
    Ok(out)
}

/// Splits a proof body into its command sequence.
pub fn segment_proof(proof_text: &str) -> Result<ProofScript, TextError> {
    let tokens = tokenize(proof_text, Literals::Strict)?;
    let segmented = split_steps(&tokens)?;
    if segmented.steps.is_empty() {
        return Err(TextError::EmptyProof);
    }
    Ok(script_from(proof_text, &segmented))
}

pub(crate) fn script_from(src: &str, segmented: &Segmented) -> ProofScript {
    let steps = segmented
        .steps
        .iter()
        .enumerate()
        .map(|(index, s)| ProofStep { raw: src[s.span.clone()].to_string(), kind: s.kind, index })
        .collect();
    ProofScript { steps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raws(text: &str) -> Vec<String> {
        segment_proof(text).unwrap().steps.into_iter().map(|s| s.raw).collect()
    }

    #[test]
    fn single_by() {
        let s = segment_proof("by simp").unwrap();
        assert_eq!(s.steps.len(), 1);
        assert_eq!(s.steps[0].kind, StepKind::By);
        assert_eq!(s.steps[0].index, 0);
    }

    #[test]
    fn keywords_inside_parens_strings_and_comments_do_not_split() {
        let text = r#"apply (simp add: "by x" foo) (* apply done *) apply (rule by_foo) done"#;
        assert_eq!(raws(text), ["apply (simp add: \"by x\" foo)", "apply (rule by_foo)", "done"]);
    }

    #[test]
    fn combinators_stay_in_one_step() {
        assert_eq!(raws("by (wp foo | simp)+"), ["by (wp foo | simp)+"]);
    }

    #[test]
    fn isar_block_is_one_opaque_step() {
        let text = "using assms proof (induct xs)\n case Nil then show ?case by simp\n next\n case (Cons x xs) show ?case proof - have \"x\" by auto then show ?thesis by simp qed\nqed";
        let s = segment_proof(text).unwrap();
        assert_eq!(s.steps.len(), 2);
        assert_eq!(s.steps[0].kind, StepKind::Using);
        assert_eq!(s.steps[1].kind, StepKind::OpaqueIsar);
        assert!(s.steps[1].raw.ends_with("qed"));
    }

    #[test]
    fn unclosed_isar_block_is_an_error() {
        assert_eq!(
            segment_proof("proof - show ?thesis by simp"),
            Err(TextError::UnclosedProofBlock { offset: 0 })
        );
    }

    #[test]
    fn unbalanced_parens_reported() {
        assert!(matches!(segment_proof("apply (simp"), Err(TextError::UnbalancedParens { .. })));
        assert!(matches!(segment_proof("apply simp)"), Err(TextError::UnbalancedParens { .. })));
    }

    #[test]
    fn unterminated_comment_reported() {
        assert!(matches!(
            segment_proof("apply simp (* oops"),
            Err(TextError::UnterminatedComment { .. })
        ));
    }

    #[test]
    fn empty_and_comment_only_bodies() {
        assert_eq!(segment_proof("  \n"), Err(TextError::EmptyProof));
        assert_eq!(segment_proof("(* nothing *)"), Err(TextError::EmptyProof));
    }

    #[test]
    fn leading_garbage_is_rejected() {
        assert_eq!(segment_proof("simp done"), Err(TextError::UnexpectedText { offset: 0 }));
        assert!(matches!(segment_proof("done foo"), Err(TextError::UnexpectedText { .. })));
    }

    #[test]
    fn placeholder_is_its_own_step() {
        let s = segment_proof("apply auto sorry").unwrap();
        assert_eq!(s.steps.len(), 2);
        assert_eq!(s.steps[1].kind, StepKind::Placeholder);
        assert_eq!(s.steps[1].raw, "sorry");
    }

    #[test]
    fn trailing_comments_are_excluded_from_raw() {
        let s = segment_proof("apply simp (* why *)\ndone (* end *)").unwrap();
        assert_eq!(s.steps[0].raw, "apply simp");
        assert_eq!(s.steps[1].raw, "done");
    }

    #[test]
    fn from_command_classifies_without_splitting() {
        let s = ProofStep::from_command("  apply (simp, rule foo) done ", 3);
        assert_eq!(s.kind, StepKind::Apply);
        assert_eq!(s.raw, "apply (simp, rule foo) done");
        assert_eq!(ProofStep::from_command("have \"x\" by simp", 0).kind, StepKind::OpaqueIsar);
    }
}
