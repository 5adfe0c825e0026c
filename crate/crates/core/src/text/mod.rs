//! Structural analysis of Isabelle theory text and apply-style proof scripts.
//!
//! Parsing here is structural only: enough to locate and replace proofs,
//! segment them into commands, bind interleaved rationales, read proof
//! states and count methods. Terms are never type-checked.

pub mod interleaved;
pub mod lexer;
pub mod methods;
pub mod normalize;
pub mod placeholder;
pub mod script;
pub mod state;
pub mod theory;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use interleaved::{parse_interleaved, strip_rationales, InterleavedProof, Rationale, WHOLE_PROOF_HEADER};
pub use methods::{count_methods, MethodCount};
pub use normalize::normalize_script;
pub use placeholder::{detect_placeholders, Placeholder, PlaceholderKind};
pub use script::{segment_proof, ProofScript, ProofStep, StepKind};
pub use state::{parse_proof_state, ProofState, Sequent};
pub use theory::{parse_theory, TheoremEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("unterminated comment starting at byte {offset}")]
    UnterminatedComment { offset: usize },
    #[error("unterminated string or cartouche starting at byte {offset}")]
    UnterminatedString { offset: usize },
    #[error("unbalanced parenthesis or bracket at byte {offset}")]
    UnbalancedParens { offset: usize },
    #[error("declaration `{name}` at byte {offset} has no proof body")]
    MissingProofBody { name: String, offset: usize },
    #[error("proof text contains no commands")]
    EmptyProof,
    #[error("text at byte {offset} is not part of any proof command")]
    UnexpectedText { offset: usize },
    #[error("`proof` block opened at byte {offset} is never closed by `qed`")]
    UnclosedProofBlock { offset: usize },
    #[error("no proof steps found")]
    NoStepsFound,
    #[error("rationale comment at byte {offset} precedes every proof step")]
    DanglingRationale { offset: usize },
    #[error("goal header declares {declared} subgoals but {parsed} were parsed")]
    HeaderCountMismatch { declared: usize, parsed: usize },
    #[error("malformed subgoal line: {line}")]
    MalformedSubgoalLine { line: String },
}

/// Serializable byte range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn range(self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(self) -> bool {
        self.start == self.end
    }
}

impl From<Range<usize>> for Span {
    fn from(r: Range<usize>) -> Self {
        Span { start: r.start, end: r.end }
    }
}
