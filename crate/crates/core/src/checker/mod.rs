//! Proof substitution, checking, and the success predicate.

pub mod external;
pub mod mock;
pub mod substitute;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use external::{ExternalChecker, ExternalConfig};
pub use mock::{MockChecker, MockRule, TheoremKey};
pub use substitute::{find_theorem, substitute_proof, SubstitutionError};

use crate::text::{detect_placeholders, Placeholder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    ParseError,
    CheckerError,
    Timeout,
    UnknownFixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckerVerdict {
    pub status: VerdictStatus,
    #[serde(default)]
    pub remaining_subgoals: u32,
    #[serde(default)]
    pub messages: Vec<String>,
    #[serde(default)]
    pub placeholders_found: Vec<Placeholder>,
    #[serde(default)]
    pub reason: Option<RejectReason>,
}

impl CheckerVerdict {
    pub fn accepted() -> Self {
        CheckerVerdict {
            status: VerdictStatus::Accepted,
            remaining_subgoals: 0,
            messages: Vec::new(),
            placeholders_found: Vec::new(),
            reason: None,
        }
    }

    pub fn rejected(reason: RejectReason) -> Self {
        CheckerVerdict {
            status: VerdictStatus::Rejected,
            remaining_subgoals: 0,
            messages: Vec::new(),
            placeholders_found: Vec::new(),
            reason: Some(reason),
        }
    }

    pub fn with_message(mut self, message: impl Into<String>) -> Self {
        self.messages.push(message.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckerError {
    #[error("checker failed: {0}")]
    Process(String),
    #[error("checker timed out after {seconds}s")]
    Timeout { seconds: u64 },
    #[error("checker configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Theory(#[from] SubstitutionError),
}

impl CheckerError {
    /// The verdict recorded for an attempt whose check failed this way.
    pub fn to_verdict(&self) -> CheckerVerdict {
        let reason = match self {
            CheckerError::Timeout { .. } => RejectReason::Timeout,
            CheckerError::Theory(_) => RejectReason::ParseError,
            _ => RejectReason::CheckerError,
        };
        CheckerVerdict::rejected(reason).with_message(self.to_string())
    }
}

#[derive(Debug)]
pub enum CheckerHandle {
    Mock(MockChecker),
    External(ExternalChecker),
}

/// Checks `theorem_name` in an already-substituted theory. Placeholders
/// are searched in the theorem's own proof body only.
pub fn check(
    handle: &CheckerHandle,
    theory_source: &str,
    theorem_name: &str,
) -> Result<CheckerVerdict, CheckerError> {
    let entry = find_theorem(theory_source, theorem_name)?;
    let body = entry.proof_text(theory_source);
    match handle {
        CheckerHandle::Mock(m) => Ok(m.lookup(&entry.theory_name, &entry.name, body)),
        CheckerHandle::External(x) => {
            let mut verdict = x.run(&entry.theory_name, theory_source)?;
            verdict.placeholders_found = detect_placeholders(body).unwrap_or_default();
            Ok(verdict)
        }
    }
}

/// Accepted, no goals left, and no `sorry`/`oops` in the submitted body.
pub fn verdict_is_success(verdict: &CheckerVerdict, proof_body: &str) -> bool {
    verdict.status == VerdictStatus::Accepted
        && verdict.remaining_subgoals == 0
        && detect_placeholders(proof_body).is_ok_and(|p| p.is_empty())
}
