//! Heuristic audit of step rationales.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::render_percent;
use crate::cot::{validate_rationale, ProofContext, Violation};
use crate::orchestrator::TheoremId;
use crate::text::{InterleavedProof, StepKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlagReason {
    UnknownIdentifierReference,
    FirstPerson,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationaleFlag {
    pub theorem_id: TheoremId,
    pub step_index: usize,
    pub step_kind: StepKind,
    pub reason: FlagReason,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub identifiers: Vec<String>,
}

static IDENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z_][A-Za-z0-9_'.]*").unwrap());
static BACKTICKED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"`([^`]*)`").unwrap());

fn identifiers(text: &str) -> impl Iterator<Item = &str> {
    IDENT.find_iter(text).map(|m| m.as_str().trim_end_matches(['.', '\'']))
}

/// Identifiers a rationale is taken to cite: anything with an underscore,
/// and backtick-quoted qualified names such as `Cons.IH`.
fn cited(rationale: &str) -> BTreeSet<&str> {
    let mut out: BTreeSet<&str> = identifiers(rationale).filter(|w| w.contains('_')).collect();
    for cap in BACKTICKED.captures_iter(rationale) {
        let inner = cap.get(1).map_or("", |m| m.as_str());
        out.extend(identifiers(inner).filter(|w| w.contains('.')));
    }
    out.remove("_");
    out
}

fn is_known(name: &str, known: &BTreeSet<String>) -> bool {
    if known.contains(name) {
        return true;
    }
    if let Some(base) = name.strip_suffix("_def") {
        if known.contains(base) {
            return true;
        }
    }
    if known.contains(&format!("{name}_def")) {
        return true;
    }
    // `sameFor_*` style families
    name.ends_with('_') && known.iter().any(|k| k.starts_with(name))
}

/// Flags per step. Unknown references are names absent from every step of
/// the proof and from the context; first-person and empty flags follow
/// [`validate_rationale`]. A step without a rationale is flagged `Empty`.
pub fn rationale_flags(theorem_id: &TheoremId, proof: &InterleavedProof, context: &ProofContext) -> Vec<RationaleFlag> {
    let mut known: BTreeSet<String> = context.names().map(str::to_string).collect();
    for step in &proof.steps.steps {
        for w in identifiers(&step.raw) {
            known.insert(w.to_string());
            known.extend(w.split('.').filter(|p| !p.is_empty()).map(str::to_string));
        }
    }

    let mut flags = Vec::new();
    for (i, step) in proof.steps.steps.iter().enumerate() {
        let flag = |reason, identifiers| RationaleFlag {
            theorem_id: theorem_id.clone(),
            step_index: i,
            step_kind: step.kind,
            reason,
            identifiers,
        };
        let Some(rationale) = proof.rationale_for(i) else {
            flags.push(flag(FlagReason::Empty, Vec::new()));
            continue;
        };
        if let Err(violations) = validate_rationale(&rationale.text) {
            for v in violations {
                match v {
                    Violation::Empty => flags.push(flag(FlagReason::Empty, Vec::new())),
                    Violation::FirstPerson { phrase } => flags.push(flag(FlagReason::FirstPerson, vec![phrase])),
                    _ => {}
                }
            }
        }
        let unknown: Vec<String> =
            cited(&rationale.text).into_iter().filter(|c| !is_known(c, &known)).map(str::to_string).collect();
        if !unknown.is_empty() {
            flags.push(flag(FlagReason::UnknownIdentifierReference, unknown));
        }
    }
    flags
}

/// Flag counts split between `done` steps and all others. The non-`done`
/// rate is given over both possible denominators.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationaleAudit {
    pub proofs: u64,
    pub total_steps: u64,
    pub done_steps: u64,
    pub flagged_done_steps: u64,
    pub flagged_other_steps: u64,
    pub flags: Vec<RationaleFlag>,
}

impl RationaleAudit {
    /// Flagged non-`done` steps over every audited step.
    pub fn other_rate_over_all_steps(&self) -> String {
        render_percent(self.flagged_other_steps, self.total_steps)
    }

    /// Flagged non-`done` steps over non-`done` steps.
    pub fn other_rate_over_other_steps(&self) -> String {
        render_percent(self.flagged_other_steps, self.total_steps - self.done_steps)
    }
}

pub fn rationale_audit(entries: &[(TheoremId, InterleavedProof, ProofContext)]) -> RationaleAudit {
    let mut audit = RationaleAudit { proofs: entries.len() as u64, ..RationaleAudit::default() };
    for (id, proof, context) in entries {
        let flags = rationale_flags(id, proof, context);
        let flagged: BTreeSet<usize> = flags.iter().map(|f| f.step_index).collect();
        for (i, step) in proof.steps.steps.iter().enumerate() {
            let is_done = step.kind == StepKind::Done;
            audit.total_steps += 1;
            audit.done_steps += u64::from(is_done);
            if flagged.contains(&i) {
                if is_done {
                    audit.flagged_done_steps += 1;
                } else {
                    audit.flagged_other_steps += 1;
                }
            }
        }
        audit.flags.extend(flags);
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cot::{ContextItem, ContextKind};
    use crate::text::parse_interleaved;

    fn id() -> TheoremId {
        TheoremId { project: "p".into(), theory: "T".into(), lemma: "l".into() }
    }

    #[test]
    fn done_citing_unrelated_lemma() {
        let p = parse_interleaved("apply simp\n(* Simplifies. *)\ndone\n(* Follows from lemma foo_bar. *)").unwrap();
        let flags = rationale_flags(&id(), &p, &ProofContext::default());
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].reason, FlagReason::UnknownIdentifierReference);
        assert_eq!(flags[0].step_kind, StepKind::Done);
        assert_eq!(flags[0].identifiers, ["foo_bar"]);

        let ctx = ProofContext::new(vec![ContextItem {
            name: "foo_bar".into(),
            kind: ContextKind::Lemma,
            text: String::new(),
        }])
        .unwrap();
        assert!(rationale_flags(&id(), &p, &ctx).is_empty());
    }

    #[test]
    fn def_suffix_and_families() {
        let p = parse_interleaved(
            "apply (simp add: sameFor_def sameFor_subject_def foo)\n(* Unfolds `sameFor_*` and `foo_def`, using `sameFor`. *)\ndone\n(* Done. *)",
        )
        .unwrap();
        assert!(rationale_flags(&id(), &p, &ProofContext::default()).is_empty());
    }

    #[test]
    fn first_person_and_missing() {
        let p = parse_interleaved("apply simp\n(* Let me simplify. *)\ndone").unwrap();
        let reasons: Vec<_> = rationale_flags(&id(), &p, &ProofContext::default()).iter().map(|f| f.reason).collect();
        assert_eq!(reasons, [FlagReason::FirstPerson, FlagReason::Empty]);
    }

    #[test]
    fn audit_denominators() {
        let p = parse_interleaved("apply simp\n(* I think. *)\napply auto\n(* ok *)\ndone\n(* uses zzz_q *)").unwrap();
        let a = rationale_audit(&[(id(), p, ProofContext::default())]);
        assert_eq!((a.total_steps, a.done_steps, a.flagged_done_steps, a.flagged_other_steps), (3, 1, 1, 1));
        assert_eq!(a.other_rate_over_all_steps(), "33.33%");
        assert_eq!(a.other_rate_over_other_steps(), "50.00%");
    }
}
