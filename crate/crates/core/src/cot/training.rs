//! Training instances: lemma plus proof context in, interleaved proof out.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::input::CoTMetadata;
use super::rationale::{validate_rationale, Violation};
use crate::text::{parse_interleaved, InterleavedProof, TheoremEntry, WHOLE_PROOF_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    Definition,
    Lemma,
}

impl ContextKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ContextKind::Definition => "definition",
            ContextKind::Lemma => "lemma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextItem {
    pub name: String,
    pub kind: ContextKind,
    pub text: String,
}

/// Definitions and lemmas supplied alongside a target theorem. Names are
/// unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ContextItem>", into = "Vec<ContextItem>")]
pub struct ProofContext {
    items: Vec<ContextItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("context item `{0}` appears twice")]
    DuplicateName(String),
}

impl TryFrom<Vec<ContextItem>> for ProofContext {
    type Error = ContextError;

    fn try_from(items: Vec<ContextItem>) -> Result<Self, ContextError> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.name.as_str()) {
                return Err(ContextError::DuplicateName(item.name.clone()));
            }
        }
        Ok(ProofContext { items })
    }
}

impl From<ProofContext> for Vec<ContextItem> {
    fn from(c: ProofContext) -> Self {
        c.items
    }
}

impl ProofContext {
    pub fn new(items: Vec<ContextItem>) -> Result<Self, ContextError> {
        items.try_into()
    }

    pub fn items(&self) -> &[ContextItem] {
        &self.items
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.name.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `proof context:` followed by one line per item, definitions first,
    /// otherwise in insertion order.
    pub fn render(&self) -> String {
        let mut items: Vec<&ContextItem> = self.items.iter().collect();
        items.sort_by_key(|i| i.kind);
        let mut out = String::from("proof context:");
        for item in items {
            out.push('\n');
            out.push_str(&format!("{} {}: {}", item.kind.keyword(), item.name, item.text));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingInstance {
    pub input: String,
    pub output: String,
    #[serde(skip)]
    pub metadata: CoTMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssemblyError {
    #[error("step {step_index} has no rationale")]
    MissingRationale { step_index: usize },
    #[error("rationale of step {step_index} is invalid: {violations:?}")]
    InvalidRationale { step_index: usize, violations: Vec<Violation> },
    #[error("assembled output does not parse back to the same proof")]
    RoundTrip,
}

/// Renders the training pair. The output re-parses to exactly `proof`.
pub fn assemble_training_instance(
    theorem: &TheoremEntry,
    context: &ProofContext,
    proof: &InterleavedProof,
) -> Result<TrainingInstance, AssemblyError> {
    let mut output = String::from(WHOLE_PROOF_HEADER);
    for (i, step) in proof.steps.steps.iter().enumerate() {
        let rationale =
            proof.rationale_for(i).ok_or(AssemblyError::MissingRationale { step_index: i })?;
        let text = rationale.text.trim();
        validate_rationale(text)
            .map_err(|violations| AssemblyError::InvalidRationale { step_index: i, violations })?;
        let comment = format!("(* {text} *)");
        if !embeds_cleanly(&comment) {
            return Err(AssemblyError::InvalidRationale {
                step_index: i,
                violations: vec![Violation::CommentDelimiter],
            });
        }
        output.push('\n');
        output.push_str(step.raw.trim());
        output.push('\n');
        output.push_str(&comment);
    }

    let reparsed = parse_interleaved(&output).map_err(|_| AssemblyError::RoundTrip)?;
    let same_steps = reparsed.steps.steps.len() == proof.steps.steps.len()
        && reparsed.steps.steps.iter().zip(&proof.steps.steps).all(|(a, b)| a.raw == b.raw.trim() && a.kind == b.kind);
    let same_rationales = reparsed.rationales.len() == proof.steps.len()
        && reparsed.rationales.iter().all(|r| {
            proof.rationale_for(r.step_index).is_some_and(|o| o.text.trim() == r.text)
        });
    if !(same_steps && same_rationales) {
        return Err(AssemblyError::RoundTrip);
    }

    let input = format!("{}\n{}", theorem.declaration(), context.render());
    let metadata = CoTMetadata {
        lemma_name: theorem.name.clone(),
        theory_name: theorem.theory_name.clone(),
        project: String::new(),
        category: theorem.category.clone().unwrap_or_default(),
    };
    Ok(TrainingInstance { input, output, metadata })
}

fn embeds_cleanly(comment: &str) -> bool {
    crate::text::lexer::scan(comment, crate::text::lexer::Literals::Lenient)
        .is_ok_and(|regions| regions.len() == 1)
}

/// Fine-tuning hyperparameters, recorded next to the dataset and never
/// executed here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub precision: String,
    pub max_seq_len: u32,
    pub per_device_batch: u32,
    pub grad_accum: u32,
    pub epochs: u32,
    pub lr_schedule: String,
    pub warmup_ratio: f64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_grad_norm: f64,
    pub optimizer: String,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            precision: "bf16".into(),
            max_seq_len: 8192,
            per_device_batch: 1,
            grad_accum: 32,
            epochs: 10,
            lr_schedule: "cosine".into(),
            warmup_ratio: 0.03,
            learning_rate: 5e-6,
            weight_decay: 0.05,
            max_grad_norm: 0.3,
            optimizer: "paged_adamw_8bit".into(),
        }
    }
}

impl TrainingConfig {
    pub fn effective_batch(&self) -> u32 {
        self.per_device_batch * self.grad_accum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{Rationale, Span};

    fn theorem() -> TheoremEntry {
        TheoremEntry {
            name: "foo".into(),
            attributes: vec!["simp".into()],
            statement: "\"x = x\"".into(),
            proof_span: Span { start: 0, end: 0 },
            category: Some("c".into()),
            theory_name: "T".into(),
        }
    }

    fn proof(text: &str) -> InterleavedProof {
        parse_interleaved(text).unwrap()
    }

    #[test]
    fn context_orders_definitions_first() {
        let ctx = ProofContext::new(vec![
            ContextItem { name: "l".into(), kind: ContextKind::Lemma, text: "\"P\"".into() },
            ContextItem { name: "d".into(), kind: ContextKind::Definition, text: "\"d = 1\"".into() },
        ])
        .unwrap();
        assert_eq!(ctx.render(), "proof context:\ndefinition d: \"d = 1\"\nlemma l: \"P\"");
    }

    #[test]
    fn duplicate_context_names_rejected() {
        let item = ContextItem { name: "x".into(), kind: ContextKind::Lemma, text: String::new() };
        assert!(ProofContext::new(vec![item.clone(), item.clone()]).is_err());
        let json = serde_json::to_string(&vec![item.clone(), item]).unwrap();
        assert!(serde_json::from_str::<ProofContext>(&json).is_err());
    }

    #[test]
    fn assembles_and_round_trips() {
        let p = proof("apply (simp)\n(* a *)\napply auto\n(* b *)\ndone\n(* c *)");
        let inst = assemble_training_instance(&theorem(), &ProofContext::default(), &p).unwrap();
        assert_eq!(inst.input, "lemma foo[simp]: \"x = x\"\nproof context:");
        assert_eq!(inst.output, "whole proof:\napply (simp)\n(* a *)\napply auto\n(* b *)\ndone\n(* c *)");
        assert_eq!(parse_interleaved(&inst.output).unwrap(), p);
    }

    #[test]
    fn missing_rationale_index() {
        let p = proof("apply simp\n(* a *)\napply auto\ndone\n(* c *)");
        assert_eq!(
            assemble_training_instance(&theorem(), &ProofContext::default(), &p),
            Err(AssemblyError::MissingRationale { step_index: 1 })
        );
    }

    #[test]
    fn invalid_rationales() {
        let p = proof("by simp (* I think so *)");
        assert!(matches!(
            assemble_training_instance(&theorem(), &ProofContext::default(), &p),
            Err(AssemblyError::InvalidRationale { step_index: 0, .. })
        ));
        let mut p = proof("by simp (* ok *)");
        p.rationales = vec![Rationale { text: "closes *) early".into(), step_index: 0 }];
        assert_eq!(
            assemble_training_instance(&theorem(), &ProofContext::default(), &p),
            Err(AssemblyError::InvalidRationale {
                step_index: 0,
                violations: vec![Violation::CommentDelimiter]
            })
        );
    }

    #[test]
    fn config_defaults() {
        let c = TrainingConfig::default();
        assert_eq!(c.effective_batch(), 32);
        assert_eq!(c.learning_rate, 5e-6);
        let back: TrainingConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
