//! Structured CoT-generation inputs and prompt rendering.

use serde::{Deserialize, Serialize};

use super::trace::ProofTraceRecord;
use crate::prompts::COT_TEMPLATE;

pub const SOURCE_LEMMA_HEADER: &str = "(** Source lemma **)";
pub const STATE_BEFORE_HEADER: &str = "(** Proof state before applying this step **)";
pub const STEP_HEADER: &str = "(** Proof step **)";
pub const STATE_AFTER_HEADER: &str = "(** Proof state after applying this step **)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoTInput {
    pub source_lemma: String,
    pub state_before: String,
    pub step: String,
    pub state_after: String,
}

impl CoTInput {
    /// The four headed blocks in fixed order, newline-terminated.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (header, body) in [
            (SOURCE_LEMMA_HEADER, &self.source_lemma),
            (STATE_BEFORE_HEADER, &self.state_before),
            (STEP_HEADER, &self.step),
            (STATE_AFTER_HEADER, &self.state_after),
        ] {
            out.push_str(header);
            out.push('\n');
            out.push_str(body);
            if !body.ends_with('\n') {
                out.push('\n');
            }
        }
        out
    }
}

/// Where a CoT instance came from; carried in `cot.jsonl` for hold-out
/// auditing and statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoTMetadata {
    #[serde(default)]
    pub lemma_name: String,
    #[serde(default)]
    pub theory_name: String,
    #[serde(default)]
    pub project: String,
    #[serde(default)]
    pub category: String,
}

impl From<&ProofTraceRecord> for CoTMetadata {
    fn from(r: &ProofTraceRecord) -> Self {
        CoTMetadata {
            lemma_name: r.lemma_name.clone(),
            theory_name: r.theory_name.clone(),
            project: r.project.clone(),
            category: r.category.clone(),
        }
    }
}

/// One `cot.jsonl` row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoTInstance {
    #[serde(flatten)]
    pub input: CoTInput,
    pub rationale: String,
    #[serde(flatten)]
    pub metadata: CoTMetadata,
}

/// Copies the step and both states verbatim. The source lemma is the
/// statement itself when it already reads as a declaration, otherwise
/// `lemma NAME:` followed by the indented statement.
pub fn build_cot_input(record: &ProofTraceRecord) -> CoTInput {
    let statement = record.lemma_statement.trim_start();
    let source_lemma = if statement.starts_with("lemma ") || statement.starts_with("theorem ") {
        record.lemma_statement.clone()
    } else {
        format!("lemma {}:\n  {}", record.lemma_name, record.lemma_statement)
    };
    CoTInput {
        source_lemma,
        state_before: record.state_before.clone(),
        step: record.step.clone(),
        state_after: record.state_after.clone(),
    }
}

pub fn render_cot_prompt(input: &CoTInput) -> String {
    render_cot_prompt_with(COT_TEMPLATE, input)
}

/// Template, one blank line, then the structured block.
pub fn render_cot_prompt_with(template: &str, input: &CoTInput) -> String {
    let mut out = template.to_string();
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&input.render());
    out
}
