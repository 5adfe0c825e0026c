use crate::cot::ProofContext;
use crate::prompts::PROVE_TEMPLATE;
use crate::text::TheoremEntry;

pub fn render_proof_prompt(theorem: &TheoremEntry, context: &ProofContext, include_context: bool) -> String {
    render_proof_prompt_with(PROVE_TEMPLATE, theorem, context, include_context)
}

/// Template, a blank line, the declaration, then the context block when
/// `include_context` is set.
pub fn render_proof_prompt_with(
    template: &str,
    theorem: &TheoremEntry,
    context: &ProofContext,
    include_context: bool,
) -> String {
    let mut out = template.to_string();
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&theorem.declaration());
    out.push('\n');
    if include_context {
        out.push_str(&context.render());
        out.push('\n');
    }
    out
}
