use thiserror::Error;

use crate::text::{parse_theory, TextError, TheoremEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstitutionError {
    #[error("theorem `{0}` not found")]
    TheoremNotFound(String),
    #[error("theorem name `{0}` is declared more than once")]
    AmbiguousTheorem(String),
    #[error("theory does not parse: {0}")]
    Parse(#[from] TextError),
    #[error("theorem `{0}` no longer parses to the substituted proof")]
    SpanCorruption(String),
}

/// The unique entry named `name`.
pub fn find_theorem(source: &str, name: &str) -> Result<TheoremEntry, SubstitutionError> {
    let mut hits = parse_theory(source)?.into_iter().filter(|e| e.name == name);
    let first = hits.next().ok_or_else(|| SubstitutionError::TheoremNotFound(name.into()))?;
    if hits.next().is_some() {
        return Err(SubstitutionError::AmbiguousTheorem(name.into()));
    }
    Ok(first)
}

/// Replaces the proof body of `theorem_name` with `new_proof` (trimmed),
/// leaving every other byte untouched, and checks that the result still
/// parses to that proof.
pub fn substitute_proof(
    theory_source: &str,
    theorem_name: &str,
    new_proof: &str,
) -> Result<String, SubstitutionError> {
    let entry = find_theorem(theory_source, theorem_name)?;
    let new_proof = new_proof.trim();
    let span = entry.proof_span.range();
    let mut out = String::with_capacity(theory_source.len() - span.len() + new_proof.len());
    out.push_str(&theory_source[..span.start]);
    out.push_str(new_proof);
    out.push_str(&theory_source[span.end..]);

    let corrupt = || SubstitutionError::SpanCorruption(theorem_name.into());
    let reparsed = find_theorem(&out, theorem_name).map_err(|_| corrupt())?;
    if reparsed.proof_span.start != span.start || reparsed.proof_text(&out) != new_proof {
        return Err(corrupt());
    }
    Ok(out)
}
