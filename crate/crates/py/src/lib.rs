//! Python bindings for the text, checker and metrics layers.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;

use proofforge_core::checker::{self, CheckerHandle, MockChecker};
use proofforge_core::cot;
use proofforge_core::digest;
use proofforge_core::metrics;
use proofforge_core::orchestrator::{JobResult, TheoremId};
use proofforge_core::text;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// snake_case name of a unit enum variant.
fn tag(v: impl Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

#[pyclass(module = "proofforge", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct ProofStep {
    raw: String,
    kind: String,
    index: usize,
}

#[pymethods]
impl ProofStep {
    fn __repr__(&self) -> String {
        format!("ProofStep({}, {:?})", self.kind, self.raw)
    }
}

impl From<&text::ProofStep> for ProofStep {
    fn from(s: &text::ProofStep) -> Self {
        ProofStep { raw: s.raw.clone(), kind: tag(s.kind), index: s.index }
    }
}

#[pyclass(module = "proofforge", frozen, get_all)]
pub struct Verdict {
    status: String,
    reason: Option<String>,
    remaining_subgoals: u32,
    messages: Vec<String>,
    success: bool,
}

#[pymethods]
impl Verdict {
    fn __repr__(&self) -> String {
        format!("Verdict({}, success={})", self.status, self.success)
    }
}

/// Rule-table checker loaded from a `mock_rules.jsonl` file.
#[pyclass(module = "proofforge", name = "MockChecker")]
pub struct PyMockChecker {
    handle: CheckerHandle,
}

#[pymethods]
impl PyMockChecker {
    #[new]
    fn new(path: &str) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| PyOSError::new_err(e.to_string()))?;
        let mock = MockChecker::from_jsonl(BufReader::new(file)).map_err(value_err)?;
        Ok(PyMockChecker { handle: CheckerHandle::Mock(mock) })
    }

    /// Checks `theorem` inside an already-substituted theory source.
    fn check(&self, theory_source: &str, theorem: &str) -> PyResult<Verdict> {
        let v = checker::check(&self.handle, theory_source, theorem).map_err(value_err)?;
        let entry = checker::find_theorem(theory_source, theorem).map_err(value_err)?;
        let success = checker::verdict_is_success(&v, entry.proof_text(theory_source));
        Ok(Verdict {
            status: tag(v.status),
            reason: v.reason.map(tag),
            remaining_subgoals: v.remaining_subgoals,
            messages: v.messages,
            success,
        })
    }

    fn __len__(&self) -> usize {
        match &self.handle {
            CheckerHandle::Mock(m) => m.len(),
            CheckerHandle::External(_) => 0,
        }
    }
}

#[pyfunction]
fn segment_proof(proof: &str) -> PyResult<Vec<ProofStep>> {
    let script = text::segment_proof(proof).map_err(value_err)?;
    Ok(script.steps.iter().map(ProofStep::from).collect())
}

#[pyfunction]
fn normalize_script(script: &str) -> PyResult<String> {
    text::normalize_script(script).map_err(value_err)
}

/// `(kind, byte_offset)` for each `sorry`/`oops` outside comments and literals.
#[pyfunction]
fn detect_placeholders(script: &str) -> PyResult<Vec<(String, usize)>> {
    let found = text::detect_placeholders(script).map_err(value_err)?;
    Ok(found.into_iter().map(|p| (tag(p.kind), p.location)).collect())
}

/// `(methods, facts, total)` for a proof script.
#[pyfunction]
#[pyo3(signature = (script, known_facts = None))]
fn count_methods(script: &str, known_facts: Option<Vec<String>>) -> PyResult<(Vec<String>, Vec<String>, usize)> {
    let parsed = text::segment_proof(script).map_err(value_err)?;
    let known: BTreeSet<String> = known_facts.unwrap_or_default().into_iter().collect();
    let c = text::count_methods(&parsed, &known).map_err(value_err)?;
    Ok((c.method_invocations, c.fact_references, c.total))
}

/// Steps plus `(step_index, text)` rationales of a `whole proof:` completion.
#[pyfunction]
fn parse_interleaved(proof: &str) -> PyResult<(Vec<ProofStep>, Vec<(usize, String)>)> {
    let p = text::parse_interleaved(proof).map_err(value_err)?;
    let steps = p.steps.steps.iter().map(ProofStep::from).collect();
    Ok((steps, p.rationales.into_iter().map(|r| (r.step_index, r.text)).collect()))
}

#[pyfunction]
fn strip_rationales(proof: &str) -> PyResult<String> {
    Ok(text::strip_rationales(&text::parse_interleaved(proof).map_err(value_err)?))
}

/// Empty when the rationale is acceptable, otherwise one tag per violation.
#[pyfunction]
fn validate_rationale(rationale: &str) -> Vec<String> {
    match cot::validate_rationale(rationale) {
        Ok(()) => Vec::new(),
        Err(vs) => vs
            .into_iter()
            .map(|v| match serde_json::to_value(&v).ok().and_then(|j| j["kind"].as_str().map(str::to_string)) {
                Some(k) => k,
                None => format!("{v:?}"),
            })
            .collect(),
    }
}

/// `(name, declaration, proof)` for every theorem in a theory source.
#[pyfunction]
fn parse_theory(source: &str) -> PyResult<Vec<(String, String, String)>> {
    let entries = text::parse_theory(source).map_err(value_err)?;
    Ok(entries.iter().map(|e| (e.name.clone(), e.declaration(), e.proof_text(source).to_string())).collect())
}

#[pyfunction]
fn substitute_proof(theory_source: &str, theorem: &str, new_proof: &str) -> PyResult<String> {
    checker::substitute_proof(theory_source, theorem, new_proof).map_err(value_err)
}

#[pyfunction]
fn sha256_hex(data: &str) -> String {
    digest::sha256_hex(data)
}

#[pyfunction]
fn render_percent(solved: u64, total: u64) -> String {
    metrics::render_percent(solved, total)
}

type ResultTuple = (String, String, String, Option<String>, Option<u32>);

fn job_results(results: Vec<ResultTuple>) -> Vec<JobResult> {
    results
        .into_iter()
        .map(|(project, theory, lemma, category, solving)| JobResult {
            theorem_id: TheoremId { project, theory, lemma },
            category,
            attempts: Vec::new(),
            solved: solving.is_some(),
            solving_attempt: solving,
        })
        .collect()
}

type Row = (String, String, u64, u64, String);

/// Per-category rows and the overall row, from
/// `(project, theory, lemma, category, solving_attempt)` tuples.
#[pyfunction]
#[pyo3(signature = (results, cap = None))]
fn success_rate(results: Vec<ResultTuple>, cap: Option<u32>) -> PyResult<(Vec<Row>, Row)> {
    let t = metrics::success_rate(&job_results(results), cap).map_err(value_err)?;
    let row = |r: &metrics::CategoryResult| (r.category.clone(), r.theory.clone(), r.solved, r.total, r.percent());
    Ok((t.rows.iter().map(row).collect(), row(&t.overall)))
}

/// `(cap, solved, total, percent)` per cap.
#[pyfunction]
fn budget_curve(results: Vec<ResultTuple>, caps: Vec<u32>) -> PyResult<Vec<(u32, u64, u64, String)>> {
    let c = metrics::budget_curve(&job_results(results), &caps).map_err(value_err)?;
    Ok(c.points.iter().map(|p| (p.cap, p.solved, p.total, p.percent())).collect())
}

/// `(compared, differing, percent)` over `(generated, original)` pairs.
#[pyfunction]
fn duplication_stats(pairs: Vec<(String, String)>) -> (u64, u64, String) {
    let d = metrics::duplication_stats(&pairs);
    (d.compared, d.differing, d.percent())
}

#[pymodule]
fn proofforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ProofStep>()?;
    m.add_class::<Verdict>()?;
    m.add_class::<PyMockChecker>()?;
    m.add_function(wrap_pyfunction!(segment_proof, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_script, m)?)?;
    m.add_function(wrap_pyfunction!(detect_placeholders, m)?)?;
    m.add_function(wrap_pyfunction!(count_methods, m)?)?;
    m.add_function(wrap_pyfunction!(parse_interleaved, m)?)?;
    m.add_function(wrap_pyfunction!(strip_rationales, m)?)?;
    m.add_function(wrap_pyfunction!(validate_rationale, m)?)?;
    m.add_function(wrap_pyfunction!(parse_theory, m)?)?;
    m.add_function(wrap_pyfunction!(substitute_proof, m)?)?;
    m.add_function(wrap_pyfunction!(sha256_hex, m)?)?;
    m.add_function(wrap_pyfunction!(render_percent, m)?)?;
    m.add_function(wrap_pyfunction!(success_rate, m)?)?;
    m.add_function(wrap_pyfunction!(budget_curve, m)?)?;
    m.add_function(wrap_pyfunction!(duplication_stats, m)?)?;
    m.add("PROVE_TEMPLATE", proofforge_core::prompts::PROVE_TEMPLATE)?;
    m.add("COT_TEMPLATE", proofforge_core::prompts::COT_TEMPLATE)?;
    Ok(())
}
