//! `trace.jsonl` ingestion.

use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::holdout::HoldoutKey;

/// One proof step with the goal states around it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTraceRecord {
    pub lemma_name: String,
    pub lemma_statement: String,
    pub state_before: String,
    pub step: String,
    pub state_after: String,
    pub theory_name: String,
    pub category: String,
    pub project: String,
}

impl ProofTraceRecord {
    pub fn key(&self) -> HoldoutKey {
        HoldoutKey {
            project: self.project.clone(),
            theory: self.theory_name.clone(),
            lemma: self.lemma_name.clone(),
        }
    }
}

/// Schema order; the first offending field of a line is reported.
pub const TRACE_FIELDS: [&str; 8] = [
    "lemma_name",
    "lemma_statement",
    "state_before",
    "step",
    "state_after",
    "theory_name",
    "category",
    "project",
];

const NONEMPTY_FIELDS: [&str; 4] = ["lemma_name", "step", "state_before", "state_after"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordErrorKind {
    Malformed,
    Missing,
    IllTyped,
    Empty,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("line {line}: {kind:?}{}", field.as_deref().map(|f| format!(" field `{f}`")).unwrap_or_default())]
pub struct RecordError {
    /// 1-based.
    pub line: usize,
    pub field: Option<String>,
    pub kind: RecordErrorKind,
}

/// Reads one record per non-blank line. Bad lines become [`RecordError`]s
/// and never stop the stream; only I/O failures are fatal.
pub fn ingest_traces<R: BufRead>(
    source: R,
) -> io::Result<(Vec<ProofTraceRecord>, Vec<RecordError>)> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(r) => records.push(r),
            Err((field, kind)) => errors.push(RecordError { line: i + 1, field, kind }),
        }
    }
    Ok((records, errors))
}

fn parse_line(line: &str) -> Result<ProofTraceRecord, (Option<String>, RecordErrorKind)> {
    let obj: Map<String, Value> = match serde_json::from_str(line) {
        Ok(Value::Object(obj)) => obj,
        _ => return Err((None, RecordErrorKind::Malformed)),
    };
    let mut values = Vec::with_capacity(TRACE_FIELDS.len());
    for field in TRACE_FIELDS {
        let err = |kind| Err((Some(field.to_string()), kind));
        match obj.get(field) {
            None => return err(RecordErrorKind::Missing),
            Some(Value::String(s)) if s.trim().is_empty() && NONEMPTY_FIELDS.contains(&field) => {
                return err(RecordErrorKind::Empty)
            }
            Some(Value::String(s)) => values.push(s.clone()),
            Some(_) => return err(RecordErrorKind::IllTyped),
        }
    }
    if let Some(extra) = obj.keys().find(|k| !TRACE_FIELDS.contains(&k.as_str())) {
        return Err((Some(extra.clone()), RecordErrorKind::Unknown));
    }
    let mut v = values.into_iter();
    let mut next = || v.next().unwrap_or_default();
    Ok(ProofTraceRecord {
        lemma_name: next(),
        lemma_statement: next(),
        state_before: next(),
        step: next(),
        state_after: next(),
        theory_name: next(),
        category: next(),
        project: next(),
    })
}
