//! Budgeted proof generation: one prompt per theorem, up to `max_attempts`
//! sampled completions, each parsed, substituted and checked.

pub mod backend;
pub mod prompt;

use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backend::{
    BackendError, HttpBackend, HttpConfig, ProverBackend, ReplayBackend, ReplayEntry, SamplingParams,
    WILDCARD_DIGEST,
};
pub use prompt::{render_proof_prompt, render_proof_prompt_with};

use crate::checker::{
    check, substitute_proof, verdict_is_success, CheckerHandle, CheckerVerdict, RejectReason,
};
use crate::cot::{HoldoutKey, ProofContext};
use crate::digest::sha256_hex;
use crate::prompts::PROVE_TEMPLATE;
use crate::text::{parse_interleaved, strip_rationales, TheoremEntry};

pub type TheoremId = HoldoutKey;

pub const DEFAULT_MAX_ATTEMPTS: u32 = 256;

#[derive(Debug, Clone)]
pub struct GenerationJob {
    pub project: String,
    pub theorem: TheoremEntry,
    pub context: ProofContext,
    pub theory_source: String,
    pub max_attempts: u32,
    pub sampling: SamplingParams,
    pub include_context: bool,
}

impl GenerationJob {
    pub fn new(project: impl Into<String>, theorem: TheoremEntry, theory_source: impl Into<String>) -> Self {
        GenerationJob {
            project: project.into(),
            theorem,
            context: ProofContext::default(),
            theory_source: theory_source.into(),
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            sampling: SamplingParams::default(),
            include_context: true,
        }
    }

    pub fn theorem_id(&self) -> TheoremId {
        TheoremId {
            project: self.project.clone(),
            theory: self.theorem.theory_name.clone(),
            lemma: self.theorem.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub theorem_id: TheoremId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// 1-based.
    pub attempt_index: u32,
    pub prompt_digest: String,
    pub completion: String,
    pub verdict: CheckerVerdict,
    pub success: bool,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobResult {
    pub theorem_id: TheoremId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub attempts: Vec<AttemptRecord>,
    pub solved: bool,
    pub solving_attempt: Option<u32>,
}

impl JobResult {
    /// Rebuilds a result from logged attempts, honoring stop-on-success.
    pub fn from_attempts(theorem_id: TheoremId, category: Option<String>, mut attempts: Vec<AttemptRecord>) -> Self {
        attempts.sort_by_key(|a| a.attempt_index);
        let solving_attempt = attempts.iter().find(|a| a.success).map(|a| a.attempt_index);
        if let Some(k) = solving_attempt {
            attempts.retain(|a| a.attempt_index <= k);
        }
        JobResult { theorem_id, category, attempts, solved: solving_attempt.is_some(), solving_attempt }
    }

    /// The checked script of the solving attempt.
    pub fn solving_script(&self) -> Option<String> {
        let k = self.solving_attempt?;
        let a = self.attempts.iter().find(|a| a.attempt_index == k)?;
        parse_interleaved(&a.completion).ok().map(|p| strip_rationales(&p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("job for {:?} aborted after {} attempts: {error}", partial.theorem_id, partial.attempts.len())]
pub struct JobAborted {
    pub error: BackendError,
    pub partial: JobResult,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Attempts dispatched concurrently within one job.
    pub width: usize,
    pub prove_template: String,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { width: 1, prove_template: PROVE_TEMPLATE.to_string() }
    }
}

pub fn run_job(
    job: &GenerationJob,
    backend: &dyn ProverBackend,
    checker: &CheckerHandle,
) -> Result<JobResult, JobAborted> {
    run_job_with(job, backend, checker, &RunOptions::default())
}

/// Attempts run in waves of `width`; within a wave results are taken in
/// index order, so the lowest-index success wins whatever finished first.
pub fn run_job_with(
    job: &GenerationJob,
    backend: &dyn ProverBackend,
    checker: &CheckerHandle,
    options: &RunOptions,
) -> Result<JobResult, JobAborted> {
    let prompt =
        render_proof_prompt_with(&options.prove_template, &job.theorem, &job.context, job.include_context);
    let digest = sha256_hex(&prompt);
    let width = options.width.min(backend.max_concurrency().unwrap_or(usize::MAX)).max(1) as u32;
    let id = job.theorem_id();
    let category = job.theorem.category.clone();
    let max = job.max_attempts.max(1);

    let mut attempts = Vec::new();
    let mut next = 1;
    while next <= max {
        let wave: Vec<u32> = (next..=max.min(next + width - 1)).collect();
        let outcomes: Vec<Result<AttemptRecord, BackendError>> = if wave.len() == 1 {
            vec![attempt(job, backend, checker, &prompt, &digest, wave[0])]
        } else {
            thread::scope(|s| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|&k| {
                        let (prompt, digest) = (&prompt, &digest);
                        s.spawn(move || attempt(job, backend, checker, prompt, digest, k))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(BackendError::Unavailable("worker panicked".into()))))
                    .collect()
            })
        };
        for outcome in outcomes {
            match outcome {
                Ok(record) => {
                    let done = record.success;
                    attempts.push(record);
                    if done {
                        return Ok(JobResult::from_attempts(id, category, attempts));
                    }
                }
                Err(error) => {
                    return Err(JobAborted { error, partial: JobResult::from_attempts(id, category, attempts) })
                }
            }
        }
        next += width;
    }
    Ok(JobResult::from_attempts(id, category, attempts))
}

fn attempt(
    job: &GenerationJob,
    backend: &dyn ProverBackend,
    checker: &CheckerHandle,
    prompt: &str,
    digest: &str,
    attempt_index: u32,
) -> Result<AttemptRecord, BackendError> {
    let started = Instant::now();
    let completion = backend.generate(prompt, &job.sampling.for_attempt(attempt_index))?;
    let (verdict, success) = evaluate(job, checker, &completion);
    Ok(AttemptRecord {
        theorem_id: job.theorem_id(),
        category: job.theorem.category.clone(),
        attempt_index,
        prompt_digest: digest.to_string(),
        completion,
        verdict,
        success,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

/// Parse, strip rationales, substitute, check. Anything that goes wrong
/// before the checker runs is a rejected attempt with `ParseError`.
pub fn evaluate(job: &GenerationJob, checker: &CheckerHandle, completion: &str) -> (CheckerVerdict, bool) {
    let parse_failure =
        |msg: String| (CheckerVerdict::rejected(RejectReason::ParseError).with_message(msg), false);
    let proof = match parse_interleaved(completion) {
        Ok(p) => p,
        Err(e) => return parse_failure(e.to_string()),
    };
    let script = strip_rationales(&proof);
    let theory = match substitute_proof(&job.theory_source, &job.theorem.name, &script) {
        Ok(t) => t,
        Err(e) => return parse_failure(e.to_string()),
    };
    let verdict = match check(checker, &theory, &job.theorem.name) {
        Ok(v) => v,
        Err(e) => return (e.to_verdict(), false),
    };
    let success = verdict_is_success(&verdict, &script);
    (verdict, success)
}
