//! One function per subcommand. Each reads only its declared inputs, writes
//! its outputs atomically under the output directory, and records both in a
//! run manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use proofforge_core::checker::{find_theorem, CheckerHandle, ExternalChecker, MockChecker};
use proofforge_core::cot::{
    apply_holdout, assemble_training_instance, build_cot_input, dataset_stats, ingest_traces,
    render_cot_prompt_with, validate_rationale, CoTInstance, CoTMetadata, EvalManifest, HoldoutKey,
    ProofContext, ProofTraceRecord, TrainingConfig, Violation,
};
use proofforge_core::digest::sha256_hex;
use proofforge_core::metrics::{
    ablation_report, budget_curve, duplication_stats, method_count_distribution, rationale_audit, success_rate,
    write_atomic, AblationRow, AblationTable, EvaluationReport, DEFAULT_BUDGET_CAPS,
};
use proofforge_core::orchestrator::{
    run_job_with, AttemptRecord, GenerationJob, HttpBackend, JobResult, ProverBackend, ReplayBackend, RunOptions,
    TheoremId,
};
use proofforge_core::prompts::Templates;
use proofforge_core::text::{
    lexer::comment_body, parse_interleaved, parse_theory, segment_proof, InterleavedProof, ProofScript, ProofStep,
    Rationale, Span, TheoremEntry,
};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{BackendConfig, CheckerConfig, PipelineConfig};
use crate::manifest::StageRun;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Stage { stage: &'static str, source: anyhow::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { .. } => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Stage { stage, source } => write!(f, "{stage} failed: {source:#}"),
        }
    }
}

trait StageResult<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> StageResult<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Stage { stage, source: e.into() })
    }
}

pub struct Ctx {
    pub config: PipelineConfig,
    pub digest: String,
    /// `--backend`, when given.
    pub backend_override: Option<String>,
}

impl Ctx {
    fn out(&self) -> &Path {
        &self.config.paths.out
    }

    fn out_file(&self, name: &str) -> PathBuf {
        self.config.paths.out.join(name)
    }

    fn required<'a>(&self, path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
        path.as_deref().ok_or_else(|| CliError::Config(format!("paths.{key} is not set")))
    }

    fn templates(&self, run: &mut StageRun) -> anyhow::Result<Templates> {
        match &self.config.paths.prompts {
            Some(dir) => {
                run.read(dir);
                Templates::load_dir(dir).with_context(|| dir.display().to_string())
            }
            None => Ok(Templates::default()),
        }
    }

    fn manifest(&self, run: &mut StageRun) -> anyhow::Result<EvalManifest> {
        match &self.config.paths.manifest {
            Some(path) => {
                run.read(path);
                let text = fs::read_to_string(path)?;
                EvalManifest::from_json(&text).with_context(|| path.display().to_string())
            }
            None => Ok(EvalManifest::default()),
        }
    }

    fn contexts(&self, run: &mut StageRun) -> anyhow::Result<BTreeMap<HoldoutKey, ProofContext>> {
        let Some(path) = &self.config.paths.contexts else { return Ok(BTreeMap::new()) };
        run.read(path);
        let entries: Vec<ContextEntry> = serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| path.display().to_string())?;
        let mut out = BTreeMap::new();
        for e in entries {
            let key = HoldoutKey { project: e.project, theory: e.theory, lemma: e.lemma };
            if out.insert(key.clone(), e.items).is_some() {
                return Err(anyhow!("{}: duplicate context for {key:?}", path.display()));
            }
        }
        Ok(out)
    }

    fn backend(&self, name: &str, run: &mut StageRun) -> Result<Box<dyn ProverBackend>, CliError> {
        let spec = self
            .config
            .backends
            .get(name)
            .ok_or_else(|| CliError::Config(format!("backend `{name}` is not defined")))?;
        Ok(match spec {
            BackendConfig::Replay { responses } => {
                run.read(responses);
                let file = File::open(responses).stage("backend")?;
                Box::new(ReplayBackend::from_jsonl(BufReader::new(file)).stage("backend")?)
            }
            BackendConfig::Http(http) => Box::new(HttpBackend::new(http.clone())),
        })
    }

    fn prove_backend_name(&self) -> Result<String, CliError> {
        self.backend_override
            .clone()
            .or_else(|| self.config.backend.clone())
            .ok_or_else(|| CliError::Config("no backend selected; set `backend` or pass --backend".into()))
    }

    fn checker(&self, run: &mut StageRun) -> Result<CheckerHandle, CliError> {
        match &self.config.checker {
            Some(CheckerConfig::Mock { rules }) => {
                run.read(rules);
                let file = File::open(rules).stage("checker")?;
                Ok(CheckerHandle::Mock(MockChecker::from_jsonl(BufReader::new(file)).stage("checker")?))
            }
            Some(CheckerConfig::External(x)) => {
                Ok(CheckerHandle::External(ExternalChecker::new(x.clone()).map_err(|e| CliError::Config(e.to_string()))?))
            }
            None => Err(CliError::Config("no [checker] configured".into())),
        }
    }

    fn pool(&self, limit: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
        let width = self.config.concurrency.min(limit.unwrap_or(usize::MAX)).max(1);
        Ok(rayon::ThreadPoolBuilder::new().num_threads(width).build()?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextEntry {
    project: String,
    theory: String,
    lemma: String,
    items: ProofContext,
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    items.iter().map(|i| serde_json::to_string(i).expect("record serializes") + "\n").collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

fn emit(run: &mut StageRun, path: &Path, content: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    write_atomic(path, content.as_bytes()).with_context(|| path.display().to_string())?;
    run.wrote(path);
    Ok(())
}

fn read_traces(path: &Path, run: &mut StageRun) -> anyhow::Result<Vec<ProofTraceRecord>> {
    run.read(path);
    let file = File::open(path).with_context(|| path.display().to_string())?;
    Ok(ingest_traces(BufReader::new(file))?.0)
}

pub fn ingest(ctx: &Ctx) -> Result<(), CliError> {
    const S: &str = "ingest";
    let mut run = StageRun::start(S, &ctx.digest);
    let src = ctx.required(&ctx.config.paths.traces, "traces")?;
    run.read(src);
    let file = File::open(src).with_context(|| src.display().to_string()).stage(S)?;
    let (records, errors) = ingest_traces(BufReader::new(file)).stage(S)?;
    emit(&mut run, &ctx.out_file("trace.jsonl"), &to_jsonl(&records)).stage(S)?;
    emit(&mut run, &ctx.out_file("ingest_errors.jsonl"), &to_jsonl(&errors)).stage(S)?;
    run.finish(ctx.out()).stage(S)?;
    println!("ingest: {} records, {} rejected lines", records.len(), errors.len());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct HoldoutSummary {
    retained: usize,
    excluded: usize,
}

pub fn holdout(ctx: &Ctx) -> Result<(), CliError> {
    const S: &str = "holdout";
    let mut run = StageRun::start(S, &ctx.digest);
    let traces = read_traces(ctx.required(&ctx.config.paths.traces, "traces")?, &mut run).stage(S)?;
    let manifest = ctx.manifest(&mut run).stage(S)?;
    let (kept, excluded) = apply_holdout(traces, &manifest);
    emit(&mut run, &ctx.out_file("retained.jsonl"), &to_jsonl(&kept)).stage(S)?;
    let summary = HoldoutSummary { retained: kept.len(), excluded };
    emit(&mut run, &ctx.out_file("holdout.json"), &to_json(&summary)).stage(S)?;
    run.finish(ctx.out()).stage(S)?;
    println!("holdout: retained {}, excluded {}", summary.retained, summary.excluded);
    Ok(())
}

#[derive(Debug, Serialize)]
struct CotPrompt<'a> {
    #[serde(flatten)]
    metadata: CoTMetadata,
    prompt_digest: String,
    prompt: &'a str,
}

#[derive(Debug, Serialize, Deserialize)]
struct CotRejected {
    #[serde(flatten)]
    metadata: CoTMetadata,
    step: String,
    rationale: String,
    violations: Vec<Violation>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CotMeta {
    excluded_by_holdout: usize,
    prompts: usize,
    instances: usize,
    rejected: usize,
}

/// Generated rationales may come back wrapped in a comment.
fn rationale_text(generated: &str) -> String {
    let t = generated.trim();
    if t.starts_with("(*") && t.ends_with("*)") {
        comment_body(t).to_string()
    } else {
        t.to_string()
    }
}

pub fn build_cot(ctx: &Ctx) -> Result<(), CliError> {
    const S: &str = "build-cot";
    let mut run = StageRun::start(S, &ctx.digest);
    let traces = read_traces(ctx.required(&ctx.config.paths.traces, "traces")?, &mut run).stage(S)?;
    let manifest = ctx.manifest(&mut run).stage(S)?;
    let templates = ctx.templates(&mut run).stage(S)?;
    let (kept, excluded) = apply_holdout(traces, &manifest);

    let prompts: Vec<String> = kept.iter().map(|r| render_cot_prompt_with(&templates.cot, &build_cot_input(r))).collect();
    let rows: Vec<CotPrompt> = kept
        .iter()
        .zip(&prompts)
        .map(|(r, p)| CotPrompt { metadata: r.into(), prompt_digest: sha256_hex(p), prompt: p })
        .collect();
    emit(&mut run, &ctx.out_file("cot_prompts.jsonl"), &to_jsonl(&rows)).stage(S)?;

    let backend_name = ctx.backend_override.clone().or_else(|| ctx.config.cot_backend.clone());
    let mut meta = CotMeta { excluded_by_holdout: excluded, prompts: prompts.len(), instances: 0, rejected: 0 };
    if let Some(name) = backend_name {
        let backend = ctx.backend(&name, &mut run)?;
        let pool = ctx.pool(backend.max_concurrency()).stage(S)?;
        let sampling = &ctx.config.sampling;
        let generated: Vec<String> = pool
            .install(|| {
                prompts
                    .par_iter()
                    .enumerate()
                    .map(|(i, p)| backend.generate(p, &sampling.for_attempt(i as u32 + 1)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .stage(S)?;
        let mut instances = Vec::new();
        let mut rejected = Vec::new();
        for (record, text) in kept.iter().zip(generated) {
            let rationale = rationale_text(&text);
            match validate_rationale(&rationale) {
                Ok(()) => instances.push(CoTInstance { input: build_cot_input(record), rationale, metadata: record.into() }),
                Err(violations) => rejected.push(CotRejected {
                    metadata: record.into(),
                    step: record.step.clone(),
                    rationale,
                    violations,
                }),
            }
        }
        meta.instances = instances.len();
        meta.rejected = rejected.len();
        emit(&mut run, &ctx.out_file("cot.jsonl"), &to_jsonl(&instances)).stage(S)?;
        emit(&mut run, &ctx.out_file("cot_rejected.jsonl"), &to_jsonl(&rejected)).stage(S)?;
    }
    emit(&mut run, &ctx.out_file("cot.meta.json"), &to_json(&meta)).stage(S)?;
    run.finish(ctx.out()).stage(S)?;
    println!(
        "build-cot: {} prompts, {} instances, {} rejected, {} excluded by hold-out",
        meta.prompts, meta.instances, meta.rejected, meta.excluded_by_holdout
    );
    Ok(())
}

/// Name, attributes and statement from a rendered source-lemma block.
fn theorem_from_cot(row: &CoTInstance) -> TheoremEntry {
    let text = row.input.source_lemma.trim();
    let rest = ["lemma ", "theorem "].iter().find_map(|k| text.strip_prefix(k)).unwrap_or(text);
    let (head, statement) = rest.split_once(':').unwrap_or((&row.metadata.lemma_name, rest));
    let attributes = head
        .split_once('[')
        .and_then(|(_, a)| a.strip_suffix(']'))
        .map(|a| a.split(',').map(|s| s.trim().to_string()).collect())
        .unwrap_or_default();
    TheoremEntry {
        name: row.metadata.lemma_name.clone(),
        attributes,
        statement: statement.trim().to_string(),
        proof_span: Span { start: 0, end: 0 },
        category: Some(row.metadata.category.clone()).filter(|c| !c.is_empty()),
        theory_name: row.metadata.theory_name.clone(),
    }
}

#[derive(Debug, Serialize)]
struct Skipped {
    #[serde(flatten)]
    key: HoldoutKey,
    error: String,
}

#[derive(Debug, Serialize)]
struct TrainMeta {
    training: TrainingConfig,
    effective_batch: u32,
    stats: proofforge_core::cot::DatasetStats,
    skipped: Vec<Skipped>,
}

pub fn assemble_train(ctx: &Ctx) -> Result<(), CliError> {
    const S: &str = "assemble-train";
    let mut run = StageRun::start(S, &ctx.digest);
    let cot_path = ctx.out_file("cot.jsonl");
    run.read(&cot_path);
    let rows: Vec<CoTInstance> = read_jsonl(&cot_path).stage(S)?;
    let meta_path = ctx.out_file("cot.meta.json");
    let excluded = if meta_path.exists() {
        run.read(&meta_path);
        let meta: CotMeta = serde_json::from_str(&fs::read_to_string(&meta_path).stage(S)?).stage(S)?;
        meta.excluded_by_holdout
    } else {
        0
    };
    let rejected_path = ctx.out_file("cot_rejected.jsonl");
    let mut incomplete = BTreeSet::new();
    if rejected_path.exists() {
        run.read(&rejected_path);
        for r in read_jsonl::<CotRejected>(&rejected_path).stage(S)? {
            let m = r.metadata;
            incomplete.insert(HoldoutKey { project: m.project, theory: m.theory_name, lemma: m.lemma_name });
        }
    }
    let contexts = ctx.contexts(&mut run).stage(S)?;

    let mut groups: Vec<(HoldoutKey, Vec<&CoTInstance>)> = Vec::new();
    for row in &rows {
        let m = &row.metadata;
        let key = HoldoutKey { project: m.project.clone(), theory: m.theory_name.clone(), lemma: m.lemma_name.clone() };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }

    let empty = ProofContext::default();
    let mut instances = Vec::new();
    let mut skipped: Vec<Skipped> = incomplete
        .iter()
        .map(|key| Skipped { key: key.clone(), error: "a step rationale was rejected by build-cot".into() })
        .collect();
    for (key, members) in groups {
        if incomplete.contains(&key) {
            continue;
        }
        let proof = InterleavedProof {
            steps: ProofScript {
                steps: members.iter().enumerate().map(|(i, r)| ProofStep::from_command(r.input.step.trim(), i)).collect(),
            },
            rationales: members
                .iter()
                .enumerate()
                .map(|(i, r)| Rationale { step_index: i, text: r.rationale.clone() })
                .collect(),
        };
        let theorem = theorem_from_cot(members[0]);
        match assemble_training_instance(&theorem, contexts.get(&key).unwrap_or(&empty), &proof) {
            Ok(mut inst) => {
                inst.metadata = members[0].metadata.clone();
                instances.push(inst);
            }
            Err(e) => skipped.push(Skipped { key, error: e.to_string() }),
        }
    }

    emit(&mut run, &ctx.out_file("train.jsonl"), &to_jsonl(&instances)).stage(S)?;
    let training = ctx.config.training.clone();
    let meta = TrainMeta {
        effective_batch: training.effective_batch(),
        training,
        stats: dataset_stats(&instances, excluded),
        skipped,
    };
    emit(&mut run, &ctx.out_file("train.meta.json"), &to_json(&meta)).stage(S)?;
    run.finish(ctx.out()).stage(S)?;
    println!("assemble-train: {} instances, {} skipped", instances.len(), meta.skipped.len());
    Ok(())
}

struct Target {
    source: String,
    entries: Vec<TheoremEntry>,
    project: String,
}

fn load_targets(ctx: &Ctx, run: &mut StageRun) -> anyhow::Result<Vec<Target>> {
    let mut out = Vec::new();
    for t in &ctx.config.targets {
        run.read(&t.theory);
        let source = fs::read_to_string(&t.theory).with_context(|| t.theory.display().to_string())?;
        let mut entries = parse_theory(&source).with_context(|| t.theory.display().to_string())?;
        if let Some(wanted) = &t.lemmas {
            if let Some(missing) = wanted.iter().find(|w| !entries.iter().any(|e| &e.name == *w)) {
                return Err(anyhow!("{}: no lemma named `{missing}`", t.theory.display()));
            }
            entries.retain(|e| wanted.contains(&e.name));
        }
        for e in &mut entries {
            e.category = t.category.clone();
        }
        out.push(Target { source, entries, project: t.project.clone() });
    }
    Ok(out)
}

fn jobs(ctx: &Ctx, targets: &[Target], contexts: &BTreeMap<HoldoutKey, ProofContext>, include_context: bool) -> Vec<GenerationJob> {
    let mut jobs = Vec::new();
    for t in targets {
        for e in &t.entries {
            let mut job = GenerationJob::new(t.project.clone(), e.clone(), t.source.clone());
            job.context = contexts.get(&job.theorem_id()).cloned().unwrap_or_default();
            job.max_attempts = ctx.config.max_attempts;
            job.sampling = ctx.config.sampling.clone();
            job.include_context = include_context;
            jobs.push(job);
        }
    }
    jobs
}

/// Runs every job; on a backend failure the attempts made so far are still
/// returned alongside the error.
fn prove_all(
    ctx: &Ctx,
    jobs: &[GenerationJob],
    backend: &dyn ProverBackend,
    checker: &CheckerHandle,
    prove_template: &str,
) -> anyhow::Result<(Vec<JobResult>, Option<anyhow::Error>)> {
    let options = RunOptions { width: ctx.config.attempt_width, prove_template: prove_template.to_string() };
    let pool = ctx.pool(backend.max_concurrency())?;
    let outcomes: Vec<_> =
        pool.install(|| jobs.par_iter().map(|j| run_job_with(j, backend, checker, &options)).collect());
    let mut results = Vec::new();
    let mut first_error = None;
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(aborted) => {
                first_error.get_or_insert_with(|| anyhow!(aborted.to_string()));
                results.push(aborted.partial);
            }
        }
    }
    Ok((results, first_error))
}

fn all_attempts(results: &[JobResult]) -> Vec<&AttemptRecord> {
    results.iter().flat_map(|r| &r.attempts).collect()
}

#[derive(Debug, Serialize)]
struct ProveSummary {
    backend: String,
    solved: usize,
    total: usize,
    attempts: usize,
}

pub fn prove(ctx: &Ctx) -> Result<(), CliError> {
    const S: &str = "prove";
    let mut run = StageRun::start(S, &ctx.digest);
    let name = ctx.prove_backend_name()?;
    let backend = ctx.backend(&name, &mut run)?;
    let checker = ctx.checker(&mut run)?;
    let templates = ctx.templates(&mut run).stage(S)?;
    let contexts = ctx.contexts(&mut run).stage(S)?;
    let targets = load_targets(ctx, &mut run).stage(S)?;
    let jobs = jobs(ctx, &targets, &contexts, ctx.config.include_context);

    let (results, error) = prove_all(ctx, &jobs, backend.as_ref(), &checker, &templates.prove).stage(S)?;
    emit(&mut run, &ctx.out_file("attempts.jsonl"), &to_jsonl(&all_attempts(&results))).stage(S)?;
    let summary = ProveSummary {
        backend: name,
        solved: results.iter().filter(|r| r.solved).count(),
        total: results.len(),
        attempts: results.iter().map(|r| r.attempts.len()).sum(),
    };
    emit(&mut run, &ctx.out_file("prove.json"), &to_json(&summary)).stage(S)?;
    run.finish(ctx.out()).stage(S)?;
    if let Some(e) = error {
        return Err(CliError::Stage { stage: S, source: e });
    }
    println!("prove: solved {}/{} in {} attempts", summary.solved, summary.total, summary.attempts);
    Ok(())
}

/// Rebuilds per-theorem results from an attempt log, in first-appearance order.
pub fn results_from_attempts(attempts: Vec<AttemptRecord>) -> Vec<JobResult> {
    let mut groups: Vec<(TheoremId, Option<String>, Vec<AttemptRecord>)> = Vec::new();
    for a in attempts {
        match groups.iter_mut().find(|(id, _, _)| *id == a.theorem_id) {
            Some((_, _, list)) => list.push(a),
            None => groups.push((a.theorem_id.clone(), a.category.clone(), vec![a])),
        }
    }
    groups.into_iter().map(|(id, cat, list)| JobResult::from_attempts(id, cat, list)).collect()
}

fn budget_caps(max_attempts: u32) -> Vec<u32> {
    let mut caps: Vec<u32> = DEFAULT_BUDGET_CAPS.iter().copied().filter(|&c| c < max_attempts).collect();
    caps.push(max_attempts);
    caps
}

pub fn evaluate(ctx: &Ctx) -> Result<(), CliError> {
    const S: &str = "evaluate";
    let mut run = StageRun::start(S, &ctx.digest);
    let path = ctx.out_file("attempts.jsonl");
    run.read(&path);
    let results = results_from_attempts(read_jsonl(&path).stage(S)?);
    let contexts = ctx.contexts(&mut run).stage(S)?;
    let targets = load_targets(ctx, &mut run).stage(S)?;
    let report = build_report(&results, &targets, &contexts, ctx.config.max_attempts).stage(S)?;
    emit(&mut run, &ctx.out_file("report.json"), &report.to_json()).stage(S)?;
    emit(&mut run, &ctx.out_file("report.md"), &report.to_markdown()).stage(S)?;
    run.finish(ctx.out()).stage(S)?;
    let o = &report.success.overall;
    println!("evaluate: {}/{} solved ({})", o.solved, o.total, o.percent());
    Ok(())
}

fn build_report(
    results: &[JobResult],
    targets: &[Target],
    contexts: &BTreeMap<HoldoutKey, ProofContext>,
    max_attempts: u32,
) -> anyhow::Result<EvaluationReport> {
    let success = success_rate(results, None)?;
    let budget = budget_curve(results, &budget_caps(max_attempts))?;

    let sources: BTreeMap<(&str, &str), &str> = targets
        .iter()
        .flat_map(|t| t.entries.iter().map(move |e| ((t.project.as_str(), e.theory_name.as_str()), t.source.as_str())))
        .collect();
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut audited = Vec::new();
    for r in results.iter().filter(|r| r.solved) {
        let id = &r.theorem_id;
        let (Some(generated), Some(src)) = (r.solving_script(), sources.get(&(id.project.as_str(), id.theory.as_str())))
        else {
            continue;
        };
        let Ok(original) = find_theorem(src, &id.lemma) else { continue };
        pairs.push((generated, original.proof_text(src).to_string()));
        let completion = r.attempts.iter().find(|a| Some(a.attempt_index) == r.solving_attempt).map(|a| &a.completion);
        if let Some(Ok(proof)) = completion.map(|c| parse_interleaved(c)) {
            if !proof.rationales.is_empty() {
                audited.push((id.clone(), proof, contexts.get(id).cloned().unwrap_or_default()));
            }
        }
    }

    let (duplication, methods_generated, methods_original) = if pairs.is_empty() {
        (None, None, None)
    } else {
        let known = BTreeSet::new();
        let scripts = |side: fn(&(String, String)) -> &String| -> anyhow::Result<Vec<ProofScript>> {
            Ok(pairs.iter().map(|p| segment_proof(side(p))).collect::<Result<_, _>>()?)
        };
        (
            Some(duplication_stats(&pairs)),
            Some(method_count_distribution(&scripts(|p| &p.0)?, &known)?),
            Some(method_count_distribution(&scripts(|p| &p.1)?, &known)?),
        )
    };
    let rationale = (!audited.is_empty()).then(|| rationale_audit(&audited));
    Ok(EvaluationReport { success, budget, duplication, methods_generated, methods_original, rationale, ablation: None })
}

fn ablation_markdown(table: &AblationTable) -> String {
    let mut md = String::from("# Ablation\n\n| Method | Solved/Total | Success rate |\n|---|---:|---:|\n");
    for r in &table.rows {
        let _ = writeln!(md, "| {} | {}/{} | {} |", r.config_label, r.solved, r.total, r.percent());
    }
    md
}

pub fn ablate(ctx: &Ctx) -> Result<(), CliError> {
    const S: &str = "ablate";
    let mut run = StageRun::start(S, &ctx.digest);
    let ablation =
        ctx.config.ablation.clone().ok_or_else(|| CliError::Config("no [ablation] section configured".into()))?;
    let checker = ctx.checker(&mut run)?;
    let templates = ctx.templates(&mut run).stage(S)?;
    let contexts = ctx.contexts(&mut run).stage(S)?;
    let targets = load_targets(ctx, &mut run).stage(S)?;

    let mut rows = Vec::new();
    for (cot, context, slug) in [(false, false, "base"), (true, false, "cot"), (false, true, "context"), (true, true, "cot-context")] {
        let name = if cot { &ablation.cot_backend } else { &ablation.base_backend };
        let backend = ctx.backend(name, &mut run)?;
        let jobs = jobs(ctx, &targets, &contexts, context);
        let (results, error) = prove_all(ctx, &jobs, backend.as_ref(), &checker, &templates.prove).stage(S)?;
        emit(&mut run, &ctx.out_file(&format!("ablation/{slug}/attempts.jsonl")), &to_jsonl(&all_attempts(&results)))
            .stage(S)?;
        if let Some(e) = error {
            run.finish(ctx.out()).stage(S)?;
            return Err(CliError::Stage { stage: S, source: e.context(format!("configuration `{slug}`")) });
        }
        rows.push(AblationRow {
            config_label: AblationRow::default_label(context, cot).to_string(),
            context_enabled: context,
            cot_backend: cot,
            solved: results.iter().filter(|r| r.solved).count() as u64,
            total: results.len() as u64,
        });
    }
    let table = ablation_report(rows).stage(S)?;
    emit(&mut run, &ctx.out_file("ablation.json"), &to_json(&table)).stage(S)?;
    emit(&mut run, &ctx.out_file("ablation.md"), &ablation_markdown(&table)).stage(S)?;
    run.finish(ctx.out()).stage(S)?;
    for r in &table.rows {
        println!("ablate: {}: {}/{} ({})", r.config_label, r.solved, r.total, r.percent());
    }
    Ok(())
}
