//! Step-level chain-of-thought dataset construction: trace ingestion,
//! structured CoT inputs, rationale checks, evaluation hold-out and
//! training-instance assembly.

pub mod holdout;
pub mod input;
pub mod rationale;
pub mod stats;
pub mod trace;
pub mod training;

pub use holdout::{apply_holdout, EvalManifest, HoldoutKey, ManifestError};
pub use input::{build_cot_input, render_cot_prompt, render_cot_prompt_with, CoTInput, CoTInstance, CoTMetadata};
pub use rationale::{validate_rationale, Violation};
pub use stats::{dataset_stats, DatasetStats, StatsItem};
pub use trace::{ingest_traces, ProofTraceRecord, RecordError, RecordErrorKind};
pub use training::{
    assemble_training_instance, AssemblyError, ContextError, ContextItem, ContextKind,
    ProofContext, TrainingConfig, TrainingInstance,
};
