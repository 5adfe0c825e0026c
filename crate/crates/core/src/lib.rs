//! Proof-script analysis, chain-of-thought dataset construction, budgeted
//! proof generation and evaluation metrics for Isabelle developments.

pub mod checker;
pub mod cot;
pub mod digest;
pub mod metrics;
pub mod orchestrator;
pub mod prompts;
pub mod text;
