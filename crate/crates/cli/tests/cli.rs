use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proofforge_core::checker::{CheckerVerdict, RejectReason};
use proofforge_core::metrics::EvaluationReport;
use proofforge_core::orchestrator::{AttemptRecord, TheoremId};
use serde_json::Value;
use tempfile::TempDir;

fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo")
}

/// Copy of the demo fixture that tests may edit freely.
fn demo_copy() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(demo_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    dir
}

fn run(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proofforge")).args(args).arg("--config").arg(config).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn jsonl_len(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.trim().is_empty()).count()
}

fn assert_no_temp_files(dir: &Path) {
    for entry in fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name().to_string_lossy().into_owned();
        assert!(!name.starts_with(".tmp"), "leftover temp file {name}");
        if entry.file_type().unwrap().is_dir() {
            assert_no_temp_files(&entry.path());
        }
    }
}

#[test]
fn full_demo_pipeline() {
    let dir = demo_copy();
    let config = dir.path().join("proofforge.toml");
    let out = dir.path().join("out");
    for stage in ["ingest", "holdout", "build-cot", "assemble-train", "prove", "evaluate", "ablate"] {
        let o = run(&config, &[stage]);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
        let m = read_json(&out.join("manifests").join(format!("{stage}.json")));
        assert_eq!(m["stage"], stage);
        assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
        assert!(!m["outputs"].as_object().unwrap().is_empty(), "{stage} recorded no outputs");
    }

    assert_eq!(jsonl_len(&out.join("trace.jsonl")), 6);
    assert_eq!(jsonl_len(&out.join("ingest_errors.jsonl")), 2);
    assert_eq!(read_json(&out.join("holdout.json"))["excluded"], 1);
    assert_eq!(jsonl_len(&out.join("train.jsonl")), 2);
    assert_eq!(read_json(&out.join("train.meta.json"))["skipped"].as_array().unwrap().len(), 1);
    let prove = read_json(&out.join("prove.json"));
    assert_eq!((prove["solved"].as_u64(), prove["total"].as_u64()), (Some(2), Some(3)));
    let ablation = read_json(&out.join("ablation.json"));
    let solved: Vec<u64> = ablation["rows"].as_array().unwrap().iter().map(|r| r["solved"].as_u64().unwrap()).collect();
    assert_eq!(solved, [0, 1, 0, 2]);

    let manifests: Vec<Value> = ["prove", "evaluate"].iter().map(|s| read_json(&out.join(format!("manifests/{s}.json")))).collect();
    assert_eq!(manifests[0]["config_digest"], manifests[1]["config_digest"]);
    assert_ne!(manifests[0]["run_id"], manifests[1]["run_id"]);
    assert_no_temp_files(&out);
}

#[test]
fn overrides_change_the_config_digest() {
    let dir = demo_copy();
    let config = dir.path().join("proofforge.toml");
    assert!(run(&config, &["prove"]).status.success());
    assert!(run(&config, &["prove", "--attempts", "2", "--out", "out2"]).status.success());
    let a = read_json(&dir.path().join("out/manifests/prove.json"));
    let b = read_json(&dir.path().join("out2/manifests/prove.json"));
    assert_ne!(a["config_digest"], b["config_digest"]);
    let p = read_json(&dir.path().join("out2/prove.json"));
    assert!(p["attempts"].as_u64().unwrap() <= 6);
}

#[test]
fn empty_holdout_manifest_excludes_nothing() {
    let dir = demo_copy();
    fs::write(dir.path().join("manifest.json"), "[]").unwrap();
    let config = dir.path().join("proofforge.toml");
    assert!(run(&config, &["ingest"]).status.success());
    assert!(run(&config, &["holdout"]).status.success());
    let h = read_json(&dir.path().join("out/holdout.json"));
    assert_eq!((h["retained"].as_u64(), h["excluded"].as_u64()), (Some(6), Some(0)));
}

fn record(id: &TheoremId, category: &str, index: u32, success: bool) -> AttemptRecord {
    AttemptRecord {
        theorem_id: id.clone(),
        category: Some(category.into()),
        attempt_index: index,
        prompt_digest: "0".repeat(64),
        completion: "whole proof:\nby simp".into(),
        verdict: if success { CheckerVerdict::accepted() } else { CheckerVerdict::rejected(RejectReason::CheckerError) },
        success,
        elapsed_ms: 0,
    }
}

#[test]
fn evaluate_reproduces_category_table_from_attempt_log() {
    let rows: [(&str, &str, u32, u32); 10] = [
        ("access-control", "Syscall_AC", 47, 84),
        ("asmrefine", "SEL4GraphRefine", 1, 1),
        ("bisim", "Separation", 5, 9),
        ("crefine", "Refine_C", 13, 46),
        ("drefine", "Refine_D", 2, 3),
        ("capDL-api", "KHeap_DP", 89, 123),
        ("infoflow", "Noninterference", 101, 233),
        ("invariant-abstract", "Syscall_AI", 57, 105),
        ("refine", "Refine", 26, 55),
        ("sep-capDL", "AbstractSeparation_SD", 0, 1),
    ];
    let mut log = String::new();
    for (cat, theory, solved, total) in rows {
        for i in 0..total {
            let id = TheoremId { project: "l4v".into(), theory: theory.into(), lemma: format!("lemma_{i}") };
            let r = if i < solved { record(&id, cat, 1 + i % 200, true) } else { record(&id, cat, 1, false) };
            log.push_str(&serde_json::to_string(&r).unwrap());
            log.push('\n');
        }
    }
    let dir = demo_copy();
    let out = dir.path().join("out");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join("attempts.jsonl"), log).unwrap();
    let o = run(&dir.path().join("proofforge.toml"), &["evaluate", "--attempts", "256"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let md = fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("341/660"), "{md}");
    assert!(md.contains("51.67%"), "{md}");
    assert!(md.contains("| `crefine` | `Refine_C.thy` | 13/46 | 28.26% |"), "{md}");
    assert!(md.contains("| `asmrefine` | `SEL4GraphRefine.thy` | 1/1 | 100.00% |"), "{md}");

    let report: EvaluationReport = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.to_markdown(), md);
    assert_no_temp_files(&out);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = demo_copy();
    let config = dir.path().join("proofforge.toml");
    let text = fs::read_to_string(&config).unwrap();
    fs::write(&config, format!("max_attempt = 3\n{text}")).unwrap();
    let o = run(&config, &["prove"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out/attempts.jsonl").exists());
}

#[test]
fn missing_config_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_proofforge")).arg("prove").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exhausted_replay_script_aborts_with_partial_log() {
    let dir = demo_copy();
    let responses = fs::read_to_string(dir.path().join("responses.jsonl")).unwrap();
    let first = responses.lines().next().unwrap();
    fs::write(dir.path().join("responses.jsonl"), format!("{first}\n")).unwrap();
    let o = run(&dir.path().join("proofforge.toml"), &["prove", "--concurrency", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let attempts = dir.path().join("out/attempts.jsonl");
    let text = fs::read_to_string(&attempts).unwrap();
    for line in text.lines() {
        serde_json::from_str::<AttemptRecord>(line).unwrap();
    }
    let m = read_json(&dir.path().join("out/manifests/prove.json"));
    assert!(m["outputs"].as_object().unwrap().keys().any(|k| k.ends_with("attempts.jsonl")));
    assert_no_temp_files(&dir.path().join("out"));
}
