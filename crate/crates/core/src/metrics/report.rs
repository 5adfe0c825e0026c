//! `report.json` / `report.md`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    AblationTable, BudgetCurve, DuplicationStats, MethodStats, RationaleAudit, SuccessTable, NO_RATE,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub success: SuccessTable,
    pub budget: BudgetCurve,
    #[serde(default)]
    pub duplication: Option<DuplicationStats>,
    #[serde(default)]
    pub methods_generated: Option<MethodStats>,
    #[serde(default)]
    pub methods_original: Option<MethodStats>,
    #[serde(default)]
    pub rationale: Option<RationaleAudit>,
    #[serde(default)]
    pub ablation: Option<AblationTable>,
}

fn theory_cell(theory: &str) -> String {
    if theory == NO_RATE || theory.is_empty() {
        NO_RATE.to_string()
    } else {
        format!("`{theory}.thy`")
    }
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::from("# Evaluation report\n\n## Proof success\n\n");
        if self.success.rows.is_empty() {
            md.push_str("_No results._\n\n");
        }
        md.push_str("| Category | Theory | Solved/Total | Success rate |\n|---|---|---:|---:|\n");
        for r in &self.success.rows {
            let _ = writeln!(
                md,
                "| `{}` | {} | {}/{} | {} |",
                r.category,
                theory_cell(&r.theory),
                r.solved,
                r.total,
                r.percent()
            );
        }
        let o = &self.success.overall;
        let _ = writeln!(md, "| **Overall** | {} | **{}/{}** | **{}** |", NO_RATE, o.solved, o.total, o.percent());

        if !self.budget.points.is_empty() {
            md.push_str("\n## Attempt budget\n\n| Attempts | Solved/Total | Success rate |\n|---:|---:|---:|\n");
            for p in &self.budget.points {
                let _ = writeln!(md, "| {} | {}/{} | {} |", p.cap, p.solved, p.total, p.percent());
            }
        }

        if let Some(d) = &self.duplication {
            md.push_str("\n## Duplication\n\n| Compared | Differing | Fraction differing |\n|---:|---:|---:|\n");
            let _ = writeln!(md, "| {} | {} | {} |", d.compared, d.differing, d.percent());
        }

        if self.methods_generated.is_some() || self.methods_original.is_some() {
            md.push_str("\n## Methods per proof\n\n| Proofs | Count | Mean methods |\n|---|---:|---:|\n");
            let sides = [("Generated", &self.methods_generated), ("Original", &self.methods_original)];
            for (label, stats) in sides {
                if let Some(s) = stats {
                    let _ = writeln!(md, "| {label} | {} | {} |", s.per_proof_counts.len(), s.rendered_mean());
                }
            }
            let keys: BTreeSet<u64> = sides
                .iter()
                .filter_map(|(_, s)| s.as_ref())
                .flat_map(|s| s.histogram.keys().copied())
                .collect();
            md.push_str("\n| Methods | Generated | Original |\n|---:|---:|---:|\n");
            for k in keys {
                let freq = |s: &Option<MethodStats>| {
                    s.as_ref().map_or(NO_RATE.to_string(), |s| s.histogram.get(&k).copied().unwrap_or(0).to_string())
                };
                let _ = writeln!(md, "| {k} | {} | {} |", freq(&self.methods_generated), freq(&self.methods_original));
            }
        }

        if let Some(a) = &self.rationale {
            md.push_str("\n## Rationale audit\n\n| Measure | Value |\n|---|---:|\n");
            let _ = writeln!(md, "| Proofs audited | {} |", a.proofs);
            let _ = writeln!(md, "| Steps audited | {} |", a.total_steps);
            let _ = writeln!(md, "| `done` steps | {} |", a.done_steps);
            let _ = writeln!(md, "| Flagged `done` steps | {} |", a.flagged_done_steps);
            let _ = writeln!(md, "| Flagged other steps | {} |", a.flagged_other_steps);
            let _ = writeln!(md, "| Other flagged / all steps | {} |", a.other_rate_over_all_steps());
            let _ = writeln!(md, "| Other flagged / non-`done` steps | {} |", a.other_rate_over_other_steps());
        }

        if let Some(t) = &self.ablation {
            md.push_str("\n## Ablation\n\n| Method | Solved/Total | Success rate |\n|---|---:|---:|\n");
            for r in &t.rows {
                let _ = writeln!(md, "| {} | {}/{} | {} |", r.config_label, r.solved, r.total, r.percent());
            }
        }
        md
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        write_atomic(&dir.join("report.json"), self.to_json().as_bytes())?;
        write_atomic(&dir.join("report.md"), self.to_markdown().as_bytes())
    }
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
