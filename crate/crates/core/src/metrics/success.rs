use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ratio4, render_percent, MetricsError, NO_RATE};
use crate::orchestrator::JobResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryResult {
    pub category: String,
    /// The single theory of the group, or `—` when it spans several.
    pub theory: String,
    pub solved: u64,
    pub total: u64,
    pub rate: Option<f64>,
}

impl CategoryResult {
    pub fn new(category: impl Into<String>, theory: impl Into<String>, solved: u64, total: u64) -> Self {
        CategoryResult {
            category: category.into(),
            theory: theory.into(),
            solved,
            total,
            rate: ratio4(solved, total),
        }
    }

    pub fn percent(&self) -> String {
        render_percent(self.solved, self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessTable {
    pub rows: Vec<CategoryResult>,
    pub overall: CategoryResult,
}

impl SuccessTable {
    /// Overall is the sum of the rows.
    pub fn from_rows(rows: Vec<CategoryResult>) -> Self {
        let solved = rows.iter().map(|r| r.solved).sum();
        let total = rows.iter().map(|r| r.total).sum();
        SuccessTable { rows, overall: CategoryResult::new("Overall", NO_RATE, solved, total) }
    }
}

fn group_key(r: &JobResult) -> String {
    r.category.clone().unwrap_or_else(|| r.theorem_id.project.clone())
}

/// Groups by category (the project when a result has none) in order of
/// first appearance. `cap` counts only solutions found within that many
/// attempts.
pub fn success_rate(results: &[JobResult], cap: Option<u32>) -> Result<SuccessTable, MetricsError> {
    let mut seen = BTreeSet::new();
    for r in results {
        if !seen.insert(&r.theorem_id) {
            let id = &r.theorem_id;
            return Err(MetricsError::DuplicateTheorem(format!("{}/{}/{}", id.project, id.theory, id.lemma)));
        }
    }
    let mut groups: Vec<(String, Vec<&JobResult>)> = Vec::new();
    for r in results {
        let key = group_key(r);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let rows = groups
        .into_iter()
        .map(|(category, members)| {
            let theories: BTreeSet<&str> = members.iter().map(|m| m.theorem_id.theory.as_str()).collect();
            let theory = match theories.len() {
                1 => theories.into_iter().next().unwrap_or_default().to_string(),
                _ => NO_RATE.to_string(),
            };
            let solved = members.iter().filter(|m| solved_within(m, cap)).count() as u64;
            CategoryResult::new(category, theory, solved, members.len() as u64)
        })
        .collect();
    Ok(SuccessTable::from_rows(rows))
}

fn solved_within(r: &JobResult, cap: Option<u32>) -> bool {
    match (r.solving_attempt, cap) {
        (Some(k), Some(cap)) => k <= cap,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPoint {
    pub cap: u32,
    pub solved: u64,
    pub total: u64,
    pub rate: Option<f64>,
}

impl BudgetPoint {
    pub fn percent(&self) -> String {
        render_percent(self.solved, self.total)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetCurve {
    pub points: Vec<BudgetPoint>,
}

pub fn budget_curve(results: &[JobResult], caps: &[u32]) -> Result<BudgetCurve, MetricsError> {
    if caps.iter().any(|&c| c == 0) || caps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MetricsError::InvalidCaps);
    }
    let total = results.len() as u64;
    let points = caps
        .iter()
        .map(|&cap| {
            let solved = results.iter().filter(|r| solved_within(r, Some(cap))).count() as u64;
            BudgetPoint { cap, solved, total, rate: ratio4(solved, total) }
        })
        .collect();
    Ok(BudgetCurve { points })
}
