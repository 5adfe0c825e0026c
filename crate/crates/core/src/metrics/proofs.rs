//! Comparing generated proofs with the originals.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ratio4, render_mean, render_percent, round_ratio};
use crate::text::{count_methods, normalize_script, ProofScript, TextError};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DuplicationStats {
    pub compared: u64,
    pub differing: u64,
    pub fraction_differing: Option<f64>,
}

impl DuplicationStats {
    pub fn percent(&self) -> String {
        render_percent(self.differing, self.compared)
    }
}

/// A pair differs when the canonical forms differ. Text that cannot be
/// canonicalized is compared trimmed.
pub fn duplication_stats<G: AsRef<str>, O: AsRef<str>>(pairs: &[(G, O)]) -> DuplicationStats {
    let canon = |s: &str| normalize_script(s).unwrap_or_else(|_| s.trim().to_string());
    let differing = pairs
        .iter()
        .filter(|(g, o)| canon(g.as_ref()) != canon(o.as_ref()))
        .count() as u64;
    let compared = pairs.len() as u64;
    DuplicationStats { compared, differing, fraction_differing: ratio4(differing, compared) }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub per_proof_counts: Vec<u64>,
    /// Three decimals; absent for an empty list.
    pub mean: Option<f64>,
    pub histogram: BTreeMap<u64, u64>,
}

impl MethodStats {
    pub fn from_counts(per_proof_counts: Vec<u64>) -> Self {
        let sum: u64 = per_proof_counts.iter().sum();
        let len = per_proof_counts.len() as u64;
        let mut histogram = BTreeMap::new();
        for &c in &per_proof_counts {
            *histogram.entry(c).or_insert(0) += 1;
        }
        MethodStats {
            mean: round_ratio(sum, len, 1000).map(|t| t as f64 / 1000.0),
            per_proof_counts,
            histogram,
        }
    }

    pub fn rendered_mean(&self) -> String {
        render_mean(self.per_proof_counts.iter().sum(), self.per_proof_counts.len() as u64)
    }
}

pub fn method_count_distribution(
    proofs: &[ProofScript],
    known_facts: &BTreeSet<String>,
) -> Result<MethodStats, TextError> {
    let counts = proofs
        .iter()
        .map(|p| count_methods(p, known_facts).map(|c| c.total as u64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MethodStats::from_counts(counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::segment_proof;

    #[test]
    fn whitespace_and_comments_do_not_differ() {
        let s = duplication_stats(&[("apply simp\n  done", "apply  simp (* x *) done")]);
        assert_eq!((s.compared, s.differing), (1, 0));
        assert_eq!(s.fraction_differing, Some(0.0));
    }

    #[test]
    fn reflexive() {
        let pairs: Vec<(&str, &str)> = ["by simp", "apply auto done"].iter().map(|p| (*p, *p)).collect();
        assert_eq!(duplication_stats(&pairs).differing, 0);
        assert_eq!(duplication_stats::<&str, &str>(&[]).percent(), "—");
    }

    #[test]
    fn method_means() {
        let one = method_count_distribution(&[segment_proof("by simp").unwrap()], &BTreeSet::new()).unwrap();
        assert_eq!(one.rendered_mean(), "1.000");
        assert_eq!(one.histogram, BTreeMap::from([(1, 1)]));
        let two = MethodStats::from_counts(vec![2, 4]);
        assert_eq!(two.rendered_mean(), "3.000");
        assert_eq!(two.mean, Some(3.0));
        let none = MethodStats::from_counts(vec![]);
        assert_eq!(none.rendered_mean(), "—");
        assert!(none.histogram.is_empty());
    }
}
