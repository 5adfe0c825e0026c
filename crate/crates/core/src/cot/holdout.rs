//! Excluding evaluation theorems from training data.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trace::ProofTraceRecord;

/// Theory-qualified theorem identity, so equal lemma names in different
/// theories never collide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HoldoutKey {
    pub project: String,
    pub theory: String,
    pub lemma: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalManifest {
    entries: BTreeSet<HoldoutKey>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("duplicate manifest entry {0:?}")]
    Duplicate(HoldoutKey),
    #[error("invalid manifest: {0}")]
    Json(#[from] serde_json::Error),
}

impl EvalManifest {
    pub fn new(keys: impl IntoIterator<Item = HoldoutKey>) -> Result<Self, ManifestError> {
        let mut entries = BTreeSet::new();
        for k in keys {
            if let Some(dup) = entries.replace(k) {
                return Err(ManifestError::Duplicate(dup));
            }
        }
        Ok(EvalManifest { entries })
    }

    /// `manifest.json`: a list of `{project, theory, lemma}` objects.
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        Self::new(serde_json::from_str::<Vec<HoldoutKey>>(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries.iter().collect::<Vec<_>>())
            .expect("keys serialize")
    }

    pub fn contains(&self, key: &HoldoutKey) -> bool {
        self.entries.contains(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &HoldoutKey> {
        self.entries.iter()
    }
}

/// Keeps the records whose key is not in `manifest`, in input order, and
/// reports how many were dropped.
pub fn apply_holdout(
    records: Vec<ProofTraceRecord>,
    manifest: &EvalManifest,
) -> (Vec<ProofTraceRecord>, usize) {
    let before = records.len();
    let retained: Vec<_> = records.into_iter().filter(|r| !manifest.contains(&r.key())).collect();
    let excluded = before - retained.len();
    (retained, excluded)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(lemma: &str) -> ProofTraceRecord {
        ProofTraceRecord {
            lemma_name: lemma.into(),
            lemma_statement: "s".into(),
            state_before: "b".into(),
            step: "by simp".into(),
            state_after: "a".into(),
            theory_name: "T".into(),
            category: "c".into(),
            project: "p".into(),
        }
    }

    #[test]
    fn empty_manifest_keeps_all() {
        let (kept, n) = apply_holdout(vec![rec("a"), rec("b")], &EvalManifest::default());
        assert_eq!((kept.len(), n), (2, 0));
    }

    #[test]
    fn single_exclusion_preserves_order() {
        let m = EvalManifest::new([rec("b").key()]).unwrap();
        let (kept, n) = apply_holdout(vec![rec("a"), rec("b"), rec("c")], &m);
        assert_eq!(n, 1);
        assert_eq!(kept.iter().map(|r| r.lemma_name.as_str()).collect::<Vec<_>>(), ["a", "c"]);
    }

    #[test]
    fn total_exclusion() {
        let recs = vec![rec("a"), rec("b")];
        let m = EvalManifest::new(recs.iter().map(ProofTraceRecord::key)).unwrap();
        let (kept, n) = apply_holdout(recs, &m);
        assert!(kept.is_empty());
        assert_eq!(n, 2);
    }

    #[test]
    fn same_lemma_other_theory_is_kept() {
        let m = EvalManifest::new([rec("a").key()]).unwrap();
        let mut other = rec("a");
        other.theory_name = "U".into();
        assert_eq!(apply_holdout(vec![other], &m).1, 0);
    }

    #[test]
    fn json_round_trip_and_duplicates() {
        let m = EvalManifest::new([rec("a").key(), rec("b").key()]).unwrap();
        assert_eq!(EvalManifest::from_json(&m.to_json()).unwrap(), m);
        let dup = r#"[{"project":"p","theory":"T","lemma":"a"},{"project":"p","theory":"T","lemma":"a"}]"#;
        assert!(matches!(EvalManifest::from_json(dup), Err(ManifestError::Duplicate(_))));
    }
}
