//! Rule-table checker keyed by theorem and canonical proof script.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{CheckerError, CheckerVerdict, RejectReason};
use crate::text::normalize_script;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TheoremKey {
    pub theory: String,
    pub lemma: String,
}

/// One `mock_rules.jsonl` line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    pub theorem_key: TheoremKey,
    pub normalized_script: String,
    pub verdict: CheckerVerdict,
}

#[derive(Debug, Clone, Default)]
pub struct MockChecker {
    rules: HashMap<(TheoremKey, String), CheckerVerdict>,
}

impl MockChecker {
    /// Rejects scripts that are not already canonical and conflicting
    /// duplicates, since either would make lookups ambiguous.
    pub fn new(rules: impl IntoIterator<Item = MockRule>) -> Result<Self, CheckerError> {
        let mut table = HashMap::new();
        for (i, rule) in rules.into_iter().enumerate() {
            let canonical = normalize_script(&rule.normalized_script)
                .map_err(|e| CheckerError::Config(format!("rule {}: {e}", i + 1)))?;
            if canonical != rule.normalized_script {
                return Err(CheckerError::Config(format!("rule {}: script is not canonical", i + 1)));
            }
            let key = (rule.theorem_key, rule.normalized_script);
            if let Some(prev) = table.insert(key, rule.verdict.clone()) {
                if prev != rule.verdict {
                    return Err(CheckerError::Config(format!("rule {}: conflicting verdict", i + 1)));
                }
            }
        }
        Ok(MockChecker { rules: table })
    }

    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, CheckerError> {
        let mut rules = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| CheckerError::Config(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let rule: MockRule = serde_json::from_str(&line)
                .map_err(|e| CheckerError::Config(format!("line {}: {e}", i + 1)))?;
            rules.push(rule);
        }
        Self::new(rules)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn lookup(&self, theory: &str, lemma: &str, proof_body: &str) -> CheckerVerdict {
        let Ok(script) = normalize_script(proof_body) else {
            return CheckerVerdict::rejected(RejectReason::ParseError);
        };
        let key = (TheoremKey { theory: theory.into(), lemma: lemma.into() }, script);
        self.rules
            .get(&key)
            .cloned()
            .unwrap_or_else(|| CheckerVerdict::rejected(RejectReason::UnknownFixture))
    }
}
