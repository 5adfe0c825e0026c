use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::input::{CoTInstance, CoTMetadata};
use super::training::TrainingInstance;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub instance_count: usize,
    pub distinct_lemmas: usize,
    pub per_category: BTreeMap<String, usize>,
    pub excluded_by_holdout: usize,
}

/// Anything carrying the lemma identity and category of one instance.
pub trait StatsItem {
    fn metadata(&self) -> &CoTMetadata;
}

impl StatsItem for CoTInstance {
    fn metadata(&self) -> &CoTMetadata {
        &self.metadata
    }
}

impl StatsItem for TrainingInstance {
    fn metadata(&self) -> &CoTMetadata {
        &self.metadata
    }
}

/// Lemmas are distinguished by (project, theory, name).
pub fn dataset_stats<T: StatsItem>(instances: &[T], excluded: usize) -> DatasetStats {
    let mut lemmas = BTreeSet::new();
    let mut per_category = BTreeMap::new();
    for inst in instances {
        let m = inst.metadata();
        lemmas.insert((&m.project, &m.theory_name, &m.lemma_name));
        *per_category.entry(m.category.clone()).or_insert(0) += 1;
    }
    DatasetStats {
        instance_count: instances.len(),
        distinct_lemmas: lemmas.len(),
        per_category,
        excluded_by_holdout: excluded,
    }
}
