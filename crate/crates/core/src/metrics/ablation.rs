use serde::{Deserialize, Serialize};

use super::{ratio4, render_percent, MetricsError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationRow {
    pub config_label: String,
    pub context_enabled: bool,
    pub cot_backend: bool,
    pub solved: u64,
    pub total: u64,
}

impl AblationRow {
    pub fn default_label(context_enabled: bool, cot_backend: bool) -> &'static str {
        match (cot_backend, context_enabled) {
            (false, false) => "Base model",
            (true, false) => "Base model + CoT-based proof training",
            (false, true) => "Base model + context augmentation",
            (true, true) => "Base model + CoT-based proof training + context augmentation",
        }
    }

    pub fn percent(&self) -> String {
        render_percent(self.solved, self.total)
    }

    pub fn rate(&self) -> Option<f64> {
        ratio4(self.solved, self.total)
    }

    fn rank(&self) -> u8 {
        match (self.cot_backend, self.context_enabled) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

/// Orders rows base, +CoT, +context, full.
pub fn ablation_report(mut rows: Vec<AblationRow>) -> Result<AblationTable, MetricsError> {
    rows.sort_by_key(AblationRow::rank);
    if let Some(w) = rows.windows(2).find(|w| w[0].rank() == w[1].rank()) {
        return Err(MetricsError::DuplicateConfig {
            context_enabled: w[0].context_enabled,
            cot_backend: w[0].cot_backend,
        });
    }
    Ok(AblationTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(ctx: bool, cot: bool, solved: u64) -> AblationRow {
        AblationRow {
            config_label: AblationRow::default_label(ctx, cot).into(),
            context_enabled: ctx,
            cot_backend: cot,
            solved,
            total: 105,
        }
    }

    #[test]
    fn ordering() {
        let t = ablation_report(vec![row(true, true, 57), row(true, false, 6), row(false, false, 1), row(false, true, 24)])
            .unwrap();
        assert_eq!(t.rows.iter().map(|r| r.solved).collect::<Vec<_>>(), [1, 24, 6, 57]);
        assert_eq!(ablation_report(vec![row(false, false, 1)]).unwrap().rows.len(), 1);
    }

    #[test]
    fn duplicate_config() {
        assert_eq!(
            ablation_report(vec![row(true, false, 1), row(true, false, 2)]),
            Err(MetricsError::DuplicateConfig { context_enabled: true, cot_backend: false })
        );
    }
}
