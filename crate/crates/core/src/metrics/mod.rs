//! Success rates, budget curves, duplication and method statistics,
//! rationale audit flags and the ablation table.
//!
//! All rounding is integer half-up so that rendered percentages are exact
//! functions of the solved/total integers.

pub mod ablation;
pub mod proofs;
pub mod rationale;
pub mod report;
pub mod success;

use thiserror::Error;

pub use ablation::{ablation_report, AblationRow, AblationTable};
pub use proofs::{duplication_stats, method_count_distribution, DuplicationStats, MethodStats};
pub use rationale::{rationale_audit, rationale_flags, FlagReason, RationaleAudit, RationaleFlag};
pub use report::{write_atomic, EvaluationReport};
pub use success::{budget_curve, success_rate, BudgetCurve, BudgetPoint, CategoryResult, SuccessTable};

/// Placeholder for rates over an empty denominator.
pub const NO_RATE: &str = "—";

pub const DEFAULT_BUDGET_CAPS: [u32; 4] = [5, 64, 128, 256];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("theorem {0} appears in more than one result")]
    DuplicateTheorem(String),
    #[error("budget caps must be ascending and at least 1")]
    InvalidCaps,
    #[error("two ablation rows share the configuration context={context_enabled}, cot={cot_backend}")]
    DuplicateConfig { context_enabled: bool, cot_backend: bool },
}

/// `num / den` in units of `1/scale`, rounded half-up. `None` when `den` is 0.
pub fn round_ratio(num: u64, den: u64, scale: u64) -> Option<u64> {
    (den > 0).then(|| (2 * num * scale + den) / (2 * den))
}

/// Percent with two decimals, e.g. `51.67%`, or `—` for an empty total.
pub fn render_percent(solved: u64, total: u64) -> String {
    match round_ratio(solved, total, 10_000) {
        Some(h) => format!("{}.{:02}%", h / 100, h % 100),
        None => NO_RATE.to_string(),
    }
}

/// Ratio to four decimals as a float, for machine-readable output.
pub fn ratio4(solved: u64, total: u64) -> Option<f64> {
    round_ratio(solved, total, 10_000).map(|t| t as f64 / 10_000.0)
}

/// Mean to three decimals, e.g. `6.018`, or `—` for an empty list.
pub fn render_mean(sum: u64, len: u64) -> String {
    match round_ratio(sum, len, 1_000) {
        Some(t) => format!("{}.{:03}", t / 1000, t % 1000),
        None => NO_RATE.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up() {
        assert_eq!(render_percent(341, 660), "51.67%");
        assert_eq!(render_percent(1, 8), "12.50%");
        assert_eq!(render_percent(1, 1), "100.00%");
        assert_eq!(render_percent(0, 1), "0.00%");
        assert_eq!(render_percent(0, 0), NO_RATE);
        // 1/16 = 6.25% exactly; 1/32 = 3.125% rounds up
        assert_eq!(render_percent(1, 32), "3.13%");
    }

    #[test]
    fn means() {
        assert_eq!(render_mean(6, 2), "3.000");
        assert_eq!(render_mean(1, 3), "0.333");
        assert_eq!(render_mean(2, 3), "0.667");
        assert_eq!(render_mean(0, 0), NO_RATE);
    }
}
