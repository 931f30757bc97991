//! Aggregation of per-seed evaluations into a report with mean ± std across
//! seeds, serialized as JSON and CSV.

use crate::metrics::EvaluationFragment;
use serde::Serialize;

/// Mean and standard deviation across seeds (population form; a single seed
/// reports std = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedStat {
    pub mean: f64,
    pub std: f64,
}

pub fn seed_stat(xs: &[f64]) -> SeedStat {
    let s = crate::metrics::sample_stats(xs);
    SeedStat { mean: s.mean, std: s.std }
}

/// One fusion method aggregated over all training seeds.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub seeds: Vec<u64>,
    pub clean_accuracy: SeedStat,
    pub conflict_accuracy: SeedStat,
    /// Across-seed statistics of the per-seed mean fused uncertainty.
    pub clean_uncertainty: SeedStat,
    pub conflict_uncertainty: SeedStat,
    pub auc: SeedStat,
}

pub fn summarize_method(
    method: &str,
    seeds: &[u64],
    fragments: &[EvaluationFragment],
) -> MethodSummary {
    let pull = |f: fn(&EvaluationFragment) -> f64| -> Vec<f64> {
        fragments.iter().map(f).collect()
    };
    MethodSummary {
        method: method.to_string(),
        seeds: seeds.to_vec(),
        clean_accuracy: seed_stat(&pull(|f| f.clean_accuracy)),
        conflict_accuracy: seed_stat(&pull(|f| f.conflict_accuracy)),
        clean_uncertainty: seed_stat(&pull(|f| f.clean_uncertainty.mean)),
        conflict_uncertainty: seed_stat(&pull(|f| f.conflict_uncertainty.mean)),
        auc: seed_stat(&pull(|f| f.auc)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<C: Serialize> {
    pub config: C,
    pub methods: Vec<MethodSummary>,
    pub wall_time_seconds: f64,
}

impl<C: Serialize> ExperimentReport<C> {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// One row per method; every statistic as mean and std columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,clean_accuracy_mean,clean_accuracy_std,\
             conflict_accuracy_mean,conflict_accuracy_std,\
             clean_uncertainty_mean,clean_uncertainty_std,\
             conflict_uncertainty_mean,conflict_uncertainty_std,\
             auc_mean,auc_std\n",
        );
        for m in &self.methods {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                m.method,
                m.clean_accuracy.mean,
                m.clean_accuracy.std,
                m.conflict_accuracy.mean,
                m.conflict_accuracy.std,
                m.clean_uncertainty.mean,
                m.clean_uncertainty.std,
                m.conflict_uncertainty.mean,
                m.conflict_uncertainty.std,
                m.auc.mean,
                m.auc.std,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::SampleStats;

    fn fragment(acc: f64, auc: f64) -> EvaluationFragment {
        EvaluationFragment {
            clean_accuracy: acc,
            conflict_accuracy: acc - 0.1,
            clean_uncertainty: SampleStats { mean: 0.2, std: 0.05 },
            conflict_uncertainty: SampleStats { mean: 0.7, std: 0.1 },
            auc,
            clean_uncertainties: vec![],
            conflict_uncertainties: vec![],
        }
    }

    #[test]
    fn single_seed_has_zero_std() {
        let s = summarize_method("dbf", &[0], &[fragment(0.9, 0.95)]);
        assert_eq!(s.clean_accuracy.mean, 0.9);
        assert_eq!(s.clean_accuracy.std, 0.0);
        assert_eq!(s.auc.std, 0.0);
    }

    #[test]
    fn mean_and_std_over_seeds() {
        let s = summarize_method(
            "gbaf",
            &[0, 1],
            &[fragment(0.8, 0.9), fragment(0.9, 0.7)],
        );
        assert!((s.clean_accuracy.mean - 0.85).abs() < 1e-15);
        assert!((s.clean_accuracy.std - 0.05).abs() < 1e-15);
        assert!((s.auc.mean - 0.8).abs() < 1e-15);
    }

    #[test]
    fn csv_has_header_and_one_row_per_method() {
        let report = ExperimentReport {
            config: serde_json::json!({"samples": 10}),
            methods: vec![
                summarize_method("gbaf", &[0], &[fragment(0.8, 0.9)]),
                summarize_method("dbf", &[0], &[fragment(0.82, 0.97)]),
            ],
            wall_time_seconds: 1.5,
        };
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("method,clean_accuracy_mean"));
        assert!(lines[1].starts_with("gbaf,0.8,"));
        assert!(lines[2].starts_with("dbf,0.82,"));
        let json = report.to_json().unwrap();
        assert!(json.contains("\"wall_time_seconds\""));
    }
}
