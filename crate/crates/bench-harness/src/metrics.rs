//! Evaluation metrics: rank-based ROC AUC and fused-model test statistics.

use crate::error::HarnessError;
use evidential_train::{EvidentialNetwork, MultimodalBatch};
use fusion_ops::FusionMethod;
use serde::Serialize;

/// Mann-Whitney ROC AUC of `scores` against boolean `flags` (true =
/// positive). Ties count one half. Runs in O(N log N) via average ranks.
pub fn roc_auc(scores: &[f64], flags: &[bool]) -> Result<f64, HarnessError> {
    if scores.len() != flags.len() {
        return Err(HarnessError::ScoreFlagMismatch {
            scores: scores.len(),
            flags: flags.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(HarnessError::NonFiniteScore);
    }
    let n_pos = flags.iter().filter(|&&f| f).count();
    let n_neg = flags.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(HarnessError::DegenerateAuc);
    }

    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // Sum of positive ranks, with tied scores sharing their average rank.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j share the average.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &s in &idx[i..j] {
            if flags[s] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }

    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Fused predictions and uncertainties of a trained model on one batch.
pub fn fused_scores(
    net: &EvidentialNetwork,
    batch: &MultimodalBatch,
    method: FusionMethod,
    lambda: f64,
) -> Result<(Vec<usize>, Vec<f64>), HarnessError> {
    let mut preds = Vec::with_capacity(batch.len());
    let mut uncertainties = Vec::with_capacity(batch.len());
    for i in 0..batch.len() {
        let opinions = net.opinions(&batch.sample_features(i))?;
        let fused = method.fuse(&opinions, lambda)?;
        preds.push(fused.project().argmax());
        uncertainties.push(fused.uncertainty());
    }
    Ok((preds, uncertainties))
}

fn accuracy(preds: &[usize], labels: &[usize]) -> f64 {
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len() as f64
}

/// Mean and population standard deviation of a sample of reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub mean: f64,
    pub std: f64,
}

pub fn sample_stats(xs: &[f64]) -> SampleStats {
    if xs.is_empty() {
        return SampleStats { mean: 0.0, std: 0.0 };
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    SampleStats { mean, std: var.sqrt() }
}

/// One trained model evaluated on the clean test set and its
/// conflict-injected counterpart.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationFragment {
    pub clean_accuracy: f64,
    pub conflict_accuracy: f64,
    pub clean_uncertainty: SampleStats,
    pub conflict_uncertainty: SampleStats,
    /// Conflict detection AUC over the union of both sets, scored by fused
    /// uncertainty against the conflict flags.
    pub auc: f64,
    #[serde(skip)]
    pub clean_uncertainties: Vec<f64>,
    #[serde(skip)]
    pub conflict_uncertainties: Vec<f64>,
}

pub fn evaluate(
    net: &EvidentialNetwork,
    clean: &MultimodalBatch,
    conflict: &MultimodalBatch,
    method: FusionMethod,
    lambda: f64,
) -> Result<EvaluationFragment, HarnessError> {
    let (clean_preds, clean_u) = fused_scores(net, clean, method, lambda)?;
    let (conflict_preds, conflict_u) = fused_scores(net, conflict, method, lambda)?;

    let mut scores = clean_u.clone();
    scores.extend_from_slice(&conflict_u);
    let mut labels: Vec<bool> = (0..clean.len()).map(|i| clean.flag(i)).collect();
    labels.extend((0..conflict.len()).map(|i| conflict.flag(i)));
    let auc = roc_auc(&scores, &labels)?;

    Ok(EvaluationFragment {
        clean_accuracy: accuracy(&clean_preds, clean.labels()),
        conflict_accuracy: accuracy(&conflict_preds, conflict.labels()),
        clean_uncertainty: sample_stats(&clean_u),
        conflict_uncertainty: sample_stats(&conflict_u),
        auc,
        clean_uncertainties: clean_u,
        conflict_uncertainties: conflict_u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;

    /// O(N²) oracle: every flagged/clean pair, ties worth one half.
    fn brute_force_auc(scores: &[f64], flags: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &fi) in flags.iter().enumerate() {
            if !fi {
                continue;
            }
            for (j, &fj) in flags.iter().enumerate() {
                if fj {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn auc_examples() {
        let perfect = roc_auc(&[0.9, 0.8, 0.1, 0.2], &[true, true, false, false]).unwrap();
        assert_eq!(perfect, 1.0);
        let ties = roc_auc(&[0.4, 0.4, 0.4], &[true, false, false]).unwrap();
        assert_eq!(ties, 0.5);
        let mixed = roc_auc(&[0.3, 0.7, 0.5, 0.5], &[true, true, false, false]).unwrap();
        assert_eq!(mixed, 0.5);
        let inverted = roc_auc(&[0.1, 0.9], &[true, false]).unwrap();
        assert_eq!(inverted, 0.0);
    }

    #[test]
    fn auc_rejects_degenerate_input() {
        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[true, true]),
            Err(HarnessError::DegenerateAuc)
        ));
        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[false, false]),
            Err(HarnessError::DegenerateAuc)
        ));
        assert!(matches!(
            roc_auc(&[0.1, f64::NAN], &[true, false]),
            Err(HarnessError::NonFiniteScore)
        ));
        assert!(matches!(
            roc_auc(&[0.1], &[true, false]),
            Err(HarnessError::ScoreFlagMismatch { .. })
        ));
    }

    #[test]
    fn auc_matches_brute_force_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for case in 0..60 {
            let n = rng.gen_range(2..=200);
            // Coarse quantization forces plenty of ties.
            let scores: Vec<f64> = (0..n)
                .map(|_| (rng.gen_range(0..8) as f64) / 7.0)
                .collect();
            let mut flags: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
            // Guarantee both classes appear.
            flags[0] = true;
            if n > 1 {
                flags[1] = false;
            } else {
                continue;
            }
            let fast = roc_auc(&scores, &flags).unwrap();
            let slow = brute_force_auc(&scores, &flags);
            assert!(
                (fast - slow).abs() < 1e-12,
                "case {case}: rank {fast} vs brute force {slow}"
            );
            assert!((0.0..=1.0).contains(&fast));
        }
    }

    #[test]
    fn stats_of_constant_sample() {
        let s = sample_stats(&[0.25; 10]);
        assert_eq!(s.mean, 0.25);
        assert_eq!(s.std, 0.0);
        let single = sample_stats(&[3.0]);
        assert_eq!(single.mean, 3.0);
        assert_eq!(single.std, 0.0);
    }
}
