//! The five fusion operators.

use sl_core::{
    evidence_from_opinion, opinion_from_evidence, EvidenceVector, Real, SubjectiveOpinion,
};

use crate::conflict::{
    agreement_matrix, conflict_matrix, discount_factors, discount_opinion, AgreementMatrix,
    ConflictMatrix, DiscountFactors,
};
use crate::error::FusionError;

/// Uncertainty floor inside the GBAF product terms, guarding against
/// underflow-driven 0/0 for near-dogmatic inputs. Exact zeros are handled
/// by the dogmatic limit rule before the closed form runs.
const UNCERTAINTY_FLOOR: f64 = 1e-15;

fn check_family<T: Real>(
    opinions: &[SubjectiveOpinion<T>],
    min: usize,
) -> Result<usize, FusionError> {
    if opinions.len() < min {
        return Err(FusionError::TooFewOpinions {
            min,
            got: opinions.len(),
        });
    }
    let k = opinions[0].num_classes();
    for op in &opinions[1..] {
        if op.num_classes() != k {
            return Err(FusionError::ClassMismatch {
                first: k,
                other: op.num_classes(),
            });
        }
    }
    Ok(k)
}

fn mean_base_rates<T: Real>(opinions: &[SubjectiveOpinion<T>]) -> Vec<T> {
    let k = opinions[0].num_classes();
    let count = T::count(opinions.len());
    (0..k)
        .map(|i| {
            opinions
                .iter()
                .map(|op| op.base_rates()[i])
                .sum::<T>()
                / count
        })
        .collect()
}

/// Limit of the averaging fusions when the subset `Z` of inputs is
/// dogmatic: infinite evidence swamps the rest, so fused beliefs are the
/// arithmetic mean over `Z` only and fused u = 0.
fn dogmatic_limit<T: Real>(
    opinions: &[SubjectiveOpinion<T>],
    dogmatic: &[usize],
) -> SubjectiveOpinion<T> {
    let k = opinions[0].num_classes();
    let count = T::count(dogmatic.len());
    let beliefs = (0..k)
        .map(|i| {
            dogmatic
                .iter()
                .map(|&v| opinions[v].beliefs()[i])
                .sum::<T>()
                / count
        })
        .collect();
    SubjectiveOpinion::new_unchecked(beliefs, T::zero(), mean_base_rates(opinions))
}

fn dogmatic_indices<T: Real>(opinions: &[SubjectiveOpinion<T>]) -> Vec<usize> {
    opinions
        .iter()
        .enumerate()
        .filter(|(_, op)| op.is_dogmatic())
        .map(|(v, _)| v)
        .collect()
}

/// Belief-averaging fusion of a pair:
/// `b_k = (b¹_k u² + b²_k u¹) / (u¹ + u²)`, `u = 2 u¹ u² / (u¹ + u²)`,
/// base rates averaged. Two dogmatic inputs take the limit rule.
pub fn fuse_baf_pair<T: Real>(
    first: &SubjectiveOpinion<T>,
    second: &SubjectiveOpinion<T>,
) -> Result<SubjectiveOpinion<T>, FusionError> {
    let pair = [first.clone(), second.clone()];
    check_family(&pair, 2)?;
    let (u1, u2) = (first.uncertainty(), second.uncertainty());
    if u1 == T::zero() && u2 == T::zero() {
        return Ok(dogmatic_limit(&pair, &[0, 1]));
    }
    let den = u1 + u2;
    let beliefs = first
        .beliefs()
        .iter()
        .zip(second.beliefs())
        .map(|(&b1, &b2)| (b1 * u2 + b2 * u1) / den)
        .collect();
    let uncertainty = T::num(2.0) * u1 * u2 / den;
    Ok(SubjectiveOpinion::new_unchecked(
        beliefs,
        uncertainty,
        mean_base_rates(&pair),
    ))
}

/// Left-fold of [`fuse_baf_pair`] in the given order. Order matters:
/// earlier opinions are halved at every later step.
///
/// When every input is non-dogmatic the fold runs in evidence space
/// (`e ← (e + e_next) / 2`, the evidence form of the same operator), which
/// keeps integer-valued evidence exact.
pub fn fuse_baf_sequential<T: Real>(
    opinions: &[SubjectiveOpinion<T>],
) -> Result<SubjectiveOpinion<T>, FusionError> {
    check_family(opinions, 2)?;
    if opinions.iter().any(|op| op.is_dogmatic()) {
        let mut acc = opinions[0].clone();
        for next in &opinions[1..] {
            acc = fuse_baf_pair(&acc, next)?;
        }
        return Ok(acc);
    }

    let half = T::num(0.5);
    let mut evidence = evidence_from_opinion(&opinions[0])?.evidence().to_vec();
    let mut base_rates = opinions[0].base_rates().to_vec();
    for next in &opinions[1..] {
        let en = evidence_from_opinion(next)?;
        for (acc, &e) in evidence.iter_mut().zip(en.evidence()) {
            *acc = (*acc + e) * half;
        }
        for (acc, &a) in base_rates.iter_mut().zip(next.base_rates()) {
            *acc = (*acc + a) * half;
        }
    }
    let fused = EvidenceVector::try_new(evidence)?;
    Ok(opinion_from_evidence(&fused, Some(base_rates))?)
}

/// Generalized belief-averaging fusion of V opinions at once:
/// `b_k = Σ_v b^v_k Π_{i≠v} u^i / Σ_v Π_{i≠v} u^i`,
/// `u = V Π_i u^i / Σ_v Π_{i≠v} u^i`, base rates averaged.
///
/// The fused uncertainty is the harmonic mean of the inputs' and the
/// result is permutation-invariant. Dogmatic inputs take the limit rule.
pub fn fuse_gbaf<T: Real>(
    opinions: &[SubjectiveOpinion<T>],
) -> Result<SubjectiveOpinion<T>, FusionError> {
    let k = check_family(opinions, 1)?;
    let dogmatic = dogmatic_indices(opinions);
    if !dogmatic.is_empty() {
        return Ok(dogmatic_limit(opinions, &dogmatic));
    }

    let v = opinions.len();
    let floor = T::num(UNCERTAINTY_FLOOR);
    let u: Vec<T> = opinions
        .iter()
        .map(|op| op.uncertainty().max(floor))
        .collect();

    // Π_{i≠v} u_i for each v, then the full product.
    let partials: Vec<T> = (0..v)
        .map(|skip| {
            u.iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .fold(T::one(), |acc, (_, &ui)| acc * ui)
        })
        .collect();
    let den: T = partials.iter().copied().sum();
    let full = partials[0] * u[0];

    let beliefs = (0..k)
        .map(|i| {
            opinions
                .iter()
                .zip(&partials)
                .map(|(op, &p)| op.beliefs()[i] * p)
                .sum::<T>()
                / den
        })
        .collect();
    let uncertainty = T::count(v) * full / den;
    Ok(SubjectiveOpinion::new_unchecked(
        beliefs,
        uncertainty,
        mean_base_rates(opinions),
    ))
}

/// Cumulative fusion: per-view evidence vectors add.
///
/// Dogmatic inputs carry infinite evidence and take the limit rule; a
/// single input is returned unchanged.
pub fn fuse_cbf<T: Real>(
    opinions: &[SubjectiveOpinion<T>],
) -> Result<SubjectiveOpinion<T>, FusionError> {
    let k = check_family(opinions, 1)?;
    let dogmatic = dogmatic_indices(opinions);
    if !dogmatic.is_empty() {
        return Ok(dogmatic_limit(opinions, &dogmatic));
    }
    if opinions.len() == 1 {
        return Ok(opinions[0].clone());
    }

    let mut total = vec![T::zero(); k];
    for op in opinions {
        let e = evidence_from_opinion(op)?;
        for (acc, &x) in total.iter_mut().zip(e.evidence()) {
            *acc += x;
        }
    }
    let fused = EvidenceVector::try_new(total)?;
    Ok(opinion_from_evidence(&fused, Some(mean_base_rates(opinions)))?)
}

/// Belief-constraint (Dempster) fusion of a pair:
/// `b_k = (b¹_k b²_k + b¹_k u² + b²_k u¹) / (1 - Con)`,
/// `u = u¹ u² / (1 - Con)` with `Con = Σ_{i≠j} b¹_i b²_j`.
///
/// Fails when `Con = 1` (totally conflicting dogmatic opinions).
pub fn fuse_bcf_pair<T: Real>(
    first: &SubjectiveOpinion<T>,
    second: &SubjectiveOpinion<T>,
) -> Result<SubjectiveOpinion<T>, FusionError> {
    let pair = [first.clone(), second.clone()];
    check_family(&pair, 2)?;
    let (u1, u2) = (first.uncertainty(), second.uncertainty());

    let second_total: T = second.beliefs().iter().copied().sum();
    let con = first
        .beliefs()
        .iter()
        .zip(second.beliefs())
        .map(|(&b1, &b2)| b1 * (second_total - b2))
        .sum::<T>();
    let den = T::one() - con;
    if den <= T::zero() {
        return Err(FusionError::TotalConflict);
    }

    let beliefs = first
        .beliefs()
        .iter()
        .zip(second.beliefs())
        .map(|(&b1, &b2)| (b1 * b2 + b1 * u2 + b2 * u1) / den)
        .collect();
    let uncertainty = u1 * u2 / den;
    Ok(SubjectiveOpinion::new_unchecked(
        beliefs,
        uncertainty,
        mean_base_rates(&pair),
    ))
}

/// Left-fold of [`fuse_bcf_pair`]. The operator is associative on beliefs
/// and uncertainty, so the result does not depend on the order; base rates
/// follow the pairwise averaging of the fold.
pub fn fuse_bcf<T: Real>(
    opinions: &[SubjectiveOpinion<T>],
) -> Result<SubjectiveOpinion<T>, FusionError> {
    check_family(opinions, 2)?;
    let mut acc = opinions[0].clone();
    for next in &opinions[1..] {
        acc = fuse_bcf_pair(&acc, next)?;
    }
    Ok(acc)
}

/// Diagnostics returned alongside the DBF result.
#[derive(Debug, Clone, PartialEq)]
pub struct DbfDiagnostics<T> {
    pub conflict: ConflictMatrix<T>,
    pub agreement: AgreementMatrix<T>,
    pub discounts: DiscountFactors<T>,
}

/// Discounted belief fusion: conflict matrix → agreement matrix (with
/// sharpness λ) → per-view discounts → trust discounting → GBAF.
///
/// A single opinion passes through unchanged with conflict matrix `[[0]]`.
pub fn fuse_dbf<T: Real>(
    opinions: &[SubjectiveOpinion<T>],
    lambda: T,
) -> Result<(SubjectiveOpinion<T>, DbfDiagnostics<T>), FusionError> {
    check_family(opinions, 1)?;
    let conflict = conflict_matrix(opinions)?;
    let agreement = agreement_matrix(&conflict, lambda)?;
    let discounts = discount_factors(&agreement);
    let discounted: Vec<SubjectiveOpinion<T>> = opinions
        .iter()
        .zip(discounts.as_slice())
        .map(|(op, &eta)| discount_opinion(op, eta))
        .collect::<Result<_, _>>()?;
    let fused = fuse_gbaf(&discounted)?;
    Ok((
        fused,
        DbfDiagnostics {
            conflict,
            agreement,
            discounts,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use sl_core::{Evidence, Opinion};

    fn from_evidence(e: Vec<f64>) -> Opinion {
        opinion_from_evidence(&Evidence::try_new(e).unwrap(), None).unwrap()
    }

    fn assert_close(op: &Opinion, beliefs: &[f64], u: f64, tol: f64) {
        for (got, want) in op.beliefs().iter().zip(beliefs) {
            assert_relative_eq!(got, want, max_relative = tol, epsilon = tol);
        }
        assert_relative_eq!(op.uncertainty(), u, max_relative = tol, epsilon = tol);
    }

    #[test]
    fn baf_pair_matches_evidence_route() {
        let a = from_evidence(vec![3.0, 1.0, 0.0]);
        let b = from_evidence(vec![0.5, 2.5, 4.0]);
        let fused = fuse_baf_pair(&a, &b).unwrap();
        // Independent route: average the evidences.
        let ea = evidence_from_opinion(&a).unwrap();
        let eb = evidence_from_opinion(&b).unwrap();
        let mean: Vec<f64> = ea
            .evidence()
            .iter()
            .zip(eb.evidence())
            .map(|(x, y)| (x + y) / 2.0)
            .collect();
        let oracle = from_evidence(mean);
        assert_close(&fused, oracle.beliefs(), oracle.uncertainty(), 1e-12);
    }

    #[test]
    fn baf_pair_uncertainty_is_harmonic_mean() {
        let a = Opinion::try_new(vec![0.8, 0.0], 0.2, None).unwrap();
        let b = Opinion::try_new(vec![0.0, 0.2], 0.8, None).unwrap();
        let fused = fuse_baf_pair(&a, &b).unwrap();
        assert_relative_eq!(fused.uncertainty(), 0.32, max_relative = 1e-15);
    }

    #[test]
    fn baf_pair_with_one_dogmatic_returns_it() {
        let dog = Opinion::try_new(vec![1.0, 0.0], 0.0, None).unwrap();
        let soft = Opinion::try_new(vec![0.25, 0.25], 0.5, None).unwrap();
        let fused = fuse_baf_pair(&dog, &soft).unwrap();
        assert_eq!(fused.beliefs(), dog.beliefs());
        assert_eq!(fused.uncertainty(), 0.0);
    }

    #[test]
    fn baf_sequential_witness_is_exact() {
        let ops = [
            from_evidence(vec![3.0, 0.0, 0.0]),
            from_evidence(vec![5.0, 0.0, 0.0]),
            from_evidence(vec![10.0, 0.0, 0.0]),
        ];
        let fused = fuse_baf_sequential(&ops).unwrap();
        let e = evidence_from_opinion(&fused).unwrap();
        assert_eq!(e.evidence()[0], 7.0);

        let reversed: Vec<Opinion> = ops.iter().rev().cloned().collect();
        let fused = fuse_baf_sequential(&reversed).unwrap();
        let e = evidence_from_opinion(&fused).unwrap();
        assert_eq!(e.evidence()[0], 5.25);
    }

    #[test]
    fn baf_sequential_matches_belief_form_fold() {
        let ops = [
            from_evidence(vec![3.0, 1.0]),
            from_evidence(vec![0.0, 2.0]),
            from_evidence(vec![5.5, 0.5]),
        ];
        let fused = fuse_baf_sequential(&ops).unwrap();
        // Oracle: fold the belief-form pair directly.
        let mut acc = ops[0].clone();
        for next in &ops[1..] {
            acc = fuse_baf_pair(&acc, next).unwrap();
        }
        assert_close(&fused, acc.beliefs(), acc.uncertainty(), 1e-12);
    }

    #[test]
    fn gbaf_single_is_identity() {
        let op = from_evidence(vec![2.0, 3.0]);
        let fused = fuse_gbaf(std::slice::from_ref(&op)).unwrap();
        assert_eq!(fused.beliefs(), op.beliefs());
        assert_eq!(fused.uncertainty(), op.uncertainty());
    }

    #[test]
    fn gbaf_of_identical_opinions_is_identity() {
        let op = from_evidence(vec![2.0, 3.0, 1.0]);
        let fused = fuse_gbaf(&[op.clone(), op.clone(), op.clone()]).unwrap();
        assert_close(&fused, op.beliefs(), op.uncertainty(), 1e-14);
    }

    #[test]
    fn gbaf_uncertainty_is_harmonic_mean() {
        let a = Opinion::try_new(vec![0.8, 0.0], 0.2, None).unwrap();
        let b = Opinion::try_new(vec![0.0, 0.2], 0.8, None).unwrap();
        let fused = fuse_gbaf(&[a, b]).unwrap();
        assert_relative_eq!(fused.uncertainty(), 0.32, max_relative = 1e-14);
    }

    #[test]
    fn gbaf_matches_evidence_mean_route() {
        let ops = [
            from_evidence(vec![3.0, 1.0, 0.2]),
            from_evidence(vec![0.5, 2.5, 4.0]),
            from_evidence(vec![1.0, 1.0, 1.0]),
        ];
        let fused = fuse_gbaf(&ops).unwrap();
        let mut mean = vec![0.0; 3];
        for op in &ops {
            for (acc, &e) in mean
                .iter_mut()
                .zip(evidence_from_opinion(op).unwrap().evidence())
            {
                *acc += e / 3.0;
            }
        }
        let oracle = from_evidence(mean);
        assert_close(&fused, oracle.beliefs(), oracle.uncertainty(), 1e-12);
    }

    #[test]
    fn gbaf_dogmatic_subset_takes_over() {
        let dog1 = Opinion::try_new(vec![1.0, 0.0], 0.0, None).unwrap();
        let dog2 = Opinion::try_new(vec![0.5, 0.5], 0.0, None).unwrap();
        let soft = Opinion::try_new(vec![0.1, 0.1], 0.8, None).unwrap();
        let fused = fuse_gbaf(&[dog1, soft, dog2]).unwrap();
        assert_eq!(fused.beliefs(), &[0.75, 0.25]);
        assert_eq!(fused.uncertainty(), 0.0);
    }

    #[test]
    fn cbf_adds_evidence() {
        let a = from_evidence(vec![1.0, 2.0]);
        let b = from_evidence(vec![3.0, 4.0]);
        let fused = fuse_cbf(&[a, b]).unwrap();
        let e = evidence_from_opinion(&fused).unwrap();
        assert_relative_eq!(e.evidence()[0], 4.0, max_relative = 1e-12);
        assert_relative_eq!(e.evidence()[1], 6.0, max_relative = 1e-12);
    }

    #[test]
    fn cbf_single_is_identity() {
        let op = from_evidence(vec![2.0, 3.0]);
        let fused = fuse_cbf(std::slice::from_ref(&op)).unwrap();
        assert_eq!(fused, op);
    }

    #[test]
    fn bcf_vacuous_is_neutral() {
        let op = Opinion::try_new(vec![0.5, 0.25], 0.25, None).unwrap();
        let vac = Opinion::vacuous(2).unwrap();
        let fused = fuse_bcf_pair(&op, &vac).unwrap();
        assert_eq!(fused.beliefs(), op.beliefs());
        assert_eq!(fused.uncertainty(), op.uncertainty());
    }

    #[test]
    fn bcf_rejects_total_conflict() {
        let a = Opinion::try_new(vec![1.0, 0.0], 0.0, None).unwrap();
        let b = Opinion::try_new(vec![0.0, 1.0], 0.0, None).unwrap();
        assert_eq!(fuse_bcf_pair(&a, &b).unwrap_err(), FusionError::TotalConflict);
    }

    #[test]
    fn bcf_fold_is_associative() {
        let ops = [
            from_evidence(vec![3.0, 1.0]),
            from_evidence(vec![0.5, 2.0]),
            from_evidence(vec![1.5, 1.5]),
        ];
        let left = fuse_bcf_pair(&fuse_bcf_pair(&ops[0], &ops[1]).unwrap(), &ops[2]).unwrap();
        let right = fuse_bcf_pair(&ops[0], &fuse_bcf_pair(&ops[1], &ops[2]).unwrap()).unwrap();
        assert_close(&left, right.beliefs(), right.uncertainty(), 1e-12);
    }

    #[test]
    fn dbf_single_is_identity_with_zero_conflict() {
        let op = from_evidence(vec![2.0, 3.0]);
        let (fused, diag) = fuse_dbf(std::slice::from_ref(&op), 1.0).unwrap();
        assert_eq!(fused.beliefs(), op.beliefs());
        assert_eq!(fused.uncertainty(), op.uncertainty());
        assert_eq!(diag.conflict.rows(), vec![vec![0.0]]);
        assert_eq!(diag.discounts.as_slice(), &[1.0]);
    }

    #[test]
    fn dbf_of_identical_opinions_is_identity() {
        let op = from_evidence(vec![2.0, 3.0, 1.0]);
        let (fused, diag) = fuse_dbf(&[op.clone(), op.clone()], 1.0).unwrap();
        assert_eq!(diag.discounts.as_slice(), &[1.0, 1.0]);
        assert_close(&fused, op.beliefs(), op.uncertainty(), 1e-14);
    }

    #[test]
    fn dbf_uncertainty_decreases_with_lambda() {
        let a = Opinion::try_new(vec![0.99, 0.0, 0.01], 0.0, None).unwrap();
        let b = Opinion::try_new(vec![0.0, 0.99, 0.01], 0.0, None).unwrap();
        let mut last = f64::INFINITY;
        for lambda in [1.0, 3.0, 10.0] {
            let (fused, _) = fuse_dbf(&[a.clone(), b.clone()], lambda).unwrap();
            assert!(fused.uncertainty() < last);
            last = fused.uncertainty();
        }
    }
}
