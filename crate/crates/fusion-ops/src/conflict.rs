//! Degree of conflict, conflict/agreement matrices, and discounting.

use sl_core::{Real, SubjectiveOpinion};

use crate::error::FusionError;

/// Components of the pairwise degree of conflict.
///
/// `pd` is half the L1 distance between the projected distributions, `cc`
/// the conflict certainty `(1 - u¹)(1 - u²)`, and `dc = pd · cc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeOfConflict<T> {
    pub pd: T,
    pub cc: T,
    pub dc: T,
}

/// Degree of conflict between two opinions over the same domain.
///
/// Zero iff the projected distributions agree or either opinion is vacuous;
/// at most one, reached only by totally conflicting dogmatic opinions.
pub fn degree_of_conflict<T: Real>(
    first: &SubjectiveOpinion<T>,
    second: &SubjectiveOpinion<T>,
) -> Result<DegreeOfConflict<T>, FusionError> {
    if first.num_classes() != second.num_classes() {
        return Err(FusionError::ClassMismatch {
            first: first.num_classes(),
            other: second.num_classes(),
        });
    }
    let p1 = first.project();
    let p2 = second.project();
    let half = T::num(0.5);
    let pd = p1
        .probs()
        .iter()
        .zip(p2.probs())
        .map(|(&a, &b)| (a - b).abs())
        .sum::<T>()
        * half;
    let cc = (T::one() - first.uncertainty()) * (T::one() - second.uncertainty());
    Ok(DegreeOfConflict { pd, cc, dc: pd * cc })
}

/// Symmetric V×V matrix of pairwise degrees of conflict, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> ConflictMatrix<T> {
    /// Number of opinions V.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `C_ij`.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    /// The matrix as rows, for serialization.
    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }
}

/// Pairwise conflict matrix `C_ij = dc(ωⁱ, ωʲ)`.
pub fn conflict_matrix<T: Real>(
    opinions: &[SubjectiveOpinion<T>],
) -> Result<ConflictMatrix<T>, FusionError> {
    let v = opinions.len();
    if v == 0 {
        return Err(FusionError::TooFewOpinions { min: 1, got: 0 });
    }
    let mut data = vec![T::zero(); v * v];
    for i in 0..v {
        for j in (i + 1)..v {
            let dc = degree_of_conflict(&opinions[i], &opinions[j])?.dc;
            data[i * v + j] = dc;
            data[j * v + i] = dc;
        }
    }
    Ok(ConflictMatrix { dim: v, data })
}

/// Elementwise agreement `A_ij = (1 - C_ij^λ)^(1/λ)`, unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> AgreementMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `A_ij`.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }
}

/// Maps conflict to agreement; λ tunes how sharply conflict is forgiven.
///
/// λ = 1 gives `A = 1 - C`; larger λ pushes agreement toward 1 for any
/// conflict below total.
pub fn agreement_matrix<T: Real>(
    conflict: &ConflictMatrix<T>,
    lambda: T,
) -> Result<AgreementMatrix<T>, FusionError> {
    if lambda <= T::zero() || !lambda.is_finite() {
        return Err(FusionError::NonPositiveLambda {
            value: lambda.as_f64(),
        });
    }
    let inv = T::one() / lambda;
    let data = conflict
        .data
        .iter()
        .map(|&c| (T::one() - c.powf(lambda)).powf(inv))
        .collect();
    Ok(AgreementMatrix {
        dim: conflict.dim,
        data,
    })
}

/// Per-view discount factors `η_v = Π_i A_vi` (row products).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountFactors<T> {
    factors: Vec<T>,
}

impl<T: Real> DiscountFactors<T> {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn get(&self, v: usize) -> T {
        self.factors[v]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.factors
    }
}

/// Row products of the agreement matrix: how much each view is trusted
/// after seeing how the others disagree with it.
pub fn discount_factors<T: Real>(agreement: &AgreementMatrix<T>) -> DiscountFactors<T> {
    let v = agreement.dim;
    let factors = (0..v)
        .map(|row| {
            (0..v)
                .map(|col| agreement.get(row, col))
                .fold(T::one(), |acc, a| acc * a)
        })
        .collect();
    DiscountFactors { factors }
}

/// Trust discounting: `b' = η b`, `u' = 1 - η + η u`; base rates unchanged.
///
/// η = 1 keeps the opinion bit-exact, η = 0 yields the vacuous opinion.
pub fn discount_opinion<T: Real>(
    op: &SubjectiveOpinion<T>,
    eta: T,
) -> Result<SubjectiveOpinion<T>, FusionError> {
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(FusionError::DiscountOutOfRange {
            value: eta.as_f64(),
        });
    }
    if eta == T::one() {
        return Ok(op.clone());
    }
    let beliefs = op.beliefs().iter().map(|&b| eta * b).collect();
    let uncertainty = T::one() - eta + eta * op.uncertainty();
    Ok(SubjectiveOpinion::new_unchecked(
        beliefs,
        uncertainty,
        op.base_rates().to_vec(),
    ))
}
