//! Dirichlet evidence and the opinion ↔ evidence bijection.

use crate::error::OpinionError;
use crate::opinion::{uniform_base_rates, SubjectiveOpinion};
use crate::real::Real;

/// Non-negative Dirichlet evidence, one entry per class.
///
/// The Dirichlet parameters are `α_k = e_k + 1` and the strength is
/// `S = Σ α_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceVector<T> {
    evidence: Vec<T>,
}

impl<T: Real> EvidenceVector<T> {
    /// Builds an evidence vector, rejecting empty, negative, or non-finite
    /// entries.
    pub fn try_new(evidence: Vec<T>) -> Result<Self, OpinionError> {
        if evidence.is_empty() {
            return Err(OpinionError::EmptyDomain);
        }
        for (index, &e) in evidence.iter().enumerate() {
            if !e.is_finite() {
                return Err(OpinionError::NonFinite { what: "evidence" });
            }
            if e < T::zero() {
                return Err(OpinionError::Negative {
                    what: "evidence",
                    index,
                    value: e.as_f64(),
                });
            }
        }
        Ok(EvidenceVector { evidence })
    }

    /// The evidence values.
    pub fn evidence(&self) -> &[T] {
        &self.evidence
    }

    /// Number of classes `K`.
    pub fn num_classes(&self) -> usize {
        self.evidence.len()
    }

    /// Dirichlet parameters `α_k = e_k + 1`.
    pub fn alpha(&self) -> Vec<T> {
        self.evidence.iter().map(|&e| e + T::one()).collect()
    }

    /// Dirichlet strength `S = Σ (e_k + 1)`.
    pub fn strength(&self) -> T {
        self.evidence.iter().map(|&e| e + T::one()).sum()
    }
}

/// Maps evidence to the opinion `b_k = e_k / S`, `u = K / S`.
///
/// `base_rates = None` means uniform. The output satisfies additivity
/// analytically, and `u` equals `K / S` exactly as computed.
pub fn opinion_from_evidence<T: Real>(
    evidence: &EvidenceVector<T>,
    base_rates: Option<Vec<T>>,
) -> Result<SubjectiveOpinion<T>, OpinionError> {
    let k = evidence.num_classes();
    let strength = evidence.strength();
    let beliefs: Vec<T> = evidence.evidence().iter().map(|&e| e / strength).collect();
    let uncertainty = T::count(k) / strength;
    let base_rates = match base_rates {
        None => uniform_base_rates(k),
        Some(a) => {
            // Route through the checked constructor so explicit base rates
            // get the same validation as everywhere else.
            return SubjectiveOpinion::try_new(beliefs, uncertainty, Some(a));
        }
    };
    Ok(SubjectiveOpinion::new_unchecked(
        beliefs,
        uncertainty,
        base_rates,
    ))
}

/// Maps an opinion back to evidence via `S = K / u`, `e_k = b_k · S`.
///
/// Dogmatic opinions (`u = 0`) have unbounded evidence and are rejected.
pub fn evidence_from_opinion<T: Real>(
    op: &SubjectiveOpinion<T>,
) -> Result<EvidenceVector<T>, OpinionError> {
    if op.uncertainty() == T::zero() {
        return Err(OpinionError::DogmaticEvidence);
    }
    let strength = T::count(op.num_classes()) / op.uncertainty();
    if !strength.is_finite() {
        return Err(OpinionError::NonFinite { what: "evidence" });
    }
    let evidence = op.beliefs().iter().map(|&b| b * strength).collect();
    EvidenceVector::try_new(evidence)
}
