//! Multinomial opinions `ω = (b, u, a)` and projected probabilities.

use serde::{Deserialize, Serialize};

use crate::error::OpinionError;
use crate::real::Real;

/// Absolute tolerance for invariant checks (`f64`; see [`Real::invariant_tol`]).
pub const INVARIANT_TOL: f64 = 1e-9;

/// Constructors silently renormalize additivity residuals below this bound
/// and reject anything larger (`f64`; see [`Real::renorm_tol`]).
pub const RENORM_TOL: f64 = 1e-12;

/// A multinomial opinion: per-class belief masses `b`, uncertainty mass `u`,
/// and base rates `a`, with `Σ b_k + u = 1` and `Σ a_k = 1`.
///
/// The type is immutable after construction so the invariants cannot be
/// broken by mutation. [`SubjectiveOpinion::try_new`] checks them;
/// [`SubjectiveOpinion::new_unchecked`] is for callers that guarantee them
/// analytically (fusion operators, evidence conversion).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "OpinionRepr<T>",
    into = "OpinionRepr<T>",
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct SubjectiveOpinion<T: Real> {
    beliefs: Vec<T>,
    uncertainty: T,
    base_rates: Vec<T>,
}

/// Wire format. `base_rates` may be omitted on input and defaults to
/// uniform; output always spells it out.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpinionRepr<T> {
    beliefs: Vec<T>,
    uncertainty: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_rates: Option<Vec<T>>,
}

impl<T: Real> TryFrom<OpinionRepr<T>> for SubjectiveOpinion<T> {
    type Error = OpinionError;

    fn try_from(repr: OpinionRepr<T>) -> Result<Self, OpinionError> {
        Self::try_new(repr.beliefs, repr.uncertainty, repr.base_rates)
    }
}

impl<T: Real> From<SubjectiveOpinion<T>> for OpinionRepr<T> {
    fn from(op: SubjectiveOpinion<T>) -> Self {
        OpinionRepr {
            beliefs: op.beliefs,
            uncertainty: op.uncertainty,
            base_rates: Some(op.base_rates),
        }
    }
}

/// Uniform base rates `a_k = 1/K`.
pub fn uniform_base_rates<T: Real>(k: usize) -> Vec<T> {
    let ak = T::one() / T::count(k);
    vec![ak; k]
}

impl<T: Real> SubjectiveOpinion<T> {
    /// Builds an opinion from raw parts, checking the invariants.
    ///
    /// `base_rates = None` means uniform. Additivity residuals up to
    /// [`RENORM_TOL`] are scaled away silently; larger ones are rejected.
    /// Components in `[-RENORM_TOL, 0)` are treated as zero.
    pub fn try_new(
        beliefs: Vec<T>,
        uncertainty: T,
        base_rates: Option<Vec<T>>,
    ) -> Result<Self, OpinionError> {
        let k = beliefs.len();
        if k == 0 {
            return Err(OpinionError::EmptyDomain);
        }
        let mut beliefs = beliefs;
        let mut uncertainty = uncertainty;
        sanitize_components("beliefs", &mut beliefs)?;
        if !uncertainty.is_finite() {
            return Err(OpinionError::NonFinite { what: "uncertainty" });
        }
        if uncertainty < T::zero() {
            if uncertainty < -T::renorm_tol() {
                return Err(OpinionError::NegativeUncertainty {
                    value: uncertainty.as_f64(),
                });
            }
            uncertainty = T::zero();
        }

        let total: T = beliefs.iter().copied().sum::<T>() + uncertainty;
        let residual = total - T::one();
        if residual.abs() > T::renorm_tol() {
            return Err(OpinionError::Additivity {
                residual: residual.as_f64(),
            });
        }
        if residual.abs() > T::renorm_skip(k) {
            for b in &mut beliefs {
                *b /= total;
            }
            uncertainty /= total;
        }

        let base_rates = match base_rates {
            None => uniform_base_rates(k),
            Some(a) => normalize_base_rates(k, a)?,
        };

        Ok(SubjectiveOpinion {
            beliefs,
            uncertainty,
            base_rates,
        })
    }

    /// The vacuous opinion: `b = 0`, `u = 1`, uniform base rates.
    pub fn vacuous(k: usize) -> Result<Self, OpinionError> {
        if k == 0 {
            return Err(OpinionError::EmptyDomain);
        }
        Ok(SubjectiveOpinion {
            beliefs: vec![T::zero(); k],
            uncertainty: T::one(),
            base_rates: uniform_base_rates(k),
        })
    }

    /// Builds an opinion without checking, for values that satisfy the
    /// invariants by construction. Debug builds still verify them.
    pub fn new_unchecked(beliefs: Vec<T>, uncertainty: T, base_rates: Vec<T>) -> Self {
        let op = SubjectiveOpinion {
            beliefs,
            uncertainty,
            base_rates,
        };
        debug_assert!(
            validate_opinion(&op).is_ok(),
            "new_unchecked got an invalid opinion: {:?}",
            validate_opinion(&op)
        );
        op
    }

    /// Belief mass per class.
    pub fn beliefs(&self) -> &[T] {
        &self.beliefs
    }

    /// Uncertainty mass.
    pub fn uncertainty(&self) -> T {
        self.uncertainty
    }

    /// Prior base rates.
    pub fn base_rates(&self) -> &[T] {
        &self.base_rates
    }

    /// Number of classes `K`.
    pub fn num_classes(&self) -> usize {
        self.beliefs.len()
    }

    /// `u = 0`: all mass committed to classes.
    pub fn is_dogmatic(&self) -> bool {
        self.uncertainty == T::zero()
    }

    /// `u = 1`: no committed mass at all.
    pub fn is_vacuous(&self) -> bool {
        self.uncertainty == T::one()
    }

    /// Projected probabilities `P_k = b_k + a_k · u`.
    pub fn project(&self) -> ProjectedDistribution<T> {
        let probs = self
            .beliefs
            .iter()
            .zip(&self.base_rates)
            .map(|(&b, &a)| b + a * self.uncertainty)
            .collect();
        ProjectedDistribution { probs }
    }
}

/// Clamps tiny negative values to zero and rejects anything worse.
fn sanitize_components<T: Real>(
    what: &'static str,
    values: &mut [T],
) -> Result<(), OpinionError> {
    for (index, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(OpinionError::NonFinite { what });
        }
        if *v < T::zero() {
            if *v < -T::renorm_tol() {
                return Err(OpinionError::Negative {
                    what,
                    index,
                    value: v.as_f64(),
                });
            }
            *v = T::zero();
        }
    }
    Ok(())
}

/// Checks length and sum of explicit base rates, renormalizing tiny residuals.
fn normalize_base_rates<T: Real>(k: usize, mut a: Vec<T>) -> Result<Vec<T>, OpinionError> {
    if a.len() != k {
        return Err(OpinionError::LengthMismatch {
            what: "base rates",
            expected: k,
            got: a.len(),
        });
    }
    sanitize_components("base_rates", &mut a)?;
    let total: T = a.iter().copied().sum();
    let residual = total - T::one();
    if residual.abs() > T::renorm_tol() {
        return Err(OpinionError::BaseRateSum {
            residual: residual.as_f64(),
        });
    }
    if residual.abs() > T::renorm_skip(k) {
        for v in &mut a {
            *v /= total;
        }
    }
    Ok(a)
}

/// Checks the opinion invariants at [`INVARIANT_TOL`] and reports the first
/// violation together with its residual.
pub fn validate_opinion<T: Real>(op: &SubjectiveOpinion<T>) -> Result<(), OpinionError> {
    let tol = T::invariant_tol();
    if op.beliefs.is_empty() {
        return Err(OpinionError::EmptyDomain);
    }
    if op.beliefs.iter().any(|b| !b.is_finite()) {
        return Err(OpinionError::NonFinite { what: "beliefs" });
    }
    if !op.uncertainty.is_finite() {
        return Err(OpinionError::NonFinite { what: "uncertainty" });
    }
    if op.base_rates.iter().any(|a| !a.is_finite()) {
        return Err(OpinionError::NonFinite { what: "base_rates" });
    }

    let total: T = op.beliefs.iter().copied().sum::<T>() + op.uncertainty;
    let residual = total - T::one();
    if residual.abs() > tol {
        return Err(OpinionError::Additivity {
            residual: residual.as_f64(),
        });
    }
    for (index, &b) in op.beliefs.iter().enumerate() {
        if b < -tol {
            return Err(OpinionError::Negative {
                what: "beliefs",
                index,
                value: b.as_f64(),
            });
        }
    }
    if op.uncertainty < -tol {
        return Err(OpinionError::NegativeUncertainty {
            value: op.uncertainty.as_f64(),
        });
    }
    if op.base_rates.len() != op.beliefs.len() {
        return Err(OpinionError::LengthMismatch {
            what: "base rates",
            expected: op.beliefs.len(),
            got: op.base_rates.len(),
        });
    }
    let a_residual = op.base_rates.iter().copied().sum::<T>() - T::one();
    if a_residual.abs() > tol {
        return Err(OpinionError::BaseRateSum {
            residual: a_residual.as_f64(),
        });
    }
    for (index, &a) in op.base_rates.iter().enumerate() {
        if a < -tol {
            return Err(OpinionError::Negative {
                what: "base_rates",
                index,
                value: a.as_f64(),
            });
        }
    }
    Ok(())
}

/// Free-function form of [`SubjectiveOpinion::project`].
pub fn projected_probabilities<T: Real>(op: &SubjectiveOpinion<T>) -> ProjectedDistribution<T> {
    op.project()
}

/// Probability vector obtained by projecting an opinion.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedDistribution<T> {
    probs: Vec<T>,
}

impl<T: Real> ProjectedDistribution<T> {
    /// The probabilities, one per class.
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Index of the most probable class; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}
