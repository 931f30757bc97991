//! Core subjective-logic types: multinomial opinions, Dirichlet evidence,
//! and the bijection between them.
//!
//! An opinion `ω = (b, u, a)` assigns a belief mass `b_k` to every class,
//! an uncertainty mass `u` to "don't know", and carries prior base rates
//! `a`. Belief masses and uncertainty sum to one. Opinions are equivalent
//! to Dirichlet distributions through `α_k = e_k + 1`, `b_k = e_k / S`,
//! `u = K / S` with `S = Σ α_k`, and project to ordinary probabilities
//! via `P_k = b_k + a_k · u`.
//!
//! Everything is generic over the scalar type; the [`Opinion`],
//! [`Evidence`], and [`Projected`] aliases fix it to `f64`, which is what
//! the rest of the workspace uses.

pub mod error;
pub mod evidence;
pub mod opinion;
pub mod real;

pub use error::OpinionError;
pub use evidence::{evidence_from_opinion, opinion_from_evidence, EvidenceVector};
pub use opinion::{
    projected_probabilities, uniform_base_rates, validate_opinion, ProjectedDistribution,
    SubjectiveOpinion, INVARIANT_TOL, RENORM_TOL,
};
pub use real::Real;

/// Opinion over `f64`, the scalar used throughout the workspace.
pub type Opinion = SubjectiveOpinion<f64>;
/// Evidence vector over `f64`.
pub type Evidence = EvidenceVector<f64>;
/// Projected probability distribution over `f64`.
pub type Projected = ProjectedDistribution<f64>;
