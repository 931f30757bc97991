//! Fusion operators over subjective-logic opinions.
//!
//! Five ways to combine per-view opinions into one:
//!
//! * **CBF** — cumulative fusion: evidence vectors add.
//! * **BCF** — belief-constraint (Dempster) fusion: conflicting mass is
//!   renormalized away; fails on total conflict.
//! * **BAF** — belief-averaging fusion of a pair, plus its order-dependent
//!   sequential left-fold.
//! * **GBAF** — generalized belief averaging of V opinions at once:
//!   evidence averages, uncertainty is the harmonic mean, order does not
//!   matter.
//! * **DBF** — discounted belief fusion: opinions are discounted by how
//!   much the others disagree with them (degree of conflict → agreement
//!   matrix → per-view discount), then combined with GBAF. Confident
//!   contradictions turn into uncertainty instead of silently averaging
//!   away.
//!
//! The conflict machinery (degree of conflict, conflict/agreement matrices,
//! discounts) lives in [`conflict`] and is exported for diagnostics.

pub mod conflict;
pub mod error;
pub mod fuse;
pub mod method;

pub use conflict::{
    agreement_matrix, conflict_matrix, degree_of_conflict, discount_factors, discount_opinion,
    AgreementMatrix, ConflictMatrix, DegreeOfConflict, DiscountFactors,
};
pub use error::FusionError;
pub use fuse::{
    fuse_baf_pair, fuse_baf_sequential, fuse_bcf, fuse_bcf_pair, fuse_cbf, fuse_dbf, fuse_gbaf,
    DbfDiagnostics,
};
pub use method::FusionMethod;
