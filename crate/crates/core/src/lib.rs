//! Post-selected realization of linear operators and finite transformations
//! of complex projective space.
//!
//! A unitary `U` on the principal system plus one qubit ancilla, followed by
//! post-selecting the ancilla on `|0>`, acts on the principal system as the
//! top-left block of `U`. This crate builds such unitaries for arbitrary
//! nonzero operators ([`realize`]), studies which finite maps of `CP^{n-1}`
//! are induced by linear operators ([`projective`], [`suites`]), estimates how
//! much of the space of finite maps is approximately realizable
//! ([`montecarlo`]), and exposes the mixed-state channel picture
//! ([`channel`]).

pub mod channel;
pub mod error;
pub mod gram;
pub mod json;
pub mod linalg;
pub mod montecarlo;
pub mod projective;
pub mod realize;
mod search;
pub mod suites;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
