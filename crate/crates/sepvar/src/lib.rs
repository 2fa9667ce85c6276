//! Toolkit for the separating variety of simultaneous matrix
//! conjugation: the combinatorial poset indexing its irreducible
//! components, per-component dimension reports and separating-set
//! bounds, and seeded numerical certificates for the linear-algebra
//! facts the structure rests on.

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod matrixlab;
pub mod poset;

pub use error::{Error, Result};
