//! Positive Dehn twist factorizations, the breeding calculus that combines
//! them into new Lefschetz pencils, and the invariants of the resulting
//! 4-manifolds.
//!
//! Homology classes live in the basis `(a1, b1, ..., ag, bg)` with
//! `<a_i, b_i> = 1`. A positive twist acts on homology by
//! `x -> x + <c, x> c` and products are composed right to left, so the
//! matrix of `t_{c1} t_{c2}` is `T(c1) * T(c2)`.

pub mod catalog;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod factorizations;
pub mod groups;
pub mod invariants;
pub mod surfaces;
pub mod symplectic;

pub use error::{Error, Result};
