//! Numerical back ends: exact simplex and small dense linear algebra.

pub mod linalg;
pub mod lp;

pub use lp::{LinearProgram, LpOutcome, Relation};
