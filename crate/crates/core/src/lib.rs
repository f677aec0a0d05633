//! Plan–modulus duality and p-weak differentiable structures on finite
//! metric graphs.
//!
//! The crate computes p-modulus of curve families with a constraint
//! generation solver, extracts dual plans from the multipliers, verifies the
//! curvewise characterization of minimal p-weak upper gradients, and builds
//! charts, differentials and the cotangent bundle over vertex stars.

pub mod bundle;
pub mod charts;
pub mod error;
pub mod gradient;
pub mod mmspace;
pub mod modulus;
pub mod plans;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
