//! Exact machinery for symbolic partial exponential fields with an
//! involution: rotund varieties and their restriction of scalars, integer
//! matrix decompositions, predimension audits, and a scripted construction
//! engine that certifies every step.

pub mod efield;
pub mod engine;
pub mod error;
pub mod field;
pub mod intmat;
pub mod varieties;

pub use error::{Error, Result};
