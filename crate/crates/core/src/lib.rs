//! Quantum dice.
//!
//! A single die whose upper face is read after a roll behaves like a real
//! two-level quantum system: rolling along the axis the upper face points to
//! is certain, rolling across it gives ½/½, the second of two incompatible
//! rolls shows an interference term, and every probability comes from a
//! hidden impulse chosen at random during the roll. Two dice joined by a rod
//! reach the algebraic maximum `I = 4` of the CHSH quantity because the joint
//! roll creates the correlation it measures.
//!
//! - [`hilbert`]: states, face observables, projectors, Born rule, collapse,
//!   sequential probabilities and the total-probability decomposition.
//! - [`die`]: the physical die and its hidden impulse.
//! - [`pair`]: the rod-connected pair and the CHSH quantity.
//! - [`harness`]: seeded Monte Carlo sessions compared against the analytic model.
//! - [`oracle`]: analytic tables and the λ-measure cross-check.

pub mod die;
pub mod error;
pub mod harness;
pub mod hilbert;
pub mod oracle;
pub mod pair;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
