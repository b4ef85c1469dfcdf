//! Probabilistic process terms and open Markov chains.
//!
//! The crate covers the full pipeline from a small process calculus (names,
//! action prefix, weighted binary choice, recursion) to finite open Markov
//! chains and back, exact probabilistic bisimilarity by partition refinement,
//! the Kantorovich bisimilarity pseudometric (undiscounted and discounted)
//! with certified lower/upper enclosures, and a checker for derivations in the
//! quantitative deduction system that axiomatizes that pseudometric.
//!
//! Numeric code in [`metric`] is generic over [`Scalar`], with `f64`, `f32`
//! and exact [`Rational`] instantiations; the aliases below name the two modes
//! the command line exposes.

pub mod bisim;
pub mod chain;
pub mod deduction;
pub mod distribution;
pub mod error;
pub mod metric;
pub mod rational;
pub mod scalar;
pub mod semantics;
pub mod term;

pub use chain::{OpenMarkovChain, Outcome, PointedChain, StateId};
pub use distribution::SubDistribution;
pub use error::{Error, Result};
pub use rational::Rational;
pub use scalar::Scalar;
pub use term::{Label, Name, Term};

/// Pseudometric matrix over exact rationals.
pub type ExactMatrix = metric::PseudometricMatrix<Rational>;
/// Pseudometric matrix over binary64 floats.
pub type FloatMatrix = metric::PseudometricMatrix<f64>;
/// Distance enclosure computed with exact rational pivots.
pub type ExactEnclosure = metric::DistanceEnclosure<Rational>;
/// Distance enclosure computed in floating point.
pub type FloatEnclosure = metric::DistanceEnclosure<f64>;
/// Term-to-term distance bounds, exact mode.
pub type ExactTermDistance = metric::TermDistance<Rational>;
/// Term-to-term distance bounds, float mode.
pub type FloatTermDistance = metric::TermDistance<f64>;

/// Default cap on the number of explored states when building chains from terms.
pub const DEFAULT_STATE_CAP: usize = 10_000;
