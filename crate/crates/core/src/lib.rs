//! Exact model checking, canonical forms and equational proofs for the
//! aleatoric calculus and its modal extension.
//!
//! * [`syntax`]: formulas, concrete syntax, abbreviations.
//! * [`model`]: finite probability models and Kripke models, with JSON I/O.
//! * [`semantics`]: exact expectations and a Monte-Carlo sampler.
//! * [`equivalence`]: tree forms, paths and the path-product polynomial.
//! * [`proof`]: axioms, proof traces, checking and proof search.
//! * [`kbridge`]: modal logic K and its translation into the calculus.

pub mod equivalence;
pub mod kbridge;
pub mod model;
pub mod proof;
pub mod rational;
pub mod semantics;
pub mod syntax;

pub use model::{KripkeModel, ProbModel};
pub use rational::Rational;
pub use syntax::Formula;
