//! Axiomatic rewriting: the axiom schemata, proof traces and their checker,
//! and a proof search for equivalences.

mod axiom;
mod search;
mod trace;

pub use axiom::{apply, registry, ApplyError, Axiom, AxiomName, Bindings, Direction, UnknownAxiom};
pub use search::{a0_specialize, prove_equiv, rewrite, DerivedEquation, ProveError, DEFAULT_STEP_BUDGET};
pub use trace::{ProofTrace, Step, TraceError, Verdict};
