//! Forward deduction over a fact state.
//!
//! A [`State`] holds literal and equation facts in canonical form, cascades
//! each predicate's construct set when a literal lands, and feeds every
//! equation into an exact [`EquationSolver`]. The [`chase`] applies all
//! registry theorems in layers until nothing new appears; every fact keeps
//! derivation edges `(theorem, binding, premise facts)`, including edges
//! added when a known fact is re-derived another way. [`trace`] walks those
//! edges backwards from a target fact and linearizes the support into an
//! ordered proof.
//!
//! Value substitutions the solver performs are first-class steps with the
//! reserved theorem id [`SUBSTITUTION_STEP`], so a proof can say
//! "substituting BC = 8" with the same machinery it uses for theorems.

mod chase;
mod matcher;
mod naive;
mod solver;
mod state;
mod trace;

pub use chase::{chase, ChaseOptions, ChaseStats};
pub use matcher::{applications, instantiate_equation, instantiate_literal, Application, Binding};
pub use naive::naive_fixpoint;
pub use solver::{DerivedValue, EquationSolver, SolveError};
pub use state::{Edge, Fact, FactData, State};
pub use trace::{trace, Proof, ProofStep};

use crate::formal::FormalError;

/// Index of a fact within its [`State`]; facts are append-only.
pub type FactId = usize;

/// Reserved theorem id for value-substitution steps made by the solver.
/// Real theorems are validated to use positive ids.
pub const SUBSTITUTION_STEP: u32 = 0;

/// Display name for [`SUBSTITUTION_STEP`] wherever step names are shown.
pub const SUBSTITUTION_NAME: &str = "substitution";

#[derive(Debug, thiserror::Error)]
pub enum DeduceError {
    #[error(transparent)]
    Formal(#[from] FormalError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("deduction did not settle within {0} layers")]
    LayerCap(usize),
}
