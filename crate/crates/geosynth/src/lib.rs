//! Engine for synthesizing and checking plane-geometry reasoning data.
//!
//! The crate is built around a small formal language for geometric facts.
//! Everything else is a pipeline over that language:
//!
//! ```text
//!   plot ──► initial facts + diagram ──► deduce (forward chase)
//!                                           │
//!                                           ▼
//!   qa ◄── target (pick goals, trace proofs) ◄── deduction graph
//!   │
//!   ▼
//!   dataset (JSONL + SVG)          verify (strict / fast step checking,
//!                                          candidate tree search)
//! ```
//!
//! * [`formal`] — entities, measures, expressions, literals, and the
//!   registry of predicate and theorem definitions (loaded from a small
//!   declaration language).
//! * [`deduce`] — premise matching, theorem application, layered forward
//!   chase with provenance, exact equation solving, traceback and
//!   linearization of proofs.
//! * [`plot`] — samples predicate combinations, solves coordinates under
//!   the predicates' constraint templates, and renders deterministic SVG.
//! * [`target`] — scores and selects derived facts worth asking about and
//!   builds self-contained solution paths for them.
//! * [`qa`] — turns paths into natural-language questions and answers,
//!   deduplicates, caps, and exports a dataset.
//! * [`verify`] — translates natural-language steps back into formal
//!   triples and checks them against a state (strict) or a diagram (fast);
//!   includes the step-level candidate search loop.
//! * [`gateway`] — minimal chat-completion client with retry, audit
//!   logging, and scriptable offline mocks.

pub mod deduce;
pub mod formal;
pub mod gateway;
pub mod plot;
pub mod qa;
pub mod target;
pub mod verify;
