//! The formal language: points, entities, measures, expressions, literals,
//! and the registry of predicate/theorem definitions.
//!
//! A fact is either a [`Literal`] (a predicate applied to entities, e.g.
//! `IsMidpointOfLine(M,AB)`) or an [`Equation`] over measure symbols (e.g.
//! `LengthOfLine(DE) = LengthOfLine(BC)/2`). Literals are stored in a
//! canonical form chosen by each predicate's declared symmetry group, so
//! two literals denote the same fact exactly when their canonical texts
//! are equal.

mod dsl;
mod entity;
mod expr;
mod literal;
mod measure;
mod parse;
mod registry;
mod value;

pub use entity::{EntityKind, GeoEntity, PointRef};
pub use expr::{Axis, CoordVar, EvalError, Equation, Expr, PatMeasure, TplCoord};
pub use literal::Literal;
pub use measure::{MeasureKind, MeasureSymbol};
pub use parse::{
    parse_coord_equation, parse_equation, parse_expression, parse_literal,
    parse_pattern_equation, parse_var_literal,
};
pub use registry::{
    builtin_registry, BindMode, PredicateDef, PredicateKind, Registry, SlotDef, TheoremDef,
    TplFact, TplLiteral, TplMeasure,
};
pub use value::ExactValue;

/// Errors raised while parsing or validating the formal language.
#[derive(Debug, Clone, thiserror::Error)]
pub enum FormalError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{pred}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        got: usize,
    },
    #[error("malformed entity: {0}")]
    MalformedEntity(String),
    #[error("argument {slot} of `{pred}` must be a {expected}: {detail}")]
    SlotKindMismatch {
        pred: String,
        slot: usize,
        expected: &'static str,
        detail: String,
    },
    #[error("syntax error at line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: reference to undefined name `{name}`")]
    DanglingReference { line: usize, name: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
}
