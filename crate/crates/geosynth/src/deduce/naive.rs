//! Slow reference deduction, kept in the library so conformance tests in
//! any crate can call it.
//!
//! Where the chase matches patterns against symmetry images, this one
//! enumerates injective variable assignments over the state's points
//! directly and asks "is this instantiated premise a fact?" for each. No
//! layering, no memoization, no provenance: just saturate until stable.
//! Agreement between the two on the final fact set is the correctness
//! bar for the matcher and chase machinery.

use crate::formal::{PointRef, TplFact, TheoremDef};

use super::matcher::{instantiate_equation, instantiate_literal, Binding};
use super::state::State;
use super::DeduceError;

/// Saturates `state` by brute force. `max_rounds` bounds the outer loop;
/// the fixpoint is normally reached in a handful of rounds.
pub fn naive_fixpoint(state: &mut State<'_>, max_rounds: usize) -> Result<(), DeduceError> {
    state.propagate(0)?;
    for _ in 0..max_rounds {
        let mut grew = false;
        let theorems: Vec<&TheoremDef> = state.registry().theorems().iter().collect();
        for theorem in theorems {
            let points: Vec<PointRef> = state.points().iter().cloned().collect();
            let mut bindings = Vec::new();
            enumerate(state, theorem, &points, 0, &mut Binding::new(), &mut bindings);
            for binding in bindings {
                for conclusion in &theorem.conclusions {
                    match conclusion {
                        TplFact::Lit(tpl) => {
                            if let Ok(lit) =
                                instantiate_literal(state.registry(), tpl, &binding)
                            {
                                grew |= !state.add_literal(lit, 0, None)?.is_empty();
                            }
                        }
                        TplFact::Eq(tpl) => {
                            if let Ok(eq) = instantiate_equation(tpl, &binding) {
                                grew |= !state.add_equation(eq, 0, None)?.is_empty();
                            }
                        }
                    }
                }
            }
            grew |= !state.propagate(0)?.is_empty();
        }
        if !grew {
            return Ok(());
        }
    }
    Err(DeduceError::LayerCap(max_rounds))
}

/// Assigns the unbound variables of premise `idx` in every injective way,
/// checking each premise as soon as its variables are all bound.
fn enumerate(
    state: &State<'_>,
    theorem: &TheoremDef,
    points: &[PointRef],
    idx: usize,
    binding: &mut Binding,
    out: &mut Vec<Binding>,
) {
    let literals: Vec<_> = theorem.premise_literals().collect();
    if idx == literals.len() {
        for eq_tpl in theorem.premise_equations() {
            let Ok(eq) = instantiate_equation(eq_tpl, binding) else {
                return;
            };
            if state.check_equation(&eq).is_none() {
                return;
            }
        }
        out.push(binding.clone());
        return;
    }
    let tpl = literals[idx];
    let vars: Vec<char> = tpl
        .distinct_letters()
        .into_iter()
        .filter(|v| !binding.contains_key(v))
        .collect();
    assign(state, theorem, points, idx, &vars, 0, binding, out);
}

#[allow(clippy::too_many_arguments)]
fn assign(
    state: &State<'_>,
    theorem: &TheoremDef,
    points: &[PointRef],
    idx: usize,
    vars: &[char],
    var_pos: usize,
    binding: &mut Binding,
    out: &mut Vec<Binding>,
) {
    if var_pos == vars.len() {
        let literals: Vec<_> = theorem.premise_literals().collect();
        let tpl = literals[idx];
        let holds = instantiate_literal(state.registry(), tpl, binding)
            .ok()
            .and_then(|lit| state.literal_id(&lit))
            .is_some();
        if holds {
            enumerate(state, theorem, points, idx + 1, binding, out);
        }
        return;
    }
    let var = vars[var_pos];
    for point in points {
        if binding.values().any(|p| p == point) {
            continue;
        }
        binding.insert(var, point.clone());
        assign(state, theorem, points, idx, vars, var_pos + 1, binding, out);
        binding.remove(&var);
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::deduce::{chase, ChaseOptions};
    use crate::formal::{builtin_registry, parse_equation, parse_literal};

    fn texts(state: &State<'_>) -> BTreeSet<String> {
        state.facts().iter().map(|f| f.text().to_string()).collect()
    }

    #[test]
    fn chase_and_brute_force_agree() {
        let registry = builtin_registry();
        let scenarios: &[(&[&str], &[&str])] = &[
            (
                &["Triangle(ABC)", "IsMidpointOfLine(D,AB)", "IsMidpointOfLine(E,AC)", "Line(DE)"],
                &["LengthOfLine(BC) = 8"],
            ),
            (&["EquilateralTriangle(ABC)"], &["LengthOfLine(AB) = 3"]),
            (
                &["Rectangle(ABCD)", "Line(AC)", "Line(BD)"],
                &["LengthOfLine(AB) = 6", "LengthOfLine(BC) = 4"],
            ),
        ];
        for (lits, eqs) in scenarios {
            let mut chased = State::new(registry);
            let mut brute = State::new(registry);
            for text in *lits {
                let lit = parse_literal(registry, text).unwrap();
                chased.add_literal(lit.clone(), 0, None).unwrap();
                brute.add_literal(lit, 0, None).unwrap();
            }
            for text in *eqs {
                let eq = parse_equation(text).unwrap();
                chased.add_equation(eq.clone(), 0, None).unwrap();
                brute.add_equation(eq, 0, None).unwrap();
            }
            chase(&mut chased, &ChaseOptions::default()).unwrap();
            naive_fixpoint(&mut brute, 16).unwrap();
            assert_eq!(texts(&chased), texts(&brute));
        }
    }
}
