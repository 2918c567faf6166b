//! Premise matching: every way a theorem's patterns bind to a state.
//!
//! Literal patterns are matched against the symmetry images of stored
//! facts, so `Triangle(?a?b?c)` binds all six vertex orders of one stored
//! `Triangle(ABC)`. Distinct pattern variables always take distinct points
//! (an injective binding); a variable repeated inside one pattern pins the
//! same point, which is how `PerpendicularBetweenLine(?b?d,?a?d)` insists
//! the two segments share the foot. Equation premises are not matched
//! structurally at all: the candidate binding instantiates them and the
//! state's solver decides entailment.

use std::collections::BTreeMap;

use crate::formal::{
    Equation, Expr, FormalError, Literal, MeasureSymbol, PatMeasure, PointRef, Registry,
    TheoremDef, TplLiteral,
};

use super::state::State;
use super::FactId;

pub type Binding = BTreeMap<char, PointRef>;

/// One applicable (theorem, binding) pair, with the facts that justify it.
#[derive(Debug, Clone)]
pub struct Application {
    pub theorem: u32,
    pub binding: Binding,
    /// Matched literal premises in pattern order, then the facts each
    /// equation premise was entailed from.
    pub premises: Vec<FactId>,
}

impl Application {
    pub fn key(&self) -> (u32, String) {
        (self.theorem, binding_key(&self.binding))
    }
}

pub(super) fn binding_key(binding: &Binding) -> String {
    let mut out = String::new();
    for (var, point) in binding {
        if !out.is_empty() {
            out.push(',');
        }
        out.push(*var);
        out.push('=');
        out.push_str(point.name());
    }
    out
}

/// All bindings under which `theorem` applies to `state`, sorted by
/// binding for determinism. Includes bindings whose conclusions may
/// already be known; the caller decides what to do with repeats.
pub fn applications(state: &State<'_>, theorem: &TheoremDef) -> Vec<Application> {
    let patterns: Vec<&TplLiteral> = theorem.premise_literals().collect();
    let mut found: BTreeMap<String, Application> = BTreeMap::new();
    let mut binding = Binding::new();
    let mut bound_points: BTreeMap<PointRef, char> = BTreeMap::new();
    let mut matched: Vec<FactId> = Vec::new();
    extend(
        state,
        theorem,
        &patterns,
        0,
        &mut binding,
        &mut bound_points,
        &mut matched,
        &mut found,
    );
    found.into_values().collect()
}

#[allow(clippy::too_many_arguments)]
fn extend(
    state: &State<'_>,
    theorem: &TheoremDef,
    patterns: &[&TplLiteral],
    idx: usize,
    binding: &mut Binding,
    bound_points: &mut BTreeMap<PointRef, char>,
    matched: &mut Vec<FactId>,
    found: &mut BTreeMap<String, Application>,
) {
    if idx == patterns.len() {
        complete(state, theorem, binding, matched, found);
        return;
    }
    let tpl = patterns[idx];
    let Ok(def) = state.registry().predicate(&tpl.pred) else {
        return;
    };
    let letters = tpl.flat_letters();
    for &fact_id in state.facts_of_pred(&tpl.pred) {
        let lit = state
            .fact(fact_id)
            .literal()
            .expect("predicate index only holds literals");
        for image in def.symmetry_images(&lit.flat_points()) {
            let mut fresh: Vec<char> = Vec::new();
            let mut ok = true;
            for (var, point) in letters.iter().zip(&image) {
                match binding.get(var) {
                    Some(bound) if bound == point => {}
                    Some(_) => {
                        ok = false;
                        break;
                    }
                    None => {
                        if bound_points.contains_key(point) {
                            ok = false;
                            break;
                        }
                        binding.insert(*var, point.clone());
                        bound_points.insert(point.clone(), *var);
                        fresh.push(*var);
                    }
                }
            }
            if ok {
                matched.push(fact_id);
                extend(
                    state,
                    theorem,
                    patterns,
                    idx + 1,
                    binding,
                    bound_points,
                    matched,
                    found,
                );
                matched.pop();
            }
            for var in fresh {
                let point = binding.remove(&var).expect("bound above");
                bound_points.remove(&point);
            }
        }
    }
}

fn complete(
    state: &State<'_>,
    theorem: &TheoremDef,
    binding: &Binding,
    matched: &[FactId],
    found: &mut BTreeMap<String, Application>,
) {
    let key = binding_key(binding);
    if found.contains_key(&key) {
        return;
    }
    let mut premises: Vec<FactId> = matched.to_vec();
    for eq_tpl in theorem.premise_equations() {
        let Ok(eq) = instantiate_equation(eq_tpl, binding) else {
            return;
        };
        let Some(sources) = state.check_equation(&eq) else {
            return;
        };
        for src in sources {
            if !premises.contains(&src) {
                premises.push(src);
            }
        }
    }
    found.insert(
        key,
        Application {
            theorem: theorem.id,
            binding: binding.clone(),
            premises,
        },
    );
}

/// Substitutes a binding into a literal template. Fails when the bound
/// points violate the target predicate's shape (a degenerate instance),
/// which callers treat as "does not apply".
pub fn instantiate_literal(
    registry: &Registry,
    tpl: &TplLiteral,
    binding: &Binding,
) -> Result<Literal, FormalError> {
    let mut args = Vec::with_capacity(tpl.args.len());
    for group in &tpl.args {
        let mut points = Vec::with_capacity(group.len());
        for var in group {
            let point = binding.get(var).ok_or_else(|| {
                FormalError::MalformedEntity(format!("no binding for variable ?{var}"))
            })?;
            points.push(point.clone());
        }
        args.push(points);
    }
    Literal::new(registry, &tpl.pred, args)
}

/// Substitutes a binding into an equation template over measure patterns.
pub fn instantiate_equation(
    eq: &Equation<PatMeasure>,
    binding: &Binding,
) -> Result<Equation<MeasureSymbol>, FormalError> {
    let mut failure = None;
    let out = eq.map_sym(&mut |pat| match instantiate_measure(pat, binding) {
        Ok(sym) => Expr::Sym(sym),
        Err(e) => {
            failure.get_or_insert(e);
            Expr::num_int(0)
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn instantiate_measure(pat: &PatMeasure, binding: &Binding) -> Result<MeasureSymbol, FormalError> {
    let points: Vec<PointRef> = pat
        .vars
        .iter()
        .map(|var| {
            binding.get(var).cloned().ok_or_else(|| {
                FormalError::MalformedEntity(format!("no binding for variable ?{var}"))
            })
        })
        .collect::<Result<_, _>>()?;
    MeasureSymbol::new(pat.kind, &points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{builtin_registry, parse_equation, parse_literal};

    fn state_with(lits: &[&str], eqs: &[&str]) -> State<'static> {
        let registry = builtin_registry();
        let mut state = State::new(registry);
        for text in lits {
            let lit = parse_literal(registry, text).unwrap();
            state.add_literal(lit, 0, None).unwrap();
        }
        for text in eqs {
            let eq = parse_equation(text).unwrap();
            state.add_equation(eq, 0, None).unwrap();
        }
        state.propagate(0).unwrap();
        state
    }

    fn theorem(name: &str) -> &'static TheoremDef {
        builtin_registry().theorem_by_name(name).unwrap()
    }

    #[test]
    fn symmetry_images_widen_the_match() {
        let state = state_with(
            &["ParallelBetweenLine(AB,CD)", "ParallelBetweenLine(CD,EF)"],
            &[],
        );
        let apps = applications(&state, theorem("parallel_property_transitive"));
        // The shared line CD reads two ways, each outer line two ways, and
        // the chain runs in either direction: sixteen bindings, every one
        // concluding the same canonical fact.
        assert_eq!(apps.len(), 16);
        for app in &apps {
            let lit = instantiate_literal(
                state.registry(),
                match &theorem("parallel_property_transitive").conclusions[0] {
                    crate::formal::TplFact::Lit(l) => l,
                    _ => unreachable!(),
                },
                &app.binding,
            )
            .unwrap();
            assert_eq!(lit.text(), "ParallelBetweenLine(AB,EF)");
        }
    }

    #[test]
    fn injectivity_blocks_self_chaining() {
        // Parallel(AB,CD) with itself must not conclude Parallel(AB,AB).
        let state = state_with(&["ParallelBetweenLine(AB,CD)"], &[]);
        let apps = applications(&state, theorem("parallel_property_transitive"));
        assert!(apps.is_empty());
    }

    #[test]
    fn repeated_variables_pin_shared_points() {
        let state = state_with(
            &["PerpendicularBetweenLine(BD,AD)", "Triangle(ABD)"],
            &[],
        );
        let apps = applications(&state, theorem("right_triangle_judgment_perpendicular"));
        assert!(!apps.is_empty());
        for app in &apps {
            assert_eq!(app.binding[&'d'].name(), "D");
        }
    }

    #[test]
    fn equation_premises_go_through_the_solver() {
        let base = &[
            "Collinear(A,M,B)",
            "Line(AB)",
        ];
        let no_values = state_with(base, &[]);
        let th = theorem("midpoint_of_line_judgment");
        assert!(applications(&no_values, th).is_empty());

        let equal = state_with(
            base,
            &["LengthOfLine(AM) = 3", "LengthOfLine(MB) = 3"],
        );
        // The collinearity reads in both directions, so two bindings apply;
        // both conclude the same canonical midpoint fact.
        let apps = applications(&equal, th);
        assert_eq!(apps.len(), 2);
        for app in &apps {
            // Premise list: the collinearity, then the two value facts the
            // equality was entailed from.
            assert_eq!(app.premises.len(), 3);
        }
    }
}
