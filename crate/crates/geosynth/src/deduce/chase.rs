//! The layered forward chase.
//!
//! Layer 0 is whatever the caller put into the state. Each later layer
//! applies every (theorem, binding) pair not applied before, adds the
//! conclusions, then lets the solver propagate values. The loop stops at
//! the first layer with nothing left to apply, which is a true fixpoint:
//! theorems only gain applicability through new facts.
//!
//! An application whose conclusions all exist already still matters; it
//! records an alternative derivation edge on those facts, so traceback can
//! pick the cheapest route later.

use std::collections::BTreeSet;

use crate::formal::TplFact;

use super::matcher::{applications, instantiate_equation, instantiate_literal};
use super::state::{Edge, State};
use super::DeduceError;

#[derive(Debug, Clone)]
pub struct ChaseOptions {
    /// Hard cap on layers; hitting it is reported as an error rather than
    /// silently truncating the deduction.
    pub max_layers: usize,
}

impl Default for ChaseOptions {
    fn default() -> Self {
        ChaseOptions { max_layers: 32 }
    }
}

#[derive(Debug, Default, Clone)]
pub struct ChaseStats {
    /// Layers that actually applied something.
    pub layers: usize,
    pub applications: usize,
    pub facts_added: usize,
}

/// Runs the chase to fixpoint, mutating `state` in place.
pub fn chase(state: &mut State<'_>, options: &ChaseOptions) -> Result<ChaseStats, DeduceError> {
    let mut stats = ChaseStats::default();
    state.propagate(0)?;
    let mut applied: BTreeSet<(u32, String)> = BTreeSet::new();
    for layer in 1..=options.max_layers {
        let mut pending = Vec::new();
        for theorem in state.registry().theorems() {
            for app in applications(state, theorem) {
                if !applied.contains(&app.key()) {
                    pending.push(app);
                }
            }
        }
        if pending.is_empty() {
            return Ok(stats);
        }
        stats.layers = layer;
        for app in pending {
            applied.insert(app.key());
            stats.applications += 1;
            let theorem = state
                .registry()
                .theorem_by_id(app.theorem)
                .expect("application came from this registry");
            let edge = Edge {
                theorem: app.theorem,
                binding: app
                    .binding
                    .iter()
                    .map(|(var, point)| (*var, point.clone()))
                    .collect(),
                premises: app.premises.clone(),
            };
            for conclusion in &theorem.conclusions {
                match conclusion {
                    TplFact::Lit(tpl) => {
                        // A binding can be degenerate for one conclusion
                        // (shared points where the predicate wants distinct
                        // ones) while fine for the rest; skip just that one.
                        if let Ok(lit) = instantiate_literal(state.registry(), tpl, &app.binding) {
                            stats.facts_added +=
                                state.add_literal(lit, layer, Some(edge.clone()))?.len();
                        }
                    }
                    TplFact::Eq(tpl) => {
                        if let Ok(eq) = instantiate_equation(tpl, &app.binding) {
                            stats.facts_added +=
                                state.add_equation(eq, layer, Some(edge.clone()))?.len();
                        }
                    }
                }
            }
        }
        stats.facts_added += state.propagate(layer)?.len();
    }
    Err(DeduceError::LayerCap(options.max_layers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{builtin_registry, parse_equation, parse_literal};

    fn seeded(lits: &[&str], eqs: &[&str]) -> State<'static> {
        let registry = builtin_registry();
        let mut state = State::new(registry);
        for text in lits {
            state
                .add_literal(parse_literal(registry, text).unwrap(), 0, None)
                .unwrap();
        }
        for text in eqs {
            state
                .add_equation(parse_equation(text).unwrap(), 0, None)
                .unwrap();
        }
        state
    }

    #[test]
    fn midsegment_scenario_reaches_the_halved_length() {
        let mut state = seeded(
            &[
                "Triangle(ABC)",
                "IsMidpointOfLine(D,AB)",
                "IsMidpointOfLine(E,AC)",
                "Line(DE)",
            ],
            &["LengthOfLine(BC) = 8"],
        );
        chase(&mut state, &ChaseOptions::default()).unwrap();

        let midseg = state
            .id_of("IsMidsegmentOfTriangle(DE,ABC)")
            .expect("judgment fired");
        assert!(!state.fact(midseg).is_given());

        let value = state.id_of("LengthOfLine(DE) = 4").expect("value derived");
        let edge = &state.fact(value).edges()[0];
        assert_eq!(edge.theorem, crate::deduce::SUBSTITUTION_STEP);

        // The halving equation gained a second derivation: the two readings
        // of the midsegment premise bind the same conclusion.
        let halved = state
            .id_of("LengthOfLine(DE) = LengthOfLine(BC)/2")
            .expect("length property fired");
        assert!(!state.fact(halved).edges().is_empty());
    }

    #[test]
    fn equilateral_derivations_close_transitively() {
        let mut state = seeded(&["EquilateralTriangle(ABC)"], &["LengthOfLine(AB) = 5"]);
        chase(&mut state, &ChaseOptions::default()).unwrap();

        for fact in [
            "IsoscelesTriangle(A,BC)",
            "LengthOfLine(BC) = 5",
            "LengthOfLine(AC) = 5",
            "MeasureOfAngle(ABC) = 60",
            "PerimeterOfPolygon(ABC) = 15",
        ] {
            assert!(state.id_of(fact).is_some(), "missing {fact}");
        }
    }

    #[test]
    fn right_triangle_pythagorean_value_flows() {
        let mut state = seeded(
            &["RightTriangle(B,AC)"],
            &["LengthOfLine(AB) = 3", "LengthOfLine(BC) = 4"],
        );
        chase(&mut state, &ChaseOptions::default()).unwrap();
        assert!(state.id_of("LengthOfLine(AC) = 5").is_some());
        assert!(state.id_of("MeasureOfAngle(ABC) = 90").is_some());
    }

    #[test]
    fn rectangle_chain_reaches_area_and_perimeter() {
        let mut state = seeded(
            &["Rectangle(ABCD)"],
            &["LengthOfLine(AB) = 6", "LengthOfLine(BC) = 4"],
        );
        chase(&mut state, &ChaseOptions::default()).unwrap();
        assert!(state.id_of("Parallelogram(ABCD)").is_some());
        assert!(state.id_of("AreaOfPolygon(ABCD) = 24").is_some());
        assert!(state.id_of("PerimeterOfPolygon(ABCD) = 20").is_some());
        assert!(state.id_of("LengthOfLine(CD) = 6").is_some());
    }
}
