//! Traceback: from one target fact to an ordered, self-contained proof.
//!
//! Every derived fact keeps at least one edge whose premises all precede it
//! in the fact arena, so walking best edges backwards terminates. "Best"
//! prefers the derivation whose premises settle earliest (smallest maximum
//! layer), then lower theorem id, then binding text; that keeps the proof
//! shallow and the choice deterministic when a fact was derived repeatedly.
//!
//! Steps with the same theorem, binding, and premises merge, so a theorem
//! producing two conclusions used by the proof shows up once with both.

use std::collections::{BTreeMap, BTreeSet};

use crate::formal::PointRef;

use super::state::{Edge, State};
use super::{FactId, SUBSTITUTION_NAME, SUBSTITUTION_STEP};

#[derive(Debug, Clone)]
pub struct ProofStep {
    pub theorem: u32,
    pub name: String,
    pub binding: Vec<(char, PointRef)>,
    pub premises: Vec<FactId>,
    pub conclusions: Vec<FactId>,
}

#[derive(Debug, Clone)]
pub struct Proof {
    pub target: FactId,
    /// Given facts the proof bottoms out on, ascending.
    pub givens: Vec<FactId>,
    pub steps: Vec<ProofStep>,
}

impl Proof {
    /// Every fact the proof mentions, givens included, ascending.
    pub fn facts(&self) -> Vec<FactId> {
        let mut out: BTreeSet<FactId> = self.givens.iter().copied().collect();
        for step in &self.steps {
            out.extend(step.premises.iter().copied());
            out.extend(step.conclusions.iter().copied());
        }
        out.into_iter().collect()
    }
}

/// Extracts the proof of `target` from a chased state.
pub fn trace(state: &State<'_>, target: FactId) -> Proof {
    let mut chosen: BTreeMap<FactId, Edge> = BTreeMap::new();
    let mut givens: BTreeSet<FactId> = BTreeSet::new();
    let mut stack = vec![target];
    let mut seen: BTreeSet<FactId> = BTreeSet::new();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        let fact = state.fact(id);
        if fact.is_given() {
            givens.insert(id);
            continue;
        }
        let edge = best_edge(state, id).clone();
        stack.extend(edge.premises.iter().copied());
        chosen.insert(id, edge);
    }

    // Merge facts sharing one derivation into a single step.
    let mut groups: BTreeMap<(u32, String, Vec<FactId>), Vec<FactId>> = BTreeMap::new();
    for (&fact, edge) in &chosen {
        groups
            .entry((edge.theorem, edge.binding_key(), edge.premises.clone()))
            .or_default()
            .push(fact);
    }
    let mut steps: Vec<ProofStep> = Vec::new();
    for ((theorem, _, _), conclusions) in &groups {
        let edge = &chosen[&conclusions[0]];
        let name = if *theorem == SUBSTITUTION_STEP {
            SUBSTITUTION_NAME.to_string()
        } else {
            state
                .registry()
                .theorem_by_id(*theorem)
                .expect("edge recorded from this registry")
                .name
                .clone()
        };
        steps.push(ProofStep {
            theorem: *theorem,
            name,
            binding: edge.binding.clone(),
            premises: edge.premises.clone(),
            conclusions: conclusions.clone(),
        });
    }

    Proof {
        target,
        givens: givens.into_iter().collect(),
        steps: order_steps(state, steps),
    }
}

fn best_edge<'a>(state: &'a State<'_>, id: FactId) -> &'a Edge {
    state
        .fact(id)
        .edges()
        .iter()
        .filter(|e| e.premises.iter().all(|&p| p < id))
        .min_by_key(|e| {
            let depth = e
                .premises
                .iter()
                .map(|&p| state.fact(p).layer())
                .max()
                .unwrap_or(0);
            (depth, e.theorem, e.binding_key(), e.premises.clone())
        })
        .expect("derived facts always have an edge with earlier premises")
}

/// Topological order; among ready steps the one with the earliest
/// conclusions (then smallest theorem id, binding) goes first.
fn order_steps(state: &State<'_>, steps: Vec<ProofStep>) -> Vec<ProofStep> {
    let producer: BTreeMap<FactId, usize> = steps
        .iter()
        .enumerate()
        .flat_map(|(idx, s)| s.conclusions.iter().map(move |&c| (c, idx)))
        .collect();
    let mut waiting_on: Vec<BTreeSet<usize>> = steps
        .iter()
        .map(|s| {
            s.premises
                .iter()
                .filter_map(|p| producer.get(p).copied())
                .collect()
        })
        .collect();
    let sort_key = |s: &ProofStep| {
        let layer = s
            .conclusions
            .iter()
            .map(|&c| state.fact(c).layer())
            .min()
            .unwrap_or(0);
        (
            layer,
            s.theorem,
            binding_text(&s.binding),
            s.conclusions.clone(),
        )
    };
    let mut remaining: BTreeSet<usize> = (0..steps.len()).collect();
    let mut out = Vec::with_capacity(steps.len());
    while !remaining.is_empty() {
        let next = remaining
            .iter()
            .copied()
            .filter(|&i| waiting_on[i].is_empty())
            .min_by_key(|&i| sort_key(&steps[i]))
            .expect("chosen edges cannot form a cycle");
        remaining.remove(&next);
        for deps in waiting_on.iter_mut() {
            deps.remove(&next);
        }
        out.push(steps[next].clone());
    }
    out
}

fn binding_text(binding: &[(char, PointRef)]) -> String {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{builtin_registry, parse_equation, parse_literal};
    use crate::deduce::{chase, ChaseOptions, State};

    #[test]
    fn midsegment_proof_is_ordered_and_grounded() {
        let registry = builtin_registry();
        let mut state = State::new(registry);
        for text in [
            "Triangle(ABC)",
            "IsMidpointOfLine(D,AB)",
            "IsMidpointOfLine(E,AC)",
            "Line(DE)",
        ] {
            state
                .add_literal(parse_literal(registry, text).unwrap(), 0, None)
                .unwrap();
        }
        state
            .add_equation(parse_equation("LengthOfLine(BC) = 8").unwrap(), 0, None)
            .unwrap();
        chase(&mut state, &ChaseOptions::default()).unwrap();

        let target = state.id_of("LengthOfLine(DE) = 4").unwrap();
        let proof = trace(&state, target);

        let names: Vec<&str> = proof.steps.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "midsegment_of_triangle_judgment",
                "midsegment_of_triangle_property_length",
                "substitution",
            ]
        );
        // Only the last step concludes the target.
        assert_eq!(proof.steps.last().unwrap().conclusions, vec![target]);
        // The BC = 8 given is part of the support.
        let bc = state.id_of("LengthOfLine(BC) = 8").unwrap();
        assert!(proof.givens.contains(&bc));
        // Every premise of every step is a given or an earlier conclusion.
        let mut available: BTreeSet<FactId> = proof.givens.iter().copied().collect();
        for step in &proof.steps {
            for p in &step.premises {
                assert!(available.contains(p), "premise {p} not yet established");
            }
            available.extend(step.conclusions.iter().copied());
        }
    }

    #[test]
    fn tracing_a_given_is_just_that_given() {
        let registry = builtin_registry();
        let mut state = State::new(registry);
        state
            .add_literal(parse_literal(registry, "Triangle(ABC)").unwrap(), 0, None)
            .unwrap();
        let id = state.id_of("Line(AB)").unwrap();
        let proof = trace(&state, id);
        assert_eq!(proof.givens, vec![id]);
        assert!(proof.steps.is_empty());
    }
}
