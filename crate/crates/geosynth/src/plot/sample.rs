//! Scene sampling: choose which predicates a diagram is made of.
//!
//! A scene always starts from one shape with entirely fresh points. A
//! second shape may follow, reusing one existing point through its anchor
//! slot. Relations come last because their `requires` patterns must bind
//! against facts that already exist; their remaining letters get fresh
//! points, and their companions land immediately so midpoints and drawn
//! segments arrive together with the relation they realize.
//!
//! Every literal added here also contributes its predicate's coordinate
//! constraints. The sampled literal itself instantiates them through the
//! sampling binding rather than its canonical argument order: for weakly
//! symmetric predicates the canonical form may describe a different but
//! equally valid realization, and the companions were already pinned to
//! the sampled one. Construct and companion cascades instantiate through
//! their own canonical bindings, which their symmetry groups keep sound.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{PlotError, PlotOptions};
use crate::deduce::State;
use crate::formal::{
    BindMode, CoordVar, Equation, Expr, Literal, PointRef, PredicateDef, PredicateKind, Registry,
    TplLiteral,
};

/// A literal the sampler chose directly, with the binding it was built
/// from. Only these publish numeric givens.
#[derive(Debug, Clone)]
pub struct SampledFact {
    pub literal: Literal,
    pub letter_map: BTreeMap<char, PointRef>,
}

pub(super) struct Scene<'r> {
    pub state: State<'r>,
    pub sampled: Vec<SampledFact>,
    pub constraints: Vec<Equation<CoordVar>>,
}

pub(super) fn build_scene<'r>(
    registry: &'r Registry,
    rng: &mut ChaCha8Rng,
    options: &PlotOptions,
) -> Result<Scene<'r>, PlotError> {
    let shapes: Vec<&PredicateDef> = registry
        .predicates()
        .filter(|d| d.kind() == PredicateKind::Entity && d.samplable())
        .collect();
    let relations: Vec<&PredicateDef> = registry
        .predicates()
        .filter(|d| d.kind() == PredicateKind::Relation && d.samplable())
        .collect();
    assert!(!shapes.is_empty(), "registry declares no samplable shape");

    let mut builder = SceneBuilder {
        state: State::new(registry),
        sampled: Vec::new(),
        constraints: Vec::new(),
        seen: BTreeSet::new(),
        next_point: 0,
    };

    let base = shapes[rng.gen_range(0..shapes.len())];
    let map = builder.allocate(base, BTreeMap::new());
    builder.add_sampled(base, map)?;

    if rng.gen::<f64>() < options.second_shape_probability {
        let def = shapes[rng.gen_range(0..shapes.len())];
        let mut pre = BTreeMap::new();
        let anchor = def
            .slots()
            .iter()
            .find(|s| s.bind == BindMode::Anchor)
            .map(|s| s.letters[0]);
        if let Some(letter) = anchor {
            let existing: Vec<PointRef> = builder.state.points().iter().cloned().collect();
            pre.insert(letter, existing[rng.gen_range(0..existing.len())].clone());
        }
        if builder.fits(def, &pre, options) {
            let map = builder.allocate(def, pre);
            builder.add_sampled(def, map)?;
        }
    }

    let roll: f64 = rng.gen();
    let relation_count = if roll < 0.25 {
        0
    } else if roll < 0.70 {
        1
    } else {
        2
    };
    for _ in 0..relation_count {
        if relations.is_empty() {
            break;
        }
        let def = relations[rng.gen_range(0..relations.len())];
        let bindings = require_bindings(&builder.state, def.requires())?;
        if bindings.is_empty() {
            continue;
        }
        let pre = bindings[rng.gen_range(0..bindings.len())].clone();
        if !builder.fits(def, &pre, options) {
            continue;
        }
        let map = builder.allocate(def, pre);
        builder.add_sampled(def, map)?;
    }

    Ok(Scene {
        state: builder.state,
        sampled: builder.sampled,
        constraints: builder.constraints,
    })
}

struct SceneBuilder<'r> {
    state: State<'r>,
    sampled: Vec<SampledFact>,
    constraints: Vec<Equation<CoordVar>>,
    /// Constraint texts already collected; cascades repeat host
    /// constraints and the duplicates would only slow the solver.
    seen: BTreeSet<String>,
    next_point: usize,
}

impl<'r> SceneBuilder<'r> {
    /// Whether the predicate's fresh letters fit under the point cap.
    fn fits(&self, def: &PredicateDef, pre: &BTreeMap<char, PointRef>, opt: &PlotOptions) -> bool {
        let fresh = def
            .flat_letters()
            .iter()
            .filter(|c| !pre.contains_key(c))
            .count();
        self.state.points().len() + fresh <= opt.max_points
    }

    /// Extends a partial binding with fresh points for the remaining
    /// declaration letters, in declaration order.
    fn allocate(
        &mut self,
        def: &PredicateDef,
        mut map: BTreeMap<char, PointRef>,
    ) -> BTreeMap<char, PointRef> {
        for ch in def.flat_letters() {
            if !map.contains_key(&ch) {
                map.insert(ch, PointRef::nth(self.next_point));
                self.next_point += 1;
            }
        }
        map
    }

    fn add_sampled(
        &mut self,
        def: &PredicateDef,
        map: BTreeMap<char, PointRef>,
    ) -> Result<(), PlotError> {
        let registry = self.state.registry();
        let groups: Vec<Vec<char>> = def.slots().iter().map(|s| s.letters.clone()).collect();
        let literal = instantiate(registry, def.name(), groups, &map)?;
        let added = self.state.add_literal(literal.clone(), 0, None)?;
        if added.is_empty() {
            // The sampler rolled an already-present fact; everything it
            // would contribute is in place.
            return Ok(());
        }
        self.push_constraints(def, &map);
        self.cascade_constraints(&added[1..]);
        for tpl in def.companions() {
            let companion = instantiate(registry, &tpl.pred, tpl.args.clone(), &map)?;
            let cadded = self.state.add_literal(companion, 0, None)?;
            self.cascade_constraints(&cadded);
        }
        self.sampled.push(SampledFact {
            literal,
            letter_map: map,
        });
        Ok(())
    }

    /// Constraints of facts that arrived as cascades, instantiated
    /// through their canonical argument order.
    fn cascade_constraints(&mut self, ids: &[usize]) {
        for &id in ids {
            let (pred, flat) = {
                let Some(lit) = self.state.fact(id).literal() else {
                    continue;
                };
                (lit.pred().to_string(), lit.flat_points())
            };
            let def = self
                .state
                .registry()
                .predicate(&pred)
                .expect("stored literal matches the registry");
            if def.constraints().is_empty() {
                continue;
            }
            let map: BTreeMap<char, PointRef> = def.flat_letters().into_iter().zip(flat).collect();
            self.push_constraints(def, &map);
        }
    }

    fn push_constraints(&mut self, def: &PredicateDef, map: &BTreeMap<char, PointRef>) {
        for tpl in def.constraints() {
            let eq = tpl.map_sym(&mut |c| {
                Expr::Sym(CoordVar {
                    point: map[&c.letter].clone(),
                    axis: c.axis,
                })
            });
            let key = eq.to_string();
            if self.seen.insert(key) {
                self.constraints.push(eq);
            }
        }
    }
}

fn instantiate(
    registry: &Registry,
    pred: &str,
    groups: Vec<Vec<char>>,
    map: &BTreeMap<char, PointRef>,
) -> Result<Literal, PlotError> {
    let args: Vec<Vec<PointRef>> = groups
        .into_iter()
        .map(|group| group.into_iter().map(|ch| map[&ch].clone()).collect())
        .collect();
    Ok(Literal::new(registry, pred, args)?)
}

/// All bindings of a `requires` chain against the current facts, sorted
/// for determinism. Distinct letters bind distinct points.
fn require_bindings(
    state: &State<'_>,
    templates: &[TplLiteral],
) -> Result<Vec<BTreeMap<char, PointRef>>, PlotError> {
    let mut partial: Vec<BTreeMap<char, PointRef>> = vec![BTreeMap::new()];
    for tpl in templates {
        let def = state.registry().predicate(&tpl.pred)?;
        let letters = tpl.flat_letters();
        let mut next = Vec::new();
        for &fid in state.facts_of_pred(&tpl.pred) {
            let Some(lit) = state.fact(fid).literal() else {
                continue;
            };
            for image in def.symmetry_images(&lit.flat_points()) {
                for base in &partial {
                    if let Some(ext) = extend_binding(base, &letters, &image) {
                        next.push(ext);
                    }
                }
            }
        }
        partial = next;
    }
    partial.sort();
    partial.dedup();
    Ok(partial)
}

fn extend_binding(
    base: &BTreeMap<char, PointRef>,
    letters: &[char],
    image: &[PointRef],
) -> Option<BTreeMap<char, PointRef>> {
    let mut ext = base.clone();
    for (ch, p) in letters.iter().zip(image) {
        match ext.get(ch) {
            Some(q) if q == p => {}
            Some(_) => return None,
            None => {
                if ext.values().any(|v| v == p) {
                    return None;
                }
                ext.insert(*ch, p.clone());
            }
        }
    }
    Some(ext)
}
