//! Predicate and theorem definitions, loaded from the built-in rule file.
//!
//! Each predicate declares:
//! * slots: named letters grouped into entities (`IsMidpointOfLine(M,AB)`
//!   has a point slot and a segment slot),
//! * a symmetry group: generator permutations of the declaration letters
//!   whose closure decides which argument rewritings denote the same fact,
//! * constraints: coordinate equation templates the diagram solver
//!   instantiates when the predicate is sampled,
//! * constructs: literals that hold whenever the predicate holds and are
//!   added automatically (a sampled midpoint always yields `Collinear`).
//!   Because constructs expand from canonical argument order, the construct
//!   set must be closed under the symmetry group, which is validated here,
//! * companions: literals added only at sampling time, in declaration
//!   order (a sampled parallel records that its fresh segment is drawn),
//! * requires: state patterns a sampled relation binds against (a median
//!   needs an existing triangle),
//! * givens: measure templates whose numeric values are read off the
//!   solved diagram and published as known quantities.
//!
//! Theorems are premise/conclusion templates over `?x` variables, where
//! facts are literal patterns or measure equations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use super::entity::{EntityKind, PointRef};
use super::expr::{Equation, PatMeasure, TplCoord};
use super::measure::MeasureKind;
use super::FormalError;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PredicateKind {
    Entity,
    Relation,
    Measure,
}

impl PredicateKind {
    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::Entity => "entity",
            PredicateKind::Relation => "relation",
            PredicateKind::Measure => "measure",
        }
    }
}

/// How a slot letter is bound when the predicate is sampled. Letters
/// matched by `requires` patterns are bound there; everything else is
/// fresh, except that an `anchor` slot may reuse one existing point to
/// keep multi-shape diagrams connected.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum BindMode {
    #[default]
    Fresh,
    Anchor,
}

#[derive(Clone, Debug)]
pub struct SlotDef {
    pub letters: Vec<char>,
    pub kind: EntityKind,
    pub bind: BindMode,
}

/// A literal template over declaration letters (constructs, companions,
/// requires) or over theorem variables (premises, conclusions); the two
/// uses never mix within one template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TplLiteral {
    pub pred: String,
    pub args: Vec<Vec<char>>,
}

impl TplLiteral {
    pub fn flat_letters(&self) -> Vec<char> {
        self.args.iter().flatten().copied().collect()
    }

    pub fn distinct_letters(&self) -> BTreeSet<char> {
        self.args.iter().flatten().copied().collect()
    }

    fn substituted(&self, map: &BTreeMap<char, char>) -> TplLiteral {
        TplLiteral {
            pred: self.pred.clone(),
            args: self
                .args
                .iter()
                .map(|g| g.iter().map(|c| *map.get(c).unwrap_or(c)).collect())
                .collect(),
        }
    }

    /// Canonical text under the target predicate's symmetry group, used to
    /// compare templates for set equality.
    fn canonical_key(&self, def: &PredicateDef) -> String {
        let flat = self.flat_letters();
        let best = def
            .sym
            .iter()
            .map(|p| apply_perm(p, &flat))
            .min()
            .unwrap_or(flat);
        let mut out = String::from(&self.pred);
        out.push('(');
        let mut cursor = 0;
        for (i, slot) in def.slots.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            for c in &best[cursor..cursor + slot.letters.len()] {
                out.push(*c);
            }
            cursor += slot.letters.len();
        }
        out.push(')');
        out
    }
}

impl fmt::Display for TplLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, g) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            for c in g {
                write!(f, "{c}")?;
            }
        }
        write!(f, ")")
    }
}

/// A measure template over declaration letters, used by `givens`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TplMeasure {
    pub kind: MeasureKind,
    pub letters: Vec<char>,
}

impl fmt::Display for TplMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind.name())?;
        for c in &self.letters {
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// One premise or conclusion of a theorem.
#[derive(Clone, Debug)]
pub enum TplFact {
    Lit(TplLiteral),
    Eq(Equation<PatMeasure>),
}

impl fmt::Display for TplFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TplFact::Lit(l) => {
                write!(f, "{}(", l.pred)?;
                for (i, g) in l.args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    for c in g {
                        write!(f, "?{c}")?;
                    }
                }
                write!(f, ")")
            }
            TplFact::Eq(eq) => write!(f, "{eq}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TheoremDef {
    pub id: u32,
    pub name: String,
    pub premises: Vec<TplFact>,
    pub conclusions: Vec<TplFact>,
}

impl TheoremDef {
    pub fn premise_literals(&self) -> impl Iterator<Item = &TplLiteral> {
        self.premises.iter().filter_map(|f| match f {
            TplFact::Lit(l) => Some(l),
            TplFact::Eq(_) => None,
        })
    }

    pub fn premise_equations(&self) -> impl Iterator<Item = &Equation<PatMeasure>> {
        self.premises.iter().filter_map(|f| match f {
            TplFact::Eq(e) => Some(e),
            TplFact::Lit(_) => None,
        })
    }

    /// Variables bound by matching, i.e. those of the literal premises.
    pub fn bound_vars(&self) -> BTreeSet<char> {
        self.premise_literals()
            .flat_map(|l| l.distinct_letters())
            .collect()
    }
}

fn apply_perm<T: Clone>(perm: &[usize], t: &[T]) -> Vec<T> {
    perm.iter().map(|&i| t[i].clone()).collect()
}

#[derive(Debug)]
pub struct PredicateDef {
    name: String,
    kind: PredicateKind,
    slots: Vec<SlotDef>,
    samplable: bool,
    cross_distinct: bool,
    sym: Vec<Vec<usize>>,
    constraints: Vec<Equation<TplCoord>>,
    constructs: Vec<TplLiteral>,
    companions: Vec<TplLiteral>,
    requires: Vec<TplLiteral>,
    givens: Vec<TplMeasure>,
}

impl PredicateDef {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn kind(&self) -> PredicateKind {
        self.kind
    }
    pub fn slots(&self) -> &[SlotDef] {
        &self.slots
    }
    /// Whether the sampler may draw this predicate directly.
    pub fn samplable(&self) -> bool {
        self.samplable
    }
    /// Whether points must be distinct across slots, not only within each
    /// slot. Perpendicular segments may share an endpoint, so they opt out.
    pub fn cross_distinct(&self) -> bool {
        self.cross_distinct
    }
    /// The full symmetry group as permutations of flattened letter
    /// positions; the identity is always present.
    pub fn sym(&self) -> &[Vec<usize>] {
        &self.sym
    }
    pub fn constraints(&self) -> &[Equation<TplCoord>] {
        &self.constraints
    }
    pub fn constructs(&self) -> &[TplLiteral] {
        &self.constructs
    }
    pub fn companions(&self) -> &[TplLiteral] {
        &self.companions
    }
    pub fn requires(&self) -> &[TplLiteral] {
        &self.requires
    }
    pub fn givens(&self) -> &[TplMeasure] {
        &self.givens
    }

    pub fn flat_letters(&self) -> Vec<char> {
        self.slots.iter().flat_map(|s| s.letters.clone()).collect()
    }

    pub fn measure_kind(&self) -> Option<MeasureKind> {
        if self.kind == PredicateKind::Measure {
            MeasureKind::from_name(&self.name)
        } else {
            None
        }
    }

    /// Smallest image of the flattened point tuple under the symmetry
    /// group: the canonical argument order.
    pub fn canonicalize_flat(&self, flat: Vec<PointRef>) -> Vec<PointRef> {
        self.sym
            .iter()
            .map(|p| apply_perm(p, &flat))
            .min()
            .unwrap_or(flat)
    }

    /// All distinct images of the flattened point tuple under the group.
    pub fn symmetry_images(&self, flat: &[PointRef]) -> Vec<Vec<PointRef>> {
        let mut images: Vec<Vec<PointRef>> =
            self.sym.iter().map(|p| apply_perm(p, flat)).collect();
        images.sort();
        images.dedup();
        images
    }
}

/// Unvalidated predicate declaration produced by the rule-file parser.
pub(super) struct RawPredicate {
    pub name: String,
    pub kind: PredicateKind,
    pub slots: Vec<SlotDef>,
    pub samplable: bool,
    pub cross_distinct: bool,
    /// Each entry mirrors the slot structure of the declaration.
    pub sym_entries: Vec<Vec<Vec<char>>>,
    pub constraints: Vec<Equation<TplCoord>>,
    pub constructs: Vec<TplLiteral>,
    pub companions: Vec<TplLiteral>,
    pub requires: Vec<TplLiteral>,
    pub givens: Vec<TplMeasure>,
    pub line: usize,
}

pub(super) struct RawTheorem {
    pub id: u32,
    pub name: String,
    pub premises: Vec<TplFact>,
    pub conclusions: Vec<TplFact>,
    pub line: usize,
}

#[derive(Debug)]
pub struct Registry {
    predicates: BTreeMap<String, PredicateDef>,
    order: Vec<String>,
    theorems: Vec<TheoremDef>,
}

impl Registry {
    pub(super) fn new() -> Self {
        Registry {
            predicates: BTreeMap::new(),
            order: Vec::new(),
            theorems: Vec::new(),
        }
    }

    /// Parses and validates a rule file.
    pub fn from_source(source: &str) -> Result<Self, FormalError> {
        super::dsl::parse_registry(source)
    }

    pub fn predicate(&self, name: &str) -> Result<&PredicateDef, FormalError> {
        self.predicates
            .get(name)
            .ok_or_else(|| FormalError::UnknownPredicate(name.to_owned()))
    }

    pub fn has_predicate(&self, name: &str) -> bool {
        self.predicates.contains_key(name)
    }

    /// Predicates in declaration order.
    pub fn predicates(&self) -> impl Iterator<Item = &PredicateDef> {
        self.order.iter().map(|n| &self.predicates[n])
    }

    /// Theorems sorted by id.
    pub fn theorems(&self) -> &[TheoremDef] {
        &self.theorems
    }

    pub fn theorem_by_id(&self, id: u32) -> Option<&TheoremDef> {
        self.theorems.iter().find(|t| t.id == id)
    }

    pub fn theorem_by_name(&self, name: &str) -> Option<&TheoremDef> {
        self.theorems.iter().find(|t| t.name == name)
    }

    pub(super) fn add_predicate(&mut self, raw: RawPredicate) -> Result<(), FormalError> {
        let line = raw.line;
        let fail = |msg: String| FormalError::Syntax { line, msg };
        if self.predicates.contains_key(&raw.name) {
            return Err(FormalError::DuplicateName(raw.name));
        }
        if raw.slots.is_empty() {
            return Err(fail(format!("`{}` declares no slots", raw.name)));
        }

        // Declaration letters: unique uppercase, counts matching slot kinds.
        let mut seen = BTreeSet::new();
        for slot in &raw.slots {
            if let Some(n) = slot.kind.arity() {
                if slot.letters.len() != n {
                    return Err(fail(format!(
                        "a {} slot takes {} letter(s), got {}",
                        slot.kind.describe(),
                        n,
                        slot.letters.len()
                    )));
                }
            }
            for c in &slot.letters {
                if !c.is_ascii_uppercase() {
                    return Err(fail(format!("slot letter `{c}` must be uppercase")));
                }
                if !seen.insert(*c) {
                    return Err(fail(format!("slot letter `{c}` repeats")));
                }
            }
        }
        let decl_flat: Vec<char> = raw.slots.iter().flat_map(|s| s.letters.clone()).collect();

        if raw.kind == PredicateKind::Measure {
            if MeasureKind::from_name(&raw.name).is_none() {
                return Err(fail(format!("`{}` is not a known measure", raw.name)));
            }
            if !raw.sym_entries.is_empty()
                || !raw.constraints.is_empty()
                || !raw.constructs.is_empty()
                || !raw.companions.is_empty()
                || !raw.requires.is_empty()
                || !raw.givens.is_empty()
                || raw.samplable
            {
                return Err(fail(format!(
                    "measure `{}` takes no attributes other than sample=no",
                    raw.name
                )));
            }
        }

        // Build generator permutations and close them into the full group.
        let mut gens: Vec<Vec<usize>> = Vec::new();
        for entry in &raw.sym_entries {
            if entry.len() != raw.slots.len()
                || entry
                    .iter()
                    .zip(&raw.slots)
                    .any(|(g, s)| g.len() != s.letters.len())
            {
                return Err(fail(format!(
                    "symmetry entry of `{}` must mirror its slot structure",
                    raw.name
                )));
            }
            let flat: Vec<char> = entry.iter().flatten().copied().collect();
            let mut perm = Vec::with_capacity(flat.len());
            for c in &flat {
                let pos = decl_flat.iter().position(|d| d == c).ok_or_else(|| {
                    fail(format!("symmetry letter `{c}` is not declared by `{}`", raw.name))
                })?;
                perm.push(pos);
            }
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != (0..decl_flat.len()).collect::<Vec<_>>() {
                return Err(fail(format!(
                    "symmetry entry of `{}` must permute all declared letters",
                    raw.name
                )));
            }
            gens.push(perm);
        }
        let sym = close_group(decl_flat.len(), &gens)
            .map_err(|msg| fail(format!("`{}`: {msg}", raw.name)))?;

        // Attribute templates may only reference earlier declarations, which
        // keeps construct expansion acyclic.
        let check_template = |tpl: &TplLiteral, what: &str| -> Result<(), FormalError> {
            let def = self
                .predicates
                .get(&tpl.pred)
                .ok_or_else(|| FormalError::DanglingReference {
                    line,
                    name: tpl.pred.clone(),
                })?;
            if def.kind == PredicateKind::Measure {
                return Err(fail(format!(
                    "{what} of `{}` names measure `{}`",
                    raw.name, tpl.pred
                )));
            }
            if tpl.args.len() != def.slots.len()
                || tpl
                    .args
                    .iter()
                    .zip(&def.slots)
                    .any(|(g, s)| g.len() != s.letters.len())
            {
                return Err(fail(format!(
                    "{what} `{tpl}` does not match the slots of `{}`",
                    tpl.pred
                )));
            }
            let flat = tpl.flat_letters();
            for c in &flat {
                if !decl_flat.contains(c) {
                    return Err(fail(format!(
                        "{what} `{tpl}` uses letter `{c}` not declared by `{}`",
                        raw.name
                    )));
                }
            }
            // Repeats within one slot always expand to a malformed entity;
            // repeats across slots are fine when the target allows shared
            // points (an altitude is perpendicular to segments meeting at
            // its own foot).
            for g in &tpl.args {
                let distinct: BTreeSet<char> = g.iter().copied().collect();
                if distinct.len() != g.len() {
                    return Err(fail(format!("{what} `{tpl}` repeats a letter in a slot")));
                }
            }
            if def.cross_distinct && tpl.distinct_letters().len() != flat.len() {
                return Err(fail(format!("{what} `{tpl}` repeats a letter")));
            }
            Ok(())
        };
        for t in &raw.constructs {
            check_template(t, "construct")?;
            if t.pred == raw.name {
                return Err(fail(format!("`{}` constructs itself", raw.name)));
            }
        }
        for t in &raw.companions {
            check_template(t, "companion")?;
        }
        for t in &raw.requires {
            check_template(t, "requirement")?;
        }

        // The construct set must be invariant under the symmetry group:
        // whichever image becomes canonical, expansion yields the same facts.
        {
            let keys = |tpls: &[TplLiteral]| -> Result<BTreeSet<String>, FormalError> {
                tpls.iter()
                    .map(|t| Ok(t.canonical_key(&self.predicates[&t.pred])))
                    .collect()
            };
            let base = keys(&raw.constructs)?;
            for perm in &sym {
                let map: BTreeMap<char, char> = (0..decl_flat.len())
                    .map(|i| (decl_flat[i], decl_flat[perm[i]]))
                    .collect();
                let imaged: BTreeSet<String> = raw
                    .constructs
                    .iter()
                    .map(|t| {
                        let s = t.substituted(&map);
                        s.canonical_key(&self.predicates[&s.pred])
                    })
                    .collect();
                if imaged != base {
                    return Err(fail(format!(
                        "constructs of `{}` are not closed under its symmetry group",
                        raw.name
                    )));
                }
            }
        }

        for eq in &raw.constraints {
            for v in eq.symbols() {
                if !decl_flat.contains(&v.letter) {
                    return Err(fail(format!(
                        "constraint of `{}` uses letter `{}` not declared",
                        raw.name, v.letter
                    )));
                }
            }
        }

        for g in &raw.givens {
            for c in &g.letters {
                if !decl_flat.contains(c) {
                    return Err(fail(format!(
                        "given `{g}` uses letter `{c}` not declared by `{}`",
                        raw.name
                    )));
                }
            }
            let distinct: BTreeSet<char> = g.letters.iter().copied().collect();
            if distinct.len() != g.letters.len() {
                return Err(fail(format!("given `{g}` repeats a letter")));
            }
            match g.kind.entity_kind().arity() {
                Some(n) if g.letters.len() != n => {
                    return Err(fail(format!(
                        "given `{g}` takes {n} letter(s), got {}",
                        g.letters.len()
                    )))
                }
                None if g.letters.len() < 3 => {
                    return Err(fail(format!("given `{g}` needs at least three vertices")))
                }
                _ => {}
            }
        }

        let def = PredicateDef {
            name: raw.name.clone(),
            kind: raw.kind,
            slots: raw.slots,
            samplable: raw.samplable,
            cross_distinct: raw.cross_distinct,
            sym,
            constraints: raw.constraints,
            constructs: raw.constructs,
            companions: raw.companions,
            requires: raw.requires,
            givens: raw.givens,
        };
        self.order.push(raw.name.clone());
        self.predicates.insert(raw.name, def);
        Ok(())
    }

    pub(super) fn add_theorem(&mut self, raw: RawTheorem) -> Result<(), FormalError> {
        let line = raw.line;
        let fail = |msg: String| FormalError::Syntax { line, msg };
        if raw.id == 0 {
            return Err(fail("theorem id 0 is reserved for value substitution".into()));
        }
        if self.theorems.iter().any(|t| t.id == raw.id) {
            return Err(FormalError::DuplicateName(format!("theorem {}", raw.id)));
        }
        if self.theorems.iter().any(|t| t.name == raw.name) {
            return Err(FormalError::DuplicateName(raw.name));
        }
        if raw.premises.is_empty() || raw.conclusions.is_empty() {
            return Err(fail(format!(
                "theorem `{}` needs premises and conclusions",
                raw.name
            )));
        }

        let check_pattern = |tpl: &TplLiteral| -> Result<(), FormalError> {
            let def = self
                .predicates
                .get(&tpl.pred)
                .ok_or_else(|| FormalError::DanglingReference {
                    line,
                    name: tpl.pred.clone(),
                })?;
            if def.kind == PredicateKind::Measure {
                return Err(fail(format!(
                    "`{}` pattern in `{}` names a measure",
                    tpl.pred, raw.name
                )));
            }
            if tpl.args.len() != def.slots.len()
                || tpl
                    .args
                    .iter()
                    .zip(&def.slots)
                    .any(|(g, s)| g.len() != s.letters.len())
            {
                return Err(fail(format!(
                    "pattern `{tpl}` does not match the slots of `{}`",
                    tpl.pred
                )));
            }
            Ok(())
        };

        let mut bound: BTreeSet<char> = BTreeSet::new();
        let mut literal_seen = false;
        for p in &raw.premises {
            if let TplFact::Lit(l) = p {
                check_pattern(l)?;
                literal_seen = true;
                bound.extend(l.distinct_letters());
            }
        }
        if !literal_seen {
            return Err(fail(format!(
                "theorem `{}` needs at least one literal premise",
                raw.name
            )));
        }
        let check_vars = |vars: BTreeSet<char>, what: &str| -> Result<(), FormalError> {
            for v in vars {
                if !bound.contains(&v) {
                    return Err(fail(format!(
                        "{what} of `{}` uses `?{v}`, which no literal premise binds",
                        raw.name
                    )));
                }
            }
            Ok(())
        };
        for p in &raw.premises {
            if let TplFact::Eq(eq) = p {
                check_vars(eq.symbols().into_iter().flat_map(|m| m.vars).collect(), "premise")?;
            }
        }
        for c in &raw.conclusions {
            match c {
                TplFact::Lit(l) => {
                    check_pattern(l)?;
                    check_vars(l.distinct_letters(), "conclusion")?;
                }
                TplFact::Eq(eq) => {
                    check_vars(
                        eq.symbols().into_iter().flat_map(|m| m.vars).collect(),
                        "conclusion",
                    )?;
                }
            }
        }

        self.theorems.push(TheoremDef {
            id: raw.id,
            name: raw.name,
            premises: raw.premises,
            conclusions: raw.conclusions,
        });
        self.theorems.sort_by_key(|t| t.id);
        Ok(())
    }
}

/// Closes generator permutations into a full group (identity included).
fn close_group(n: usize, gens: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, String> {
    let identity: Vec<usize> = (0..n).collect();
    let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
    set.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(p) = frontier.pop() {
        for g in gens {
            // apply(compose, t) == apply(p, apply(g, t))
            let compose: Vec<usize> = p.iter().map(|&i| g[i]).collect();
            if set.insert(compose.clone()) {
                frontier.push(compose);
            }
        }
        if set.len() > 720 {
            return Err("symmetry group larger than 720 elements".into());
        }
    }
    Ok(set.into_iter().collect())
}

/// The rule set shipped with the crate.
pub fn builtin_registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::from_source(include_str!("../../registry/core.gdl"))
            .expect("built-in rule file must load")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_closure_from_generators() {
        // One transposition over three letters yields a 2-element group.
        let g = close_group(3, &[vec![0, 2, 1]]).unwrap();
        assert_eq!(g.len(), 2);
        // Rotation and one transposition generate all 6 permutations.
        let g = close_group(3, &[vec![1, 2, 0], vec![0, 2, 1]]).unwrap();
        assert_eq!(g.len(), 6);
        // Quadrilateral rotation plus reversal: the dihedral group, 8.
        let g = close_group(4, &[vec![1, 2, 3, 0], vec![3, 2, 1, 0]]).unwrap();
        assert_eq!(g.len(), 8);
    }

    #[test]
    fn builtin_rules_load() {
        let reg = builtin_registry();
        assert!(reg.predicates().count() >= 20);
        assert!(reg.theorems().len() >= 25 && reg.theorems().len() <= 35);
    }

    #[test]
    fn builtin_symmetry_shapes() {
        let reg = builtin_registry();
        assert_eq!(reg.predicate("Triangle").unwrap().sym().len(), 6);
        assert_eq!(reg.predicate("IsoscelesTriangle").unwrap().sym().len(), 2);
        assert_eq!(reg.predicate("Parallelogram").unwrap().sym().len(), 8);
        assert_eq!(reg.predicate("ParallelBetweenLine").unwrap().sym().len(), 8);
        assert_eq!(reg.predicate("Collinear").unwrap().sym().len(), 2);
        assert_eq!(reg.predicate("IsMidsegmentOfTriangle").unwrap().sym().len(), 12);
    }

    #[test]
    fn asymmetric_constructs_are_rejected() {
        // The swap symmetry can canonicalize (A,B) to (B,A), after which the
        // construct would assert Line(BC) instead of Line(AC): unsound.
        let src = "\
predicate Line(AB:segment) kind=entity sample=no sym=[(BA)]
predicate Butterfly(A:point,B:point,C:point) kind=relation sym=[(B,A,C)] \
    constructs=[Line(AC)]
";
        let err = Registry::from_source(src).unwrap_err();
        assert!(err.to_string().contains("not closed"), "{err}");

        // Listing both images makes the set closed and acceptable.
        let src = "\
predicate Line(AB:segment) kind=entity sample=no sym=[(BA)]
predicate Butterfly(A:point,B:point,C:point) kind=relation sym=[(B,A,C)] \
    constructs=[Line(AC); Line(BC)]
";
        assert!(Registry::from_source(src).is_ok());
    }

    #[test]
    fn theorem_conclusions_must_bind_vars() {
        let src = "\
predicate Line(AB:segment) kind=entity sample=no sym=[(BA)]
theorem 1 ghost_conclusion: premises=[Line(?a?b)] conclusions=[Line(?a?c)]
";
        let err = Registry::from_source(src).unwrap_err();
        assert!(err.to_string().contains("no literal premise binds"), "{err}");
    }
}
