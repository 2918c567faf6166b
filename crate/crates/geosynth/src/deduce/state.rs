//! The fact store.
//!
//! Facts are append-only and deduplicated by canonical text, so a fact id
//! is stable for the life of the state. Adding a literal cascades the
//! predicate's construct templates (a triangle brings its three sides, an
//! altitude brings its foot's collinearity and perpendicularities), which
//! keeps the store closed under the registry's structural rules without
//! any search.

use std::collections::{BTreeMap, BTreeSet};

use crate::formal::{
    Equation, ExactValue, Expr, Literal, MeasureSymbol, PointRef, Registry,
};

use super::solver::EquationSolver;
use super::{DeduceError, FactId, SUBSTITUTION_STEP};

#[derive(Debug, Clone)]
pub enum FactData {
    Literal(Literal),
    Equation(Equation<MeasureSymbol>),
}

/// One way a fact was derived. A fact re-derived through a different
/// theorem or binding collects additional edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub theorem: u32,
    /// Sorted by variable; empty for solver substitution steps.
    pub binding: Vec<(char, PointRef)>,
    /// Literal premises in theorem order, then any facts an equation
    /// premise was entailed from.
    pub premises: Vec<FactId>,
}

impl Edge {
    pub fn binding_key(&self) -> String {
        let mut out = String::new();
        for (var, point) in &self.binding {
            if !out.is_empty() {
                out.push(',');
            }
            out.push(*var);
            out.push('=');
            out.push_str(point.name());
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Fact {
    data: FactData,
    text: String,
    layer: usize,
    given: bool,
    edges: Vec<Edge>,
}

impl Fact {
    pub fn data(&self) -> &FactData {
        &self.data
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Deduction layer the fact first appeared in; 0 for givens.
    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn is_given(&self) -> bool {
        self.given
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn literal(&self) -> Option<&Literal> {
        match &self.data {
            FactData::Literal(l) => Some(l),
            FactData::Equation(_) => None,
        }
    }

    pub fn equation(&self) -> Option<&Equation<MeasureSymbol>> {
        match &self.data {
            FactData::Equation(e) => Some(e),
            FactData::Literal(_) => None,
        }
    }
}

#[derive(Clone)]
pub struct State<'r> {
    registry: &'r Registry,
    facts: Vec<Fact>,
    index: BTreeMap<String, FactId>,
    by_pred: BTreeMap<String, Vec<FactId>>,
    points: BTreeSet<PointRef>,
    solver: EquationSolver,
}

impl<'r> State<'r> {
    pub fn new(registry: &'r Registry) -> Self {
        State {
            registry,
            facts: Vec::new(),
            index: BTreeMap::new(),
            by_pred: BTreeMap::new(),
            points: BTreeSet::new(),
            solver: EquationSolver::new(),
        }
    }

    pub fn registry(&self) -> &'r Registry {
        self.registry
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn fact(&self, id: FactId) -> &Fact {
        &self.facts[id]
    }

    pub fn id_of(&self, canonical_text: &str) -> Option<FactId> {
        self.index.get(canonical_text).copied()
    }

    pub fn literal_id(&self, lit: &Literal) -> Option<FactId> {
        self.id_of(lit.text())
    }

    pub fn facts_of_pred(&self, pred: &str) -> &[FactId] {
        self.by_pred.get(pred).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Points mentioned by any literal fact.
    pub fn points(&self) -> &BTreeSet<PointRef> {
        &self.points
    }

    /// Adds a literal fact plus its construct cascade. Returns ids of facts
    /// that are genuinely new; re-adding an existing fact only records the
    /// derivation edge (when it is a new one).
    pub fn add_literal(
        &mut self,
        lit: Literal,
        layer: usize,
        edge: Option<Edge>,
    ) -> Result<Vec<FactId>, DeduceError> {
        let mut added = Vec::new();
        self.add_literal_inner(lit, layer, &edge, &mut added)?;
        Ok(added)
    }

    fn add_literal_inner(
        &mut self,
        lit: Literal,
        layer: usize,
        edge: &Option<Edge>,
        added: &mut Vec<FactId>,
    ) -> Result<(), DeduceError> {
        if let Some(&id) = self.index.get(lit.text()) {
            if let Some(e) = edge {
                self.attach_edge(id, e.clone());
            }
            return Ok(());
        }
        let registry = self.registry;
        let def = registry
            .predicate(lit.pred())
            .expect("literal was built against this registry");
        let letter_map: BTreeMap<char, PointRef> = def
            .flat_letters()
            .into_iter()
            .zip(lit.flat_points())
            .collect();
        let mut cascade = Vec::new();
        for tpl in def.constructs() {
            let args: Vec<Vec<PointRef>> = tpl
                .args
                .iter()
                .map(|group| {
                    group
                        .iter()
                        .map(|ch| letter_map[ch].clone())
                        .collect()
                })
                .collect();
            cascade.push(Literal::new(registry, &tpl.pred, args)?);
        }

        let id = self.facts.len();
        self.points.extend(lit.points());
        self.index.insert(lit.text().to_string(), id);
        self.by_pred
            .entry(lit.pred().to_string())
            .or_default()
            .push(id);
        self.facts.push(Fact {
            text: lit.text().to_string(),
            data: FactData::Literal(lit),
            layer,
            given: edge.is_none(),
            edges: edge.clone().into_iter().collect(),
        });
        added.push(id);

        for construct in cascade {
            self.add_literal_inner(construct, layer, edge, added)?;
        }
        Ok(())
    }

    /// Adds an equation fact (canonicalized) and feeds it to the solver.
    pub fn add_equation(
        &mut self,
        eq: Equation<MeasureSymbol>,
        layer: usize,
        edge: Option<Edge>,
    ) -> Result<Vec<FactId>, DeduceError> {
        let eq = eq.canonical();
        let text = eq.to_string();
        if let Some(&id) = self.index.get(&text) {
            if let Some(e) = edge {
                self.attach_edge(id, e);
            }
            return Ok(Vec::new());
        }
        let id = self.facts.len();
        self.index.insert(text.clone(), id);
        self.facts.push(Fact {
            data: FactData::Equation(eq.clone()),
            text,
            layer,
            given: edge.is_none(),
            edges: edge.into_iter().collect(),
        });
        self.solver.add(&eq, id)?;
        Ok(vec![id])
    }

    /// Lets the solver chew on what it has; every newly pinned value
    /// becomes a `symbol = value` fact derived by [`SUBSTITUTION_STEP`].
    pub fn propagate(&mut self, layer: usize) -> Result<Vec<FactId>, DeduceError> {
        let derived = self.solver.propagate()?;
        let mut out = Vec::new();
        for d in derived {
            let eq = Equation::new(Expr::Sym(d.symbol), d.value.to_expr()).canonical();
            let text = eq.to_string();
            let premises: Vec<FactId> = d.sources.into_iter().collect();
            if let Some(&id) = self.index.get(&text) {
                // The value restates one of its own sources (typically the
                // given that pinned it); a self-supporting edge would make
                // traceback circular.
                if !premises.contains(&id) {
                    self.attach_edge(
                        id,
                        Edge {
                            theorem: SUBSTITUTION_STEP,
                            binding: Vec::new(),
                            premises,
                        },
                    );
                }
                continue;
            }
            let id = self.facts.len();
            self.index.insert(text.clone(), id);
            self.facts.push(Fact {
                data: FactData::Equation(eq),
                text,
                layer,
                given: false,
                edges: vec![Edge {
                    theorem: SUBSTITUTION_STEP,
                    binding: Vec::new(),
                    premises,
                }],
            });
            out.push(id);
        }
        Ok(out)
    }

    /// Is the equation entailed by the current facts? Returns the facts it
    /// follows from.
    pub fn check_equation(&self, eq: &Equation<MeasureSymbol>) -> Option<Vec<FactId>> {
        let sources = self.solver.check(&eq.clone().canonical())?;
        Some(sources.into_iter().collect())
    }

    pub fn value_of(&self, sym: &MeasureSymbol) -> Option<&ExactValue> {
        self.solver.value_of(sym)
    }

    fn attach_edge(&mut self, id: FactId, edge: Edge) {
        let edges = &mut self.facts[id].edges;
        let duplicate = edges
            .iter()
            .any(|e| e.theorem == edge.theorem && e.binding == edge.binding);
        if !duplicate {
            edges.push(edge);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{builtin_registry, parse_equation, parse_literal};

    fn lit(text: &str) -> Literal {
        parse_literal(builtin_registry(), text).unwrap()
    }

    #[test]
    fn constructs_cascade_when_a_literal_lands() {
        let mut state = State::new(builtin_registry());
        let added = state
            .add_literal(lit("Triangle(ABC)"), 0, None)
            .unwrap();
        assert_eq!(added.len(), 4);
        assert!(state.id_of("Triangle(ABC)").is_some());
        assert_eq!(state.facts_of_pred("Line").len(), 3);
        assert!(state.facts().iter().all(Fact::is_given));

        // The cascade is idempotent: sides already present are not re-added.
        let again = state
            .add_literal(lit("IsMedianOfTriangle(AD,BC)"), 0, None)
            .unwrap();
        let texts: Vec<&str> = again.iter().map(|&id| state.fact(id).text()).collect();
        assert!(texts.contains(&"IsMidpointOfLine(D,BC)"));
        assert!(texts.contains(&"Collinear(B,D,C)"));
        assert!(texts.contains(&"Triangle(ABD)"));
        // New sides BD, CD, and the shared AD join the original three.
        assert_eq!(state.facts_of_pred("Line").len(), 6);
    }

    #[test]
    fn values_become_substitution_facts_without_self_edges() {
        let mut state = State::new(builtin_registry());
        let given = parse_equation("LengthOfLine(AB) = 8").unwrap();
        state.add_equation(given, 0, None).unwrap();
        let half = parse_equation("LengthOfLine(DE) = LengthOfLine(AB)/2").unwrap();
        state.add_equation(half, 0, None).unwrap();

        let new = state.propagate(0).unwrap();
        // AB = 8 restates its own given; only DE = 4 is new.
        assert_eq!(new.len(), 1);
        let fact = state.fact(new[0]);
        assert_eq!(fact.text(), "LengthOfLine(DE) = 4");
        assert_eq!(fact.edges().len(), 1);
        assert_eq!(fact.edges()[0].theorem, SUBSTITUTION_STEP);
        assert_eq!(fact.edges()[0].premises.len(), 2);

        let ab = state.id_of("LengthOfLine(AB) = 8").unwrap();
        assert!(state.fact(ab).edges().is_empty());
    }
}
