//! Sentence templates: the one table that ties formal facts to English.
//!
//! Every predicate owns a phrase and every theorem a full sentence, loaded
//! from JSON and validated against the registry at load time. Rendering a
//! reasoning path and translating candidate sentences back into formal
//! triples walk the same table, so the round trip is exact by construction
//! rather than by parser goodwill. Theorem sentences name their points
//! through `{x}` holes over the premise variables; a theorem that can
//! prove several things at once also carries a `{conclusion}` hole, and
//! translation only accepts a reading whose captured conclusion the
//! theorem really yields under the recovered binding.
//!
//! Solver steps are not templated per theorem. They render as
//! `Substituting ...` when a single cited equation pins the target measure
//! and every other measure in it has a cited value, showing the plugged-in
//! middle form, and as `Combining ...` otherwise. The triple behind a
//! `Substituting` sentence cites only the value equations; the pinning
//! equation is already committed in the state, which is exactly what
//! strict verification checks entailment against.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::Deserialize;

use crate::deduce::{
    instantiate_equation, instantiate_literal, Binding, SUBSTITUTION_NAME, SUBSTITUTION_STEP,
};
use crate::formal::{
    builtin_registry, parse_equation, EntityKind, Equation, Expr, FormalError, Literal,
    MeasureKind, MeasureSymbol, PointRef, PredicateDef, PredicateKind, Registry, TheoremDef,
    TplFact,
};
use crate::qa::notation::{self, NotationError};
use crate::target::PathStep;
use crate::verify::{FactClaim, StepTriple};

const SOLVED_PREFIX: &str = "Substituting ";
const COMBINED_PREFIX: &str = "Combining ";

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("no template for {kind} `{name}`")]
    MissingTemplate { kind: &'static str, name: String },
    #[error("template names unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("template for `{name}`: {reason}")]
    BadTemplate { name: String, reason: String },
    #[error("cannot render: {0}")]
    Render(String),
    #[error("no template reading fits `{0}`")]
    NoReading(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Formal(#[from] FormalError),
    #[error(transparent)]
    Notation(#[from] NotationError),
}

#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Text(String),
    /// `{A}` or `{a}`: one point, named by a declaration letter or a
    /// premise variable.
    Slot(char),
    /// `{..}`: a whole point run, for polygons of any size.
    Run,
    /// `{conclusion}`: the claim this step draws.
    Conclusion,
}

fn parse_pieces(text: &str) -> Result<Vec<Piece>, String> {
    let mut pieces = Vec::new();
    let mut lit = String::new();
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '}' {
            return Err("stray `}`".into());
        }
        if c != '{' {
            lit.push(c);
            continue;
        }
        let mut token = String::new();
        loop {
            match chars.next() {
                Some('}') => break,
                Some(t) => token.push(t),
                None => return Err("unclosed `{`".into()),
            }
        }
        if !lit.is_empty() {
            pieces.push(Piece::Text(std::mem::take(&mut lit)));
        }
        let piece = if token == ".." {
            Piece::Run
        } else if token == "conclusion" {
            Piece::Conclusion
        } else if token.len() == 1 && token.chars().all(|t| t.is_ascii_alphabetic()) {
            Piece::Slot(token.chars().next().expect("one char"))
        } else {
            return Err(format!("bad hole `{{{token}}}`"));
        };
        pieces.push(piece);
    }
    if !lit.is_empty() {
        pieces.push(Piece::Text(lit));
    }
    Ok(pieces)
}

/// A compiled template: the pieces for rendering, an anchored regex for
/// reading back. Capture groups line up with the non-text pieces in order;
/// repeated slots are checked for consistency after the match, since the
/// regex itself carries no backreferences.
#[derive(Debug)]
struct Pattern {
    text: String,
    pieces: Vec<Piece>,
    regex: Regex,
}

#[derive(Default)]
struct Reading {
    slots: BTreeMap<char, PointRef>,
    run: Option<String>,
    conclusion: Option<String>,
}

impl Pattern {
    fn compile(text: &str) -> Result<Pattern, String> {
        let pieces = parse_pieces(text)?;
        let mut src = String::from("^");
        for piece in &pieces {
            match piece {
                Piece::Text(t) => src.push_str(&regex::escape(t)),
                Piece::Slot(_) => src.push_str("([A-Z][0-9]?)"),
                Piece::Run => src.push_str("((?:[A-Z][0-9]?){3,})"),
                Piece::Conclusion => src.push_str("(.+)"),
            }
        }
        src.push('$');
        let regex = Regex::new(&src).map_err(|e| e.to_string())?;
        Ok(Pattern {
            text: text.to_string(),
            pieces,
            regex,
        })
    }

    fn slots(&self) -> impl Iterator<Item = char> + '_ {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Slot(c) => Some(*c),
            _ => None,
        })
    }

    fn has_run(&self) -> bool {
        self.pieces.iter().any(|p| matches!(p, Piece::Run))
    }

    fn conclusion_holes(&self) -> usize {
        self.pieces
            .iter()
            .filter(|p| matches!(p, Piece::Conclusion))
            .count()
    }

    fn render(
        &self,
        slot: &dyn Fn(char) -> Option<String>,
        run: Option<&str>,
        conclusion: Option<&str>,
    ) -> Result<String, TemplateError> {
        let mut out = String::new();
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(c) => match slot(*c) {
                    Some(name) => out.push_str(&name),
                    None => {
                        return Err(TemplateError::Render(format!(
                            "hole `{{{c}}}` in `{}` has no point",
                            self.text
                        )))
                    }
                },
                Piece::Run => match run {
                    Some(r) => out.push_str(r),
                    None => {
                        return Err(TemplateError::Render(format!(
                            "`{}` has a `{{..}}` hole but no point run",
                            self.text
                        )))
                    }
                },
                Piece::Conclusion => match conclusion {
                    Some(c) => out.push_str(c),
                    None => {
                        return Err(TemplateError::Render(format!(
                            "`{}` has a `{{conclusion}}` hole but no conclusion",
                            self.text
                        )))
                    }
                },
            }
        }
        Ok(out)
    }

    fn read(&self, sentence: &str) -> Option<Reading> {
        let caps = self.regex.captures(sentence)?;
        let mut reading = Reading::default();
        let mut group = 0;
        for piece in &self.pieces {
            if matches!(piece, Piece::Text(_)) {
                continue;
            }
            group += 1;
            let value = caps.get(group)?.as_str().to_string();
            match piece {
                Piece::Slot(c) => {
                    let point = PointRef::new(&value).ok()?;
                    match reading.slots.get(c) {
                        Some(existing) if *existing != point => return None,
                        _ => {
                            reading.slots.insert(*c, point);
                        }
                    }
                }
                Piece::Run => reading.run = Some(value),
                Piece::Conclusion => reading.conclusion = Some(value),
                Piece::Text(_) => unreachable!(),
            }
        }
        Some(reading)
    }
}

/// The measure phrasings are pinned so that the short-notation parser and
/// the templates can never drift apart.
fn pinned_measure_text(kind: MeasureKind) -> &'static str {
    match kind {
        MeasureKind::Length => "{A}{B}",
        MeasureKind::Angle => "angle {A}{B}{C}",
        MeasureKind::Area => "area of {..}",
        MeasureKind::Perimeter => "perimeter of {..}",
    }
}

fn validate_predicate(def: &PredicateDef, pattern: &Pattern) -> Result<(), String> {
    if pattern.conclusion_holes() > 0 {
        return Err("`{conclusion}` belongs in theorem templates".into());
    }
    if let Some(kind) = def.measure_kind() {
        let pinned = pinned_measure_text(kind);
        if pattern.text != pinned {
            return Err(format!(
                "measure phrasing is fixed to `{pinned}` so the short notation can read it back"
            ));
        }
        return Ok(());
    }
    let flat = def.flat_letters();
    if pattern.has_run() {
        if def.slots().len() != 1 || def.slots()[0].kind != EntityKind::AnyPolygon {
            return Err("`{..}` fits only a lone polygon-of-any-size slot".into());
        }
        return Ok(());
    }
    let used: BTreeSet<char> = pattern.slots().collect();
    for c in &used {
        if !flat.contains(c) {
            return Err(format!("hole `{{{c}}}` is not a declared letter"));
        }
    }
    for c in &flat {
        if !used.contains(c) {
            return Err(format!("declared letter `{c}` never appears"));
        }
    }
    Ok(())
}

fn validate_theorem(def: &TheoremDef, pattern: &Pattern) -> Result<(), String> {
    if pattern.has_run() {
        return Err("`{..}` belongs in measure templates".into());
    }
    if pattern.conclusion_holes() > 1 {
        return Err("at most one `{conclusion}` hole".into());
    }
    if def.conclusions.len() > 1 && pattern.conclusion_holes() == 0 {
        return Err("theorems with several conclusions need a `{conclusion}` hole".into());
    }
    let vars = def.bound_vars();
    let used: BTreeSet<char> = pattern.slots().collect();
    for c in &used {
        if !vars.contains(c) {
            return Err(format!("hole `{{{c}}}` is not a premise variable"));
        }
    }
    for c in &vars {
        if !used.contains(c) {
            return Err(format!(
                "premise variable `{c}` never appears, so translation could not recover it"
            ));
        }
    }
    if pattern.text.starts_with(SOLVED_PREFIX) || pattern.text.starts_with(COMBINED_PREFIX) {
        return Err("the substitution prefixes are reserved".into());
    }
    Ok(())
}

#[derive(Deserialize)]
struct RawTemplates {
    predicates: BTreeMap<String, String>,
    theorems: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct TemplateSet {
    predicates: BTreeMap<String, Pattern>,
    /// Ascending theorem id; translation tries readings in this order.
    theorems: Vec<(u32, String, Pattern)>,
}

impl TemplateSet {
    pub fn from_json(source: &str, registry: &Registry) -> Result<TemplateSet, TemplateError> {
        let raw: RawTemplates = serde_json::from_str(source)?;
        for name in raw.predicates.keys() {
            if !registry.has_predicate(name) {
                return Err(TemplateError::UnknownName {
                    kind: "predicate",
                    name: name.clone(),
                });
            }
        }
        for name in raw.theorems.keys() {
            if registry.theorem_by_name(name).is_none() {
                return Err(TemplateError::UnknownName {
                    kind: "theorem",
                    name: name.clone(),
                });
            }
        }

        let mut predicates = BTreeMap::new();
        for def in registry.predicates() {
            let text = raw.predicates.get(def.name()).ok_or_else(|| {
                TemplateError::MissingTemplate {
                    kind: "predicate",
                    name: def.name().to_string(),
                }
            })?;
            let bad = |reason: String| TemplateError::BadTemplate {
                name: def.name().to_string(),
                reason,
            };
            let pattern = Pattern::compile(text).map_err(bad)?;
            validate_predicate(def, &pattern).map_err(bad)?;
            predicates.insert(def.name().to_string(), pattern);
        }

        let mut theorems = Vec::new();
        let mut seen = BTreeSet::new();
        for def in registry.theorems() {
            let text = raw
                .theorems
                .get(&def.name)
                .ok_or_else(|| TemplateError::MissingTemplate {
                    kind: "theorem",
                    name: def.name.clone(),
                })?;
            let bad = |reason: String| TemplateError::BadTemplate {
                name: def.name.clone(),
                reason,
            };
            if !seen.insert(text.clone()) {
                return Err(bad(
                    "wording duplicates another theorem, so translation would be ambiguous"
                        .into(),
                ));
            }
            let pattern = Pattern::compile(text).map_err(bad)?;
            validate_theorem(def, &pattern).map_err(bad)?;
            theorems.push((def.id, def.name.clone(), pattern));
        }

        Ok(TemplateSet {
            predicates,
            theorems,
        })
    }

    /// The template set shipped with the built-in registry.
    pub fn builtin() -> &'static TemplateSet {
        static BUILTIN: OnceLock<TemplateSet> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            TemplateSet::from_json(BUILTIN_TEMPLATE_JSON, builtin_registry())
                .expect("builtin templates validate")
        })
    }

    pub fn verbalize_literal(
        &self,
        registry: &Registry,
        lit: &Literal,
    ) -> Result<String, TemplateError> {
        let def = registry.predicate(lit.pred())?;
        let pattern =
            self.predicates
                .get(def.name())
                .ok_or_else(|| TemplateError::MissingTemplate {
                    kind: "predicate",
                    name: def.name().to_string(),
                })?;
        let mut map: BTreeMap<char, PointRef> = BTreeMap::new();
        for (slot, group) in def.slots().iter().zip(lit.args()) {
            for (letter, point) in slot.letters.iter().zip(group) {
                map.insert(*letter, point.clone());
            }
        }
        let run: Option<String> = lit
            .args()
            .first()
            .map(|g| g.iter().map(|p| p.name()).collect());
        pattern.render(
            &|c| map.get(&c).map(|p| p.name().to_string()),
            run.as_deref(),
            None,
        )
    }

    /// Reads a predicate phrase back into a canonical literal. Measures are
    /// terms, not standalone claims, so their templates never match here.
    pub fn parse_literal_phrase(
        &self,
        registry: &Registry,
        phrase: &str,
    ) -> Result<Literal, TemplateError> {
        for (name, pattern) in &self.predicates {
            let def = registry.predicate(name)?;
            if def.kind() == PredicateKind::Measure {
                continue;
            }
            let Some(reading) = pattern.read(phrase) else {
                continue;
            };
            let mut args: Vec<Vec<PointRef>> = Vec::new();
            let mut complete = true;
            for slot in def.slots() {
                let mut group = Vec::new();
                for letter in &slot.letters {
                    match reading.slots.get(letter) {
                        Some(p) => group.push(p.clone()),
                        None => complete = false,
                    }
                }
                args.push(group);
            }
            if !complete {
                continue;
            }
            match Literal::new(registry, name, args) {
                Ok(lit) => return Ok(lit),
                Err(_) => continue,
            }
        }
        Err(TemplateError::NoReading(phrase.to_string()))
    }

    pub fn render_claim(
        &self,
        registry: &Registry,
        claim: &FactClaim,
    ) -> Result<String, TemplateError> {
        match claim {
            FactClaim::Literal(lit) => self.verbalize_literal(registry, lit),
            FactClaim::Equation(eq) => Ok(notation::equation_text(eq)),
        }
    }

    pub fn parse_claim(
        &self,
        registry: &Registry,
        text: &str,
    ) -> Result<FactClaim, TemplateError> {
        if text.contains('=') {
            Ok(FactClaim::Equation(
                notation::parse_equation_text(text)?.canonical(),
            ))
        } else {
            Ok(FactClaim::Literal(self.parse_literal_phrase(registry, text)?))
        }
    }

    /// One path step as an English sentence.
    pub fn render_step(
        &self,
        registry: &Registry,
        step: &PathStep,
    ) -> Result<String, TemplateError> {
        if step.theorem == SUBSTITUTION_STEP {
            self.render_substitution(step)
        } else {
            self.render_theorem_step(registry, step)
        }
    }

    fn render_theorem_step(
        &self,
        registry: &Registry,
        step: &PathStep,
    ) -> Result<String, TemplateError> {
        let pattern = self
            .theorems
            .iter()
            .find(|(_, name, _)| *name == step.name)
            .map(|(_, _, p)| p)
            .ok_or_else(|| TemplateError::MissingTemplate {
                kind: "theorem",
                name: step.name.clone(),
            })?;
        let map: BTreeMap<char, PointRef> = step.binding.iter().cloned().collect();
        let conclusion = if pattern.conclusion_holes() > 0 {
            let claim = FactClaim::parse(registry, &step.conclusion)?;
            Some(self.render_claim(registry, &claim)?)
        } else {
            None
        };
        pattern.render(
            &|c| map.get(&c).map(|p| p.name().to_string()),
            None,
            conclusion.as_deref(),
        )
    }

    fn render_substitution(&self, step: &PathStep) -> Result<String, TemplateError> {
        let view = substitution_view(step)?;
        let target_text = notation::measure_text(&view.target);
        let value_text = notation::expr_text(&view.value);
        match view.form {
            SubForm::Solved => {
                let values: BTreeMap<MeasureSymbol, Expr<MeasureSymbol>> = view
                    .values
                    .iter()
                    .filter_map(|eq| match &eq.lhs {
                        Expr::Sym(s) => Some((s.clone(), eq.rhs.clone())),
                        _ => None,
                    })
                    .collect();
                // The middle form stays unnormalized on purpose: `8/2` is
                // the substituted shape, folding it would skip the step.
                let substituted = view.structural[0].rhs.map_sym(&mut |s| {
                    values
                        .get(s)
                        .cloned()
                        .unwrap_or_else(|| Expr::Sym(s.clone()))
                });
                let items: Vec<String> =
                    view.values.iter().map(notation::equation_text).collect();
                Ok(format!(
                    "{SOLVED_PREFIX}{}, {} = {} = {}.",
                    join_list(&items),
                    target_text,
                    notation::expr_text(&substituted),
                    value_text
                ))
            }
            SubForm::Combined => {
                let items: Vec<String> = view.all.iter().map(notation::equation_text).collect();
                Ok(format!(
                    "{COMBINED_PREFIX}{}, {} = {}.",
                    join_list(&items),
                    target_text,
                    value_text
                ))
            }
        }
    }

    /// The formal triple a step stands for; the counterpart of
    /// [`TemplateSet::render_step`] under translation.
    pub fn triple_of(
        &self,
        registry: &Registry,
        step: &PathStep,
    ) -> Result<StepTriple, TemplateError> {
        if step.theorem == SUBSTITUTION_STEP {
            let view = substitution_view(step)?;
            let cited = match view.form {
                SubForm::Solved => view.values,
                SubForm::Combined => view.all,
            };
            Ok(StepTriple {
                conditions: cited.into_iter().map(FactClaim::Equation).collect(),
                theorem: SUBSTITUTION_NAME.to_string(),
                conclusion: FactClaim::Equation(
                    Equation {
                        lhs: Expr::Sym(view.target),
                        rhs: view.value,
                    }
                    .canonical(),
                ),
            })
        } else {
            let conditions = step
                .conditions
                .iter()
                .map(|text| FactClaim::parse(registry, text))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(StepTriple {
                conditions,
                theorem: step.name.clone(),
                conclusion: FactClaim::parse(registry, &step.conclusion)?,
            })
        }
    }

    /// Inverts [`TemplateSet::render_step`]: substitution prefixes first,
    /// then theorem patterns in id order, first validated reading wins.
    pub fn translate_step(
        &self,
        registry: &Registry,
        sentence: &str,
    ) -> Result<StepTriple, TemplateError> {
        if let Some(body) = sentence.strip_prefix(SOLVED_PREFIX) {
            return self.translate_substitution(body, true);
        }
        if let Some(body) = sentence.strip_prefix(COMBINED_PREFIX) {
            return self.translate_substitution(body, false);
        }
        for (_, name, pattern) in &self.theorems {
            let Some(reading) = pattern.read(sentence) else {
                continue;
            };
            if let Some(triple) = self.theorem_triple(registry, name, &reading) {
                return Ok(triple);
            }
        }
        Err(TemplateError::NoReading(sentence.to_string()))
    }

    fn theorem_triple(
        &self,
        registry: &Registry,
        name: &str,
        reading: &Reading,
    ) -> Option<StepTriple> {
        let def = registry.theorem_by_name(name)?;
        let binding: Binding = reading.slots.clone();
        let instantiate = |tpl: &TplFact| -> Option<FactClaim> {
            match tpl {
                TplFact::Lit(lit) => Some(FactClaim::Literal(
                    instantiate_literal(registry, lit, &binding).ok()?,
                )),
                TplFact::Eq(eq) => Some(FactClaim::Equation(
                    instantiate_equation(eq, &binding).ok()?.canonical(),
                )),
            }
        };
        let conditions = def
            .premises
            .iter()
            .map(&instantiate)
            .collect::<Option<Vec<_>>>()?;
        let conclusion = match &reading.conclusion {
            Some(text) => {
                let claimed = self.parse_claim(registry, text).ok()?;
                def.conclusions
                    .iter()
                    .filter_map(&instantiate)
                    .find(|inst| *inst == claimed)?
            }
            None => instantiate(def.conclusions.first()?)?,
        };
        Some(StepTriple {
            conditions,
            theorem: name.to_string(),
            conclusion,
        })
    }

    fn translate_substitution(
        &self,
        body: &str,
        solved: bool,
    ) -> Result<StepTriple, TemplateError> {
        let fail = || TemplateError::NoReading(body.to_string());
        let body = body.strip_suffix('.').ok_or_else(fail)?;
        // Equations carry no commas, so the last `, ` always separates the
        // cited list from the concluding clause.
        let (list_text, tail) = body.rsplit_once(", ").ok_or_else(fail)?;
        let parts: Vec<&str> = tail.split(" = ").collect();
        if parts.len() != if solved { 3 } else { 2 } {
            return Err(fail());
        }
        let lhs = notation::parse_expr_text(parts[0])?;
        if !matches!(lhs, Expr::Sym(_)) {
            return Err(fail());
        }
        if solved {
            // The middle form is presentation, but it still has to parse.
            notation::parse_expr_text(parts[1])?;
        }
        let rhs = notation::parse_expr_text(parts.last().expect("checked len"))?;
        let conditions = split_list(list_text)
            .into_iter()
            .map(|item| {
                Ok(FactClaim::Equation(
                    notation::parse_equation_text(&item)?.canonical(),
                ))
            })
            .collect::<Result<Vec<_>, TemplateError>>()?;
        Ok(StepTriple {
            conditions,
            theorem: SUBSTITUTION_NAME.to_string(),
            conclusion: FactClaim::Equation(Equation { lhs, rhs }.canonical()),
        })
    }
}

enum SubForm {
    Solved,
    Combined,
}

struct SubView {
    /// Conditions that just report a measure's value, in cited order.
    values: Vec<Equation<MeasureSymbol>>,
    /// Everything else: the equations relating measures to each other.
    structural: Vec<Equation<MeasureSymbol>>,
    all: Vec<Equation<MeasureSymbol>>,
    target: MeasureSymbol,
    value: Expr<MeasureSymbol>,
    form: SubForm,
}

fn is_value_equation(eq: &Equation<MeasureSymbol>) -> bool {
    matches!(eq.lhs, Expr::Sym(_)) && eq.rhs.symbols().is_empty()
}

fn substitution_view(step: &PathStep) -> Result<SubView, TemplateError> {
    let conclusion = parse_equation(&step.conclusion)?.canonical();
    let Expr::Sym(target) = conclusion.lhs else {
        return Err(TemplateError::Render(format!(
            "substitution conclusion `{}` does not pin a measure",
            step.conclusion
        )));
    };
    if step.conditions.is_empty() {
        return Err(TemplateError::Render(
            "substitution step cites no equations".into(),
        ));
    }
    let mut all = Vec::new();
    for text in &step.conditions {
        all.push(parse_equation(text)?.canonical());
    }
    let (values, structural): (Vec<_>, Vec<_>) =
        all.iter().cloned().partition(is_value_equation);
    let known: BTreeSet<MeasureSymbol> = values
        .iter()
        .filter_map(|eq| match &eq.lhs {
            Expr::Sym(s) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let solved = structural.len() == 1
        && !values.is_empty()
        && matches!(&structural[0].lhs, Expr::Sym(s) if *s == target)
        && structural[0].rhs.symbols().iter().all(|s| known.contains(s));
    Ok(SubView {
        values,
        structural,
        all,
        target,
        value: conclusion.rhs,
        form: if solved {
            SubForm::Solved
        } else {
            SubForm::Combined
        },
    })
}

pub(crate) fn join_list(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        2 => format!("{} and {}", items[0], items[1]),
        _ => format!(
            "{}, and {}",
            items[..items.len() - 1].join(", "),
            items[items.len() - 1]
        ),
    }
}

fn split_list(text: &str) -> Vec<String> {
    if text.contains(", ") {
        let mut items: Vec<String> = text.split(", ").map(str::to_string).collect();
        if let Some(last) = items.last_mut() {
            if let Some(stripped) = last.strip_prefix("and ") {
                *last = stripped.to_string();
            }
        }
        items
    } else if let Some((a, b)) = text.split_once(" and ") {
        vec![a.to_string(), b.to_string()]
    } else {
        vec![text.to_string()]
    }
}
