//! Step checking: does a claimed reasoning step actually hold?
//!
//! A step arrives as a [`StepTriple`]: condition facts, a theorem, one
//! conclusion. Strict verification rebuilds the theorem application from
//! scratch: the conditions must already be established, they alone must
//! induce a binding under which the theorem's premises are satisfied, and
//! the claimed conclusion must be what the theorem instantiates to.
//! Binding search runs against a scratch state seeded only with the
//! conditions, so a step cannot lean on facts it never cited. Equation
//! conclusions are judged by the exact equation solver instead of text
//! matching, which accepts algebraically equivalent rewritings; solver
//! substitution steps have no binding at all and are judged entirely by
//! entailment from the committed equations.
//!
//! Fast verification asks much less: do the entities the conclusion talks
//! about exist in the figure? Points must be present, segments drawn
//! (directly, or as a stretch of a drawn collinear run), angle arms and
//! polygon sides drawn. It accepts anything strict accepts, and it is the
//! right check when the state was built from a picture rather than from
//! formal givens.
//!
//! [`tree_search`] drives both: a candidate source proposes step
//! sentences, each is translated back to a triple and verified, one valid
//! candidate is committed per iteration, and the whole episode is logged
//! in a deterministic, serializable [`History`].

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::deduce::{
    applications, instantiate_equation, instantiate_literal, DeduceError, State,
    SUBSTITUTION_NAME, SUBSTITUTION_STEP,
};
use crate::formal::{
    Equation, EntityKind, FormalError, Literal, MeasureKind, MeasureSymbol, PointRef, Registry,
    TheoremDef,
};
use crate::qa::templates::{TemplateError, TemplateSet};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("search config: {0}")]
    Config(String),
    #[error(transparent)]
    Formal(#[from] FormalError),
    #[error(transparent)]
    Deduce(#[from] DeduceError),
}

/// A fact as claimed by a step: either a literal or a measure equation.
#[derive(Debug, Clone, PartialEq)]
pub enum FactClaim {
    Literal(Literal),
    Equation(Equation<MeasureSymbol>),
}

impl FactClaim {
    /// Parses canonical fact text; anything with `=` is an equation.
    pub fn parse(registry: &Registry, text: &str) -> Result<FactClaim, FormalError> {
        if text.contains('=') {
            Ok(FactClaim::Equation(
                crate::formal::parse_equation(text)?.canonical(),
            ))
        } else {
            Ok(FactClaim::Literal(crate::formal::parse_literal(
                registry, text,
            )?))
        }
    }

    pub fn text(&self) -> String {
        match self {
            FactClaim::Literal(lit) => lit.text().to_string(),
            FactClaim::Equation(eq) => eq.to_string(),
        }
    }
}

/// One reasoning step in formal form.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTriple {
    pub conditions: Vec<FactClaim>,
    /// Theorem name or numeric id; `substitution` for solver steps.
    pub theorem: String,
    pub conclusion: FactClaim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Strict,
    Fast,
}

/// Why a step was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReasonCode {
    MissingCondition,
    UnknownTheorem,
    BindingFailure,
    ConclusionMismatch,
    MissingEntity,
    TranslationFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reason {
    pub code: ReasonCode,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyResult {
    pub valid: bool,
    pub mode: VerifyMode,
    /// Populated exactly when `valid` is false.
    pub reason: Option<Reason>,
}

impl VerifyResult {
    fn ok(mode: VerifyMode) -> Self {
        VerifyResult {
            valid: true,
            mode,
            reason: None,
        }
    }

    fn fail(mode: VerifyMode, code: ReasonCode, message: String) -> Self {
        VerifyResult {
            valid: false,
            mode,
            reason: Some(Reason { code, message }),
        }
    }
}

fn resolve_theorem<'r>(registry: &'r Registry, name: &str) -> Option<&'r TheoremDef> {
    if let Ok(id) = name.parse::<u32>() {
        registry.theorem_by_id(id)
    } else {
        registry.theorem_by_name(name)
    }
}

fn is_substitution(name: &str) -> bool {
    name == SUBSTITUTION_NAME || name == SUBSTITUTION_STEP.to_string()
}

/// Are two equations the same constraint up to algebra? Exact, via the
/// solver: committing one must make the other redundant.
fn equations_equivalent(a: &Equation<MeasureSymbol>, b: &Equation<MeasureSymbol>) -> bool {
    let mut solver = crate::deduce::EquationSolver::new();
    if solver.add(&a.clone().canonical(), 0).is_err() {
        return false;
    }
    solver.check(&b.clone().canonical()).is_some()
}

fn conclusion_matches(claimed: &FactClaim, instantiated: &FactClaim) -> bool {
    match (claimed, instantiated) {
        (FactClaim::Literal(a), FactClaim::Literal(b)) => a == b,
        (FactClaim::Equation(a), FactClaim::Equation(b)) => {
            a == b || equations_equivalent(a, b)
        }
        _ => false,
    }
}

/// Checks a step against formal state. Valid steps may be committed by the
/// caller; this function never mutates.
pub fn verify_strict(state: &State<'_>, triple: &StepTriple) -> VerifyResult {
    let mode = VerifyMode::Strict;
    let registry = state.registry();

    for condition in &triple.conditions {
        let present = match condition {
            FactClaim::Literal(lit) => state.literal_id(lit).is_some(),
            FactClaim::Equation(eq) => state.check_equation(eq).is_some(),
        };
        if !present {
            return VerifyResult::fail(
                mode,
                ReasonCode::MissingCondition,
                format!("condition `{}` is not established", condition.text()),
            );
        }
    }

    if is_substitution(&triple.theorem) {
        // Solver steps have no binding; the conclusion must follow from
        // the equations committed so far.
        return match &triple.conclusion {
            FactClaim::Equation(eq) if state.check_equation(eq).is_some() => {
                VerifyResult::ok(mode)
            }
            FactClaim::Equation(eq) => VerifyResult::fail(
                mode,
                ReasonCode::ConclusionMismatch,
                format!("`{eq}` does not follow from the committed equations"),
            ),
            FactClaim::Literal(lit) => VerifyResult::fail(
                mode,
                ReasonCode::ConclusionMismatch,
                format!("substitution cannot conclude the literal `{}`", lit.text()),
            ),
        };
    }

    let Some(theorem) = resolve_theorem(registry, &triple.theorem) else {
        return VerifyResult::fail(
            mode,
            ReasonCode::UnknownTheorem,
            format!("no theorem named `{}`", triple.theorem),
        );
    };

    // The binding must be induced by the cited conditions alone, so the
    // premises are matched against a scratch state holding only them.
    let mut scratch = State::new(registry);
    for condition in &triple.conditions {
        let landed = match condition {
            FactClaim::Literal(lit) => scratch.add_literal(lit.clone(), 0, None).map(|_| ()),
            FactClaim::Equation(eq) => scratch.add_equation(eq.clone(), 0, None).map(|_| ()),
        };
        if landed.is_err() || scratch.propagate(0).is_err() {
            return VerifyResult::fail(
                mode,
                ReasonCode::BindingFailure,
                format!("conditions are mutually inconsistent at `{}`", condition.text()),
            );
        }
    }

    let apps = applications(&scratch, theorem);
    if apps.is_empty() {
        return VerifyResult::fail(
            mode,
            ReasonCode::BindingFailure,
            format!(
                "the conditions do not satisfy the premises of `{}`",
                theorem.name
            ),
        );
    }

    for app in &apps {
        for tpl in &theorem.conclusions {
            let instantiated = match tpl {
                crate::formal::TplFact::Lit(lit) => {
                    match instantiate_literal(registry, lit, &app.binding) {
                        Ok(l) => FactClaim::Literal(l),
                        Err(_) => continue,
                    }
                }
                crate::formal::TplFact::Eq(eq) => {
                    match instantiate_equation(eq, &app.binding) {
                        Ok(e) => FactClaim::Equation(e.canonical()),
                        Err(_) => continue,
                    }
                }
            };
            if conclusion_matches(&triple.conclusion, &instantiated) {
                return VerifyResult::ok(mode);
            }
        }
    }
    VerifyResult::fail(
        mode,
        ReasonCode::ConclusionMismatch,
        format!(
            "`{}` is not a conclusion `{}` yields from these conditions",
            triple.conclusion.text(),
            theorem.name
        ),
    )
}

/// Maximal sets of mutually collinear points along drawn lines: each
/// drawn segment seeds a run, and a collinear middle point joins once
/// both of its outer points are in.
fn drawn_runs(state: &State<'_>) -> Vec<BTreeSet<PointRef>> {
    let triples: Vec<Vec<PointRef>> = state
        .facts_of_pred("Collinear")
        .iter()
        .map(|&id| state.fact(id).literal().expect("literal index").flat_points())
        .collect();
    let mut runs: Vec<BTreeSet<PointRef>> = Vec::new();
    for &id in state.facts_of_pred("Line") {
        let ends = state.fact(id).literal().expect("literal index").flat_points();
        let mut run: BTreeSet<PointRef> = ends.into_iter().collect();
        loop {
            let before = run.len();
            for triple in &triples {
                if run.contains(&triple[0]) && run.contains(&triple[2]) {
                    run.insert(triple[1].clone());
                }
            }
            if run.len() == before {
                break;
            }
        }
        runs.push(run);
    }
    runs
}

fn segment_drawn(runs: &[BTreeSet<PointRef>], a: &PointRef, b: &PointRef) -> bool {
    runs.iter().any(|run| run.contains(a) && run.contains(b))
}

/// Entities the conclusion mentions, most specific first: (kind, points).
fn conclusion_entities(
    registry: &Registry,
    claim: &FactClaim,
) -> Result<Vec<(EntityKind, Vec<PointRef>)>, FormalError> {
    let mut out = Vec::new();
    match claim {
        FactClaim::Equation(eq) => {
            for sym in eq.symbols() {
                let kind = match sym.kind() {
                    MeasureKind::Length => EntityKind::Segment,
                    MeasureKind::Angle => EntityKind::Angle,
                    MeasureKind::Area | MeasureKind::Perimeter => EntityKind::AnyPolygon,
                };
                out.push((kind, sym.points()));
            }
        }
        FactClaim::Literal(lit) => {
            let def = registry.predicate(lit.pred())?;
            for (slot, group) in def.slots().iter().zip(lit.args()) {
                out.push((slot.kind, group.clone()));
            }
        }
    }
    Ok(out)
}

/// Checks only that the conclusion's entities exist in the figure state.
pub fn verify_fast(state: &State<'_>, triple: &StepTriple) -> VerifyResult {
    let mode = VerifyMode::Fast;
    let entities = match conclusion_entities(state.registry(), &triple.conclusion) {
        Ok(e) => e,
        Err(e) => {
            return VerifyResult::fail(mode, ReasonCode::MissingEntity, e.to_string());
        }
    };

    let missing_point = entities
        .iter()
        .flat_map(|(_, pts)| pts)
        .find(|p| !state.points().contains(*p));
    if let Some(p) = missing_point {
        return VerifyResult::fail(
            mode,
            ReasonCode::MissingEntity,
            format!("point {} is not in the figure", p.name()),
        );
    }

    let runs = drawn_runs(state);
    let need_segment = |a: &PointRef, b: &PointRef| -> Option<String> {
        if segment_drawn(&runs, a, b) {
            None
        } else {
            Some(format!("{}{}", a.name(), b.name()))
        }
    };
    for (kind, points) in &entities {
        let missing = match kind {
            EntityKind::Point | EntityKind::Circle => None,
            EntityKind::Segment => need_segment(&points[0], &points[1]),
            EntityKind::Angle => need_segment(&points[1], &points[0])
                .or_else(|| need_segment(&points[1], &points[2])),
            EntityKind::Polygon(_) | EntityKind::AnyPolygon => (0..points.len())
                .find_map(|i| need_segment(&points[i], &points[(i + 1) % points.len()])),
        };
        if let Some(name) = missing {
            return VerifyResult::fail(
                mode,
                ReasonCode::MissingEntity,
                format!("segment {name} is not drawn in the figure"),
            );
        }
    }
    VerifyResult::ok(mode)
}

pub fn verify(state: &State<'_>, triple: &StepTriple, mode: VerifyMode) -> VerifyResult {
    match mode {
        VerifyMode::Strict => verify_strict(state, triple),
        VerifyMode::Fast => verify_fast(state, triple),
    }
}

/// Turns one step sentence back into a formal triple.
pub fn translate_step(
    registry: &Registry,
    templates: &TemplateSet,
    sentence: &str,
) -> Result<StepTriple, TemplateError> {
    templates.translate_step(registry, sentence)
}

/// Anything that can propose candidate step sentences. Implemented by the
/// gateway mocks and by live model bridges alike.
pub trait CandidateSource {
    fn propose(&mut self, prompt: &str, k: usize) -> Result<Vec<String>, CandidateError>;
}

/// A generation failure, already reduced to a printable message.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{0}")]
pub struct CandidateError(pub String);

/// Candidates equal to this marker signal that the proof is finished.
pub const TERMINAL_MARKER: &str = "<proof-complete>";

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Candidates requested per iteration.
    pub width: usize,
    pub max_iterations: usize,
    pub mode: VerifyMode,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            width: 4,
            max_iterations: 16,
            mode: VerifyMode::Strict,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptedStep {
    pub text: String,
    pub conditions: Vec<String>,
    pub theorem: String,
    pub conclusion: String,
    pub verdict: VerifyResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateLog {
    pub text: String,
    /// `valid`, `invalid:<code>`, or `terminal`.
    pub outcome: String,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationLog {
    pub candidates: Vec<CandidateLog>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "cause", content = "detail")]
pub enum Termination {
    Terminal,
    NoValidCandidates,
    MaxIterations,
    GeneratorError(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct History {
    pub accepted: Vec<AcceptedStep>,
    pub iterations: Vec<IterationLog>,
    pub termination: Termination,
}

impl History {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("history serializes")
    }
}

fn reason_tag(result: &VerifyResult) -> String {
    match &result.reason {
        None => "valid".to_string(),
        Some(r) => format!("invalid:{:?}", r.code),
    }
}

fn commit(state: &mut State<'_>, claim: &FactClaim, layer: usize) -> Result<(), DeduceError> {
    match claim {
        FactClaim::Literal(lit) => state.add_literal(lit.clone(), layer, None).map(|_| ()),
        FactClaim::Equation(eq) => state.add_equation(eq.clone(), layer, None).map(|_| ()),
    }
}

/// Step-level search: per iteration ask for `width` candidates, verify
/// them all, commit one valid pick at random, and extend the prompt with
/// it. Stops on the terminal marker, an iteration with no valid
/// candidate, the iteration cap, or a generator failure; the returned
/// history is complete up to that point either way.
pub fn tree_search(
    state: &mut State<'_>,
    templates: &TemplateSet,
    source: &mut dyn CandidateSource,
    problem: &str,
    config: &SearchConfig,
) -> Result<History, VerifyError> {
    if config.width == 0 {
        return Err(VerifyError::Config("width must be at least 1".into()));
    }
    if config.max_iterations == 0 {
        return Err(VerifyError::Config(
            "max_iterations must be at least 1".into(),
        ));
    }
    let registry = state.registry();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history = History {
        accepted: Vec::new(),
        iterations: Vec::new(),
        termination: Termination::MaxIterations,
    };
    let mut prompt = problem.to_string();

    for iteration in 0..config.max_iterations {
        let candidates = match source.propose(&prompt, config.width) {
            Ok(c) => c,
            Err(e) => {
                history.termination = Termination::GeneratorError(e.0);
                return Ok(history);
            }
        };

        let mut logs: Vec<CandidateLog> = Vec::new();
        let mut valid: Vec<(usize, StepTriple)> = Vec::new();
        let mut saw_terminal = false;
        for (idx, text) in candidates.iter().enumerate() {
            if text == TERMINAL_MARKER {
                saw_terminal = true;
                logs.push(CandidateLog {
                    text: text.clone(),
                    outcome: "terminal".to_string(),
                    selected: false,
                });
                continue;
            }
            let outcome = match translate_step(registry, templates, text) {
                Err(_) => format!("invalid:{:?}", ReasonCode::TranslationFailed),
                Ok(triple) => {
                    let result = verify(state, &triple, config.mode);
                    let tag = reason_tag(&result);
                    if result.valid {
                        valid.push((idx, triple));
                    }
                    tag
                }
            };
            logs.push(CandidateLog {
                text: text.clone(),
                outcome,
                selected: false,
            });
        }

        if valid.is_empty() {
            history.iterations.push(IterationLog { candidates: logs });
            history.termination = if saw_terminal {
                Termination::Terminal
            } else {
                Termination::NoValidCandidates
            };
            return Ok(history);
        }

        let pick = rng.gen_range(0..valid.len());
        let (chosen_idx, triple) = valid.swap_remove(pick);
        logs[chosen_idx].selected = true;
        let text = candidates[chosen_idx].clone();
        commit(state, &triple.conclusion, iteration + 1)?;
        history.iterations.push(IterationLog { candidates: logs });
        history.accepted.push(AcceptedStep {
            text: text.clone(),
            conditions: triple.conditions.iter().map(FactClaim::text).collect(),
            theorem: triple.theorem.clone(),
            conclusion: triple.conclusion.text(),
            verdict: VerifyResult::ok(config.mode),
        });
        prompt.push('\n');
        prompt.push_str(&text);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduce::{chase, ChaseOptions};
    use crate::formal::{builtin_registry, parse_equation, parse_literal};
    use crate::target::{build_path, score_targets};

    fn given_state() -> State<'static> {
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
        state
    }

    fn chased_state() -> State<'static> {
        let mut state = given_state();
        chase(&mut state, &ChaseOptions::default()).unwrap();
        state
    }

    fn claim(text: &str) -> FactClaim {
        FactClaim::parse(builtin_registry(), text).expect("claim parses")
    }

    fn triple(conditions: &[&str], theorem: &str, conclusion: &str) -> StepTriple {
        StepTriple {
            conditions: conditions.iter().map(|t| claim(t)).collect(),
            theorem: theorem.to_string(),
            conclusion: claim(conclusion),
        }
    }

    const MIDSEGMENT_PREMISES: [&str; 3] = [
        "IsMidsegmentOfTriangle(DE,ABC)",
        "IsMidpointOfLine(D,AB)",
        "IsMidpointOfLine(E,AC)",
    ];

    #[test]
    fn strict_accepts_a_grounded_application_by_name_or_id() {
        let state = chased_state();
        for theorem in ["midsegment_of_triangle_property_length", "2"] {
            let step = triple(
                &MIDSEGMENT_PREMISES,
                theorem,
                "LengthOfLine(DE) = LengthOfLine(BC)/2",
            );
            let result = verify_strict(&state, &step);
            assert!(result.valid, "{theorem}: {:?}", result.reason);
        }
    }

    #[test]
    fn strict_names_the_failure_it_finds() {
        let state = chased_state();

        let missing = triple(
            &["Parallelogram(ABCD)"],
            "parallelogram_property_opposite_angle_equal",
            "MeasureOfAngle(ABC) = MeasureOfAngle(CDA)",
        );
        let r = verify_strict(&state, &missing);
        assert_eq!(r.reason.unwrap().code, ReasonCode::MissingCondition);

        let unknown = triple(&[], "theorem_of_everything", "LengthOfLine(DE) = 4");
        let r = verify_strict(&state, &unknown);
        assert_eq!(r.reason.unwrap().code, ReasonCode::UnknownTheorem);

        let ungrounded = triple(
            &["Triangle(ABC)"],
            "midsegment_of_triangle_property_length",
            "LengthOfLine(DE) = LengthOfLine(BC)/2",
        );
        let r = verify_strict(&state, &ungrounded);
        assert_eq!(r.reason.unwrap().code, ReasonCode::BindingFailure);

        let overreach = triple(
            &MIDSEGMENT_PREMISES,
            "midsegment_of_triangle_property_length",
            "LengthOfLine(DE) = LengthOfLine(BC)/3",
        );
        let r = verify_strict(&state, &overreach);
        assert_eq!(r.reason.unwrap().code, ReasonCode::ConclusionMismatch);
    }

    #[test]
    fn strict_judges_substitutions_by_entailment() {
        let state = chased_state();
        let good = triple(
            &["LengthOfLine(BC) = 8"],
            SUBSTITUTION_NAME,
            "LengthOfLine(DE) = 4",
        );
        assert!(verify_strict(&state, &good).valid);

        let bad = triple(
            &["LengthOfLine(BC) = 8"],
            SUBSTITUTION_NAME,
            "LengthOfLine(DE) = 5",
        );
        let r = verify_strict(&state, &bad);
        assert_eq!(r.reason.unwrap().code, ReasonCode::ConclusionMismatch);

        let literal = triple(&[], "0", "Triangle(ABC)");
        let r = verify_strict(&state, &literal);
        assert_eq!(r.reason.unwrap().code, ReasonCode::ConclusionMismatch);
    }

    #[test]
    fn fast_wants_the_figure_to_carry_the_entities() {
        let state = chased_state();

        // DE is drawn outright, AD is a stretch of the drawn run A-D-B.
        for conclusion in ["LengthOfLine(DE) = 4", "LengthOfLine(AD) = 1"] {
            let step = triple(&[], SUBSTITUTION_NAME, conclusion);
            let r = verify_fast(&state, &step);
            assert!(r.valid, "{conclusion}: {:?}", r.reason);
        }

        let ghost_point = triple(&[], SUBSTITUTION_NAME, "LengthOfLine(QZ) = 4");
        let r = verify_fast(&state, &ghost_point);
        let reason = r.reason.unwrap();
        assert_eq!(reason.code, ReasonCode::MissingEntity);
        assert!(reason.message.contains("point"), "{}", reason.message);

        let ghost_segment = triple(&[], SUBSTITUTION_NAME, "LengthOfLine(BE) = 4");
        let r = verify_fast(&state, &ghost_segment);
        let reason = r.reason.unwrap();
        assert_eq!(reason.code, ReasonCode::MissingEntity);
        assert!(reason.message.contains("segment BE"), "{}", reason.message);
    }

    #[test]
    fn fast_accepts_every_step_strict_accepts() {
        let state = chased_state();
        let registry = builtin_registry();
        let templates = TemplateSet::builtin();
        let mut checked = 0;
        for score in score_targets(&state) {
            let path = build_path(&state, score.fact).unwrap();
            for step in &path.steps {
                let triple = templates.triple_of(registry, step).unwrap();
                let strict = verify_strict(&state, &triple);
                assert!(strict.valid, "{}: {:?}", step.conclusion, strict.reason);
                let fast = verify_fast(&state, &triple);
                assert!(fast.valid, "{}: {:?}", step.conclusion, fast.reason);
                checked += 1;
            }
        }
        assert!(checked > 10, "only {checked} steps checked");
    }

    /// Replays scripted candidate rounds; once the script runs out, it
    /// signals that the proof is complete.
    struct Script {
        rounds: Vec<Vec<String>>,
        cursor: usize,
    }

    impl Script {
        fn new(rounds: Vec<Vec<String>>) -> Self {
            Script { rounds, cursor: 0 }
        }
    }

    impl CandidateSource for Script {
        fn propose(&mut self, _prompt: &str, _k: usize) -> Result<Vec<String>, CandidateError> {
            let round = self
                .rounds
                .get(self.cursor)
                .cloned()
                .unwrap_or_else(|| vec![TERMINAL_MARKER.to_string()]);
            self.cursor += 1;
            Ok(round)
        }
    }

    fn true_path_sentences() -> Vec<String> {
        let state = chased_state();
        let registry = builtin_registry();
        let templates = TemplateSet::builtin();
        let target = state.id_of("LengthOfLine(DE) = 4").unwrap();
        let path = build_path(&state, target).unwrap();
        path.steps
            .iter()
            .map(|s| templates.render_step(registry, s).unwrap())
            .collect()
    }

    #[test]
    fn a_scripted_true_path_is_committed_step_by_step() {
        let sentences = true_path_sentences();
        let rounds = sentences.iter().map(|s| vec![s.clone()]).collect();
        let mut state = given_state();
        let history = tree_search(
            &mut state,
            TemplateSet::builtin(),
            &mut Script::new(rounds),
            "In the figure, find DE.",
            &SearchConfig::default(),
        )
        .unwrap();

        assert_eq!(history.termination, Termination::Terminal);
        let accepted: Vec<&str> = history.accepted.iter().map(|a| a.text.as_str()).collect();
        assert_eq!(accepted, sentences.iter().map(String::as_str).collect::<Vec<_>>());
        // The committed steps leave the target entailed in the state.
        assert!(state
            .check_equation(&parse_equation("LengthOfLine(DE) = 4").unwrap())
            .is_some());
    }

    #[test]
    fn an_all_invalid_round_ends_with_an_empty_history() {
        let mut state = given_state();
        let history = tree_search(
            &mut state,
            TemplateSet::builtin(),
            &mut Script::new(vec![vec![
                "Therefore the answer is 7.".to_string(),
                "Since Q is the midpoint of AB, AQ = AB/2.".to_string(),
            ]]),
            "In the figure, find DE.",
            &SearchConfig::default(),
        )
        .unwrap();
        assert_eq!(history.termination, Termination::NoValidCandidates);
        assert!(history.accepted.is_empty());
        assert_eq!(history.iterations.len(), 1);
        let outcomes: Vec<&str> = history.iterations[0]
            .candidates
            .iter()
            .map(|c| c.outcome.as_str())
            .collect();
        assert_eq!(
            outcomes,
            ["invalid:TranslationFailed", "invalid:MissingCondition"]
        );
    }

    #[test]
    fn mixed_rounds_only_ever_select_valid_candidates() {
        let sentences = true_path_sentences();
        let garbage = "Therefore the answer is 7.".to_string();
        let false_claim = "Since E is the midpoint of AB, AE = AB/2.".to_string();
        let rounds = vec![
            vec![garbage.clone(), sentences[0].clone(), false_claim.clone()],
            vec![false_claim.clone(), sentences[1].clone()],
            vec![sentences[2].clone(), garbage],
        ];
        let mut state = given_state();
        let history = tree_search(
            &mut state,
            TemplateSet::builtin(),
            &mut Script::new(rounds),
            "In the figure, find DE.",
            &SearchConfig::default(),
        )
        .unwrap();

        assert_eq!(history.termination, Termination::Terminal);
        assert_eq!(history.accepted.len(), 3);
        for iteration in &history.iterations {
            for candidate in &iteration.candidates {
                if candidate.selected {
                    assert_eq!(candidate.outcome, "valid", "{}", candidate.text);
                }
            }
        }
    }

    #[test]
    fn equally_valid_candidates_are_picked_by_seed_alone() {
        let rounds = || {
            vec![vec![
                "Since D is the midpoint of AB, AD = AB/2.".to_string(),
                "Since D is the midpoint of AB, DB = AB/2.".to_string(),
            ]]
        };
        let run = |seed: u64| {
            let mut state = given_state();
            tree_search(
                &mut state,
                TemplateSet::builtin(),
                &mut Script::new(rounds()),
                "In the figure, find AD.",
                &SearchConfig {
                    seed,
                    ..SearchConfig::default()
                },
            )
            .unwrap()
            .to_json()
        };
        assert_eq!(run(11), run(11));
        assert_eq!(run(12), run(12));
    }

    #[test]
    fn generator_failures_end_the_episode_not_the_program() {
        struct Failing;
        impl CandidateSource for Failing {
            fn propose(&mut self, _: &str, _: usize) -> Result<Vec<String>, CandidateError> {
                Err(CandidateError("gateway unreachable".into()))
            }
        }
        let mut state = given_state();
        let history = tree_search(
            &mut state,
            TemplateSet::builtin(),
            &mut Failing,
            "In the figure, find DE.",
            &SearchConfig::default(),
        )
        .unwrap();
        assert_eq!(
            history.termination,
            Termination::GeneratorError("gateway unreachable".into())
        );
        assert!(history.accepted.is_empty());
    }

    #[test]
    fn degenerate_configs_are_rejected_up_front() {
        let mut state = given_state();
        for config in [
            SearchConfig {
                width: 0,
                ..SearchConfig::default()
            },
            SearchConfig {
                max_iterations: 0,
                ..SearchConfig::default()
            },
        ] {
            let err = tree_search(
                &mut state,
                TemplateSet::builtin(),
                &mut Script::new(Vec::new()),
                "Find DE.",
                &config,
            )
            .unwrap_err();
            assert!(matches!(err, VerifyError::Config(_)), "{err}");
        }
    }
}
