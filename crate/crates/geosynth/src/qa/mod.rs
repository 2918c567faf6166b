//! Question-answer assembly over reasoning paths.
//!
//! A chased diagram plus a traced path is still an internal artifact; this
//! module turns it into training records. Each record pairs the question
//! variants (figure-described, target-only, proof-style) with two parallel
//! solutions: the formal steps, which are authoritative and re-verifiable,
//! and the natural-language steps, which are presentation. The templates in
//! [`templates`] render the latter; an optional gateway pass in
//! [`transcribe`] polishes them, and any polish that changes the step count
//! is rejected so the two solutions never drift apart structurally.
//!
//! Dataset assembly ends with [`dedup_and_cap`], which removes exact
//! duplicates and holds every theorem-sequence signature under a budget,
//! and [`export`], the single serialization point that lays out the JSONL
//! file, the image tree, and a manifest of histogram stats. Everything
//! here is deterministic given the master seed and a mock gateway, so a
//! re-run reproduces the export byte for byte.

pub mod notation;
pub mod templates;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::deduce::{chase, ChaseOptions, DeduceError, State};
use crate::formal::{parse_equation, Expr, FormalError, Registry};
use crate::gateway::{CompletionRequest, GatewayError, TextCompleter};
use crate::plot::{self, PlotError, PlotOptions};
use crate::target::{paths_for, ReasoningPath, TargetError, TargetFilter, TargetKind};
use crate::verify::FactClaim;
use templates::{join_list, TemplateError, TemplateSet};

#[derive(Debug, thiserror::Error)]
pub enum QaError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Formal(#[from] FormalError),
    #[error(transparent)]
    Deduce(#[from] DeduceError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("transcription returned {got} step(s) for {expected} draft(s)")]
    StepCount { expected: usize, got: usize },
    #[error("target `{0}` is not a measure-equals-value fact")]
    TargetShape(String),
    #[error("annotation file: {0}")]
    Annotation(String),
    #[error("no image named `{0}` was provided for export")]
    MissingImage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// One formal reasoning step in its serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormalStep {
    pub conditions: Vec<String>,
    pub theorem: TheoremRef,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRef {
    pub id: u32,
    pub name: String,
    /// Template letter to point name, e.g. {"a": "B", "b": "C"}.
    pub binding: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAMeta {
    /// Theorem ids of the solution steps joined with `-`; substitution
    /// steps appear as 0.
    pub signature: String,
    pub depth: usize,
    pub source: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAPair {
    pub id: String,
    /// Path of the rendered diagram relative to the export root; empty
    /// when the record was expanded from annotations without a figure.
    pub image: String,
    pub question: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure_description: Option<String>,
    pub solution_nl: Vec<String>,
    pub solution_formal: Vec<FormalStep>,
    pub answer: String,
    pub meta: QAMeta,
}

/// Question phrasings a reasoning path can be packaged as. Numeric targets
/// take the two find-style forms; relation targets take the proof form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuestionMode {
    /// "In the figure, <givens>. Find <target>."
    Described,
    /// "Find <target>."
    Bare,
    /// "In the figure, <givens>. Prove that <target>."
    Prove,
}

pub const ALL_MODES: [QuestionMode; 3] = [
    QuestionMode::Described,
    QuestionMode::Bare,
    QuestionMode::Prove,
];

/// Everything about the surrounding diagram a path does not carry itself.
pub struct PathContext<'a> {
    pub image: &'a str,
    /// Canonical texts of the layer-0 facts, in fact order.
    pub figure: &'a [String],
    pub source: &'a str,
    pub seed: u64,
    /// Index of this path among the diagram's selected targets.
    pub index: usize,
}

/// Renders every step of the path as one English sentence.
pub fn step_texts(
    registry: &Registry,
    templates: &TemplateSet,
    path: &ReasoningPath,
) -> Result<Vec<String>, TemplateError> {
    path.steps
        .iter()
        .map(|s| templates.render_step(registry, s))
        .collect()
}

/// The path's steps in their serialized formal form.
pub fn formal_steps(path: &ReasoningPath) -> Vec<FormalStep> {
    path.steps
        .iter()
        .map(|s| FormalStep {
            conditions: s.conditions.clone(),
            theorem: TheoremRef {
                id: s.theorem,
                name: s.name.clone(),
                binding: s
                    .binding
                    .iter()
                    .map(|(c, p)| (c.to_string(), p.name().to_string()))
                    .collect(),
            },
            conclusion: s.conclusion.clone(),
        })
        .collect()
}

pub fn signature_of(path: &ReasoningPath) -> String {
    path.theorem_sequence
        .iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

/// The short name a question asks for: "DE", "angle ABC", "the area of ABC".
fn asked_measure(path: &ReasoningPath) -> Result<String, QaError> {
    let eq = parse_equation(&path.target)?;
    let Expr::Sym(sym) = &eq.lhs else {
        return Err(QaError::TargetShape(path.target.clone()));
    };
    let text = notation::measure_text(sym);
    if text.starts_with("area of") || text.starts_with("perimeter of") {
        Ok(format!("the {text}"))
    } else {
        Ok(text)
    }
}

/// One clause per figure fact, joined into a single list.
fn describe_figure(
    registry: &Registry,
    templates: &TemplateSet,
    figure: &[String],
) -> Result<String, QaError> {
    let mut clauses = Vec::with_capacity(figure.len());
    for text in figure {
        let claim = FactClaim::parse(registry, text)?;
        clauses.push(templates.render_claim(registry, &claim)?);
    }
    Ok(join_list(&clauses))
}

/// Packages one reasoning path as question records, one per applicable
/// mode. The natural-language solution is taken as given so one
/// transcription pass serves every variant.
pub fn make_questions(
    registry: &Registry,
    templates: &TemplateSet,
    path: &ReasoningPath,
    solution_nl: &[String],
    ctx: &PathContext<'_>,
    modes: &[QuestionMode],
) -> Result<Vec<QAPair>, QaError> {
    let formal = formal_steps(path);
    if solution_nl.len() != formal.len() {
        return Err(QaError::StepCount {
            expected: formal.len(),
            got: solution_nl.len(),
        });
    }

    let mut described = None;
    let wanted = |mode: QuestionMode| modes.contains(&mode);
    let mut variants: Vec<(char, String, Option<String>, String)> = Vec::new();
    match path.kind {
        TargetKind::Numeric => {
            let asked = asked_measure(path)?;
            if wanted(QuestionMode::Described) && !ctx.figure.is_empty() {
                let desc = describe_figure(registry, templates, ctx.figure)?;
                let question = format!("In the figure, {desc}. Find {asked}.");
                described = Some(format!("{desc}."));
                variants.push(('d', question, described.clone(), path.answer.text().to_string()));
            }
            if wanted(QuestionMode::Bare) {
                variants.push((
                    'b',
                    format!("Find {asked}."),
                    None,
                    path.answer.text().to_string(),
                ));
            }
        }
        TargetKind::Relation => {
            if wanted(QuestionMode::Prove) {
                let claim = FactClaim::parse(registry, &path.target)?;
                let phrase = templates.render_claim(registry, &claim)?;
                let question = if ctx.figure.is_empty() {
                    format!("Prove that {phrase}.")
                } else {
                    let desc = describe_figure(registry, templates, ctx.figure)?;
                    described = Some(format!("{desc}."));
                    format!("In the figure, {desc}. Prove that {phrase}.")
                };
                variants.push(('p', question, described.clone(), path.target.clone()));
            }
        }
        // Formula targets are never selected; nothing sensible to ask.
        TargetKind::Formula => {}
    }

    let signature = signature_of(path);
    Ok(variants
        .into_iter()
        .map(|(tag, question, figure_description, answer)| QAPair {
            id: format!("{}-{:010}-{:02}{}", ctx.source, ctx.seed, ctx.index, tag),
            image: ctx.image.to_string(),
            question,
            figure_description,
            solution_nl: solution_nl.to_vec(),
            solution_formal: formal.clone(),
            answer,
            meta: QAMeta {
                signature: signature.clone(),
                depth: path.depth,
                source: ctx.source.to_string(),
                seed: ctx.seed,
            },
        })
        .collect())
}

const TRANSCRIBE_SYSTEM: &str = "You polish geometry proof steps. Rewrite each \
line in fluent prose, keep every point name, number, and measure unchanged, \
and reply with exactly one line per input line, in the same order, with no \
extra text.";

const TRANSCRIBE_EXEMPLAR_USER: &str = "Since M is the midpoint of AB, AM = AB/2.\n\
Substituting AB = 10, AM = 10/2 = 5.";

const TRANSCRIBE_EXEMPLAR_REPLY: &str = "Because M is the midpoint of segment AB, \
the length AM is half of AB.\n\
Plugging in AB = 10 gives AM = 10/2 = 5.";

/// Polishes draft step texts through a gateway, one line in, one line out.
/// A reply whose line count differs from the drafts is structurally wrong
/// and rejected here, before it can enter any dataset.
pub fn transcribe(
    drafts: &[String],
    completer: &dyn TextCompleter,
) -> Result<Vec<String>, QaError> {
    if drafts.is_empty() {
        return Ok(Vec::new());
    }
    let request = CompletionRequest {
        system: TRANSCRIBE_SYSTEM.to_string(),
        exemplar: Some((
            TRANSCRIBE_EXEMPLAR_USER.to_string(),
            TRANSCRIBE_EXEMPLAR_REPLY.to_string(),
        )),
        user: drafts.join("\n"),
    };
    let response = completer.complete_text(&request)?;
    let lines: Vec<String> = response
        .text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if lines.len() != drafts.len() {
        return Err(QaError::StepCount {
            expected: drafts.len(),
            got: lines.len(),
        });
    }
    Ok(lines)
}

/// Transcription with the identity fallback: no gateway, or any gateway
/// failure, leaves the drafts untouched.
pub fn transcribe_or_identity(
    drafts: &[String],
    completer: Option<&dyn TextCompleter>,
) -> Vec<String> {
    match completer {
        None => drafts.to_vec(),
        Some(c) => transcribe(drafts, c).unwrap_or_else(|_| drafts.to_vec()),
    }
}

/// Removes exact duplicates and caps each theorem-sequence signature.
/// Records are kept earliest-first by (seed, id), and the output stays in
/// that order, so the same multiset of inputs always shrinks to the same
/// sequence.
pub fn dedup_and_cap(mut pairs: Vec<QAPair>, cap: usize) -> Vec<QAPair> {
    let cap = cap.max(1);
    pairs.sort_by(|a, b| (a.meta.seed, &a.id).cmp(&(b.meta.seed, &b.id)));
    let mut seen: BTreeSet<(String, String, String)> = BTreeSet::new();
    let mut per_signature: BTreeMap<String, usize> = BTreeMap::new();
    let mut kept = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let key = (
            pair.question.clone(),
            pair.answer.clone(),
            pair.image.clone(),
        );
        if !seen.insert(key) {
            continue;
        }
        let count = per_signature.entry(pair.meta.signature.clone()).or_insert(0);
        if *count >= cap {
            continue;
        }
        *count += 1;
        kept.push(pair);
    }
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub count: usize,
    /// Records per theorem-sequence signature.
    pub signatures: BTreeMap<String, usize>,
    /// Records per solution step count.
    pub step_counts: BTreeMap<usize, usize>,
    /// Records per source (synth, expand).
    pub sources: BTreeMap<String, usize>,
}

pub fn manifest_of(pairs: &[QAPair]) -> Manifest {
    let mut signatures: BTreeMap<String, usize> = BTreeMap::new();
    let mut step_counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut sources: BTreeMap<String, usize> = BTreeMap::new();
    for pair in pairs {
        *signatures.entry(pair.meta.signature.clone()).or_insert(0) += 1;
        *step_counts.entry(pair.solution_formal.len()).or_insert(0) += 1;
        *sources.entry(pair.meta.source.clone()).or_insert(0) += 1;
    }
    Manifest {
        count: pairs.len(),
        signatures,
        step_counts,
        sources,
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), QaError> {
    std::fs::write(path, bytes).map_err(|source| QaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn make_dir(path: &Path) -> Result<(), QaError> {
    std::fs::create_dir_all(path).map_err(|source| QaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Lays out the dataset on disk: `data.jsonl` with one record per line,
/// every referenced image under the out directory, and `manifest.json`.
/// The pair order is preserved, so exporting the same pairs twice writes
/// identical bytes.
pub fn export(
    pairs: &[QAPair],
    images: &BTreeMap<String, String>,
    out_dir: &Path,
) -> Result<Manifest, QaError> {
    make_dir(out_dir)?;

    let mut jsonl = String::new();
    for pair in pairs {
        jsonl.push_str(&serde_json::to_string(pair).expect("QAPair serializes"));
        jsonl.push('\n');
    }
    write_bytes(&out_dir.join("data.jsonl"), jsonl.as_bytes())?;

    let referenced: BTreeSet<&str> = pairs
        .iter()
        .map(|p| p.image.as_str())
        .filter(|i| !i.is_empty())
        .collect();
    for name in referenced {
        let svg = images
            .get(name)
            .ok_or_else(|| QaError::MissingImage(name.to_string()))?;
        let path = out_dir.join(name);
        if let Some(parent) = path.parent() {
            make_dir(parent)?;
        }
        write_bytes(&path, svg.as_bytes())?;
    }

    let manifest = manifest_of(pairs);
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    write_bytes(&out_dir.join("manifest.json"), body.as_bytes())?;
    Ok(manifest)
}

/// Builds a layer-0 state from canonical fact texts, the same syntax the
/// dataset stores givens in.
pub fn seed_state<'r>(registry: &'r Registry, givens: &[String]) -> Result<State<'r>, QaError> {
    let mut state = State::new(registry);
    for text in givens {
        match FactClaim::parse(registry, text)? {
            FactClaim::Literal(lit) => {
                state.add_literal(lit, 0, None)?;
            }
            FactClaim::Equation(eq) => {
                state.add_equation(eq, 0, None)?;
            }
        }
    }
    Ok(state)
}

/// One problem in an external annotation file: givens in canonical fact
/// syntax, no diagram.
#[derive(Debug, Clone, Deserialize)]
pub struct ExpandProblem {
    #[serde(default)]
    pub id: Option<String>,
    pub givens: Vec<String>,
}

pub fn parse_expand_file(source: &str) -> Result<Vec<ExpandProblem>, QaError> {
    serde_json::from_str(source)
        .map_err(|e| QaError::Annotation(format!("expected a JSON array of problems: {e}")))
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub diagrams: u64,
    pub seed: u64,
    pub plot: PlotOptions,
    pub targets: TargetFilter,
    pub cap: usize,
    pub modes: Vec<QuestionMode>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            diagrams: 100,
            seed: 0,
            plot: PlotOptions::default(),
            targets: TargetFilter::default(),
            cap: 400,
            modes: ALL_MODES.to_vec(),
        }
    }
}

/// A finished synthesis run: capped records, the images they reference,
/// and the yield counters behind them.
pub struct SynthReport {
    pub pairs: Vec<QAPair>,
    /// Image path relative to the export root, to SVG text.
    pub images: BTreeMap<String, String>,
    pub diagrams_requested: u64,
    pub diagrams_plotted: u64,
    pub paths_built: usize,
}

/// The full forward pipeline: seed by seed, plot a diagram, saturate it,
/// pick targets, trace paths, and package question records. Seeds whose
/// placement or target selection comes up empty are counted and skipped;
/// they are yield loss, not errors.
pub fn synthesize_dataset(
    registry: &Registry,
    templates: &TemplateSet,
    options: &SynthOptions,
    transcriber: Option<&dyn TextCompleter>,
) -> Result<SynthReport, QaError> {
    let mut pairs = Vec::new();
    let mut images = BTreeMap::new();
    let mut plotted = 0u64;
    let mut paths_built = 0usize;

    for i in 0..options.diagrams {
        let seed = options.seed.wrapping_add(i);
        let diagram = match plot::synthesize(registry, seed, &options.plot) {
            Ok(d) => d,
            Err(PlotError::Exhausted { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        plotted += 1;
        let svg = diagram.svg();
        let mut state = diagram.state;
        chase(&mut state, &ChaseOptions::default())?;

        let figure: Vec<String> = state
            .facts()
            .iter()
            .filter(|f| f.is_given())
            .map(|f| f.text().to_string())
            .collect();
        let image_ref = format!("images/{seed:010}.svg");

        let paths = match paths_for(&state, &options.targets, seed) {
            Ok(paths) => paths,
            Err(TargetError::NoEligibleTarget) => continue,
            Err(e) => return Err(e.into()),
        };

        let mut referenced = false;
        for (index, (_score, path)) in paths.iter().enumerate() {
            let drafts = step_texts(registry, templates, path)?;
            let nl = transcribe_or_identity(&drafts, transcriber);
            let ctx = PathContext {
                image: &image_ref,
                figure: &figure,
                source: "synth",
                seed,
                index,
            };
            let records = make_questions(registry, templates, path, &nl, &ctx, &options.modes)?;
            if !records.is_empty() {
                referenced = true;
                paths_built += 1;
            }
            pairs.extend(records);
        }
        if referenced {
            images.insert(image_ref, svg);
        }
    }

    let pairs = dedup_and_cap(pairs, options.cap);
    let still_referenced: BTreeSet<&str> = pairs.iter().map(|p| p.image.as_str()).collect();
    images.retain(|name, _| still_referenced.contains(name.as_str()));

    Ok(SynthReport {
        pairs,
        images,
        diagrams_requested: options.diagrams,
        diagrams_plotted: plotted,
        paths_built,
    })
}

/// The expand pipeline: records from an existing annotation file, no new
/// diagrams. Problems whose givens derive nothing eligible are skipped.
pub fn expand_dataset(
    registry: &Registry,
    templates: &TemplateSet,
    problems: &[ExpandProblem],
    filter: &TargetFilter,
    cap: usize,
    transcriber: Option<&dyn TextCompleter>,
) -> Result<Vec<QAPair>, QaError> {
    let mut pairs = Vec::new();
    for (i, problem) in problems.iter().enumerate() {
        let label = problem
            .id
            .clone()
            .unwrap_or_else(|| format!("problem {i}"));
        let wrap = |e: QaError| QaError::Annotation(format!("{label}: {e}"));

        let mut state = seed_state(registry, &problem.givens).map_err(wrap)?;
        chase(&mut state, &ChaseOptions::default()).map_err(|e| wrap(e.into()))?;
        let figure: Vec<String> = state
            .facts()
            .iter()
            .filter(|f| f.is_given())
            .map(|f| f.text().to_string())
            .collect();

        let seed = i as u64;
        let paths = match paths_for(&state, filter, seed) {
            Ok(paths) => paths,
            Err(TargetError::NoEligibleTarget) => continue,
            Err(e) => return Err(wrap(e.into())),
        };
        for (index, (_score, path)) in paths.iter().enumerate() {
            let drafts = step_texts(registry, templates, path)?;
            let nl = transcribe_or_identity(&drafts, transcriber);
            let ctx = PathContext {
                image: "",
                figure: &figure,
                source: "expand",
                seed,
                index,
            };
            pairs.extend(make_questions(registry, templates, path, &nl, &ctx, &ALL_MODES)?);
        }
    }
    Ok(dedup_and_cap(pairs, cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::builtin_registry;
    use crate::gateway::{EchoMock, ScriptedMock};
    use crate::target::build_path;
    use crate::verify::{verify_strict, StepTriple, VerifyMode};

    fn midsegment_state() -> State<'static> {
        let registry = builtin_registry();
        let givens = [
            "Triangle(ABC)",
            "IsMidpointOfLine(D,AB)",
            "IsMidpointOfLine(E,AC)",
            "Line(DE)",
            "LengthOfLine(BC) = 8",
        ]
        .map(String::from);
        let mut state = seed_state(registry, &givens).unwrap();
        chase(&mut state, &ChaseOptions::default()).unwrap();
        state
    }

    fn figure_of(state: &State<'_>) -> Vec<String> {
        state
            .facts()
            .iter()
            .filter(|f| f.is_given())
            .map(|f| f.text().to_string())
            .collect()
    }

    #[test]
    fn numeric_targets_get_described_and_bare_questions() {
        let registry = builtin_registry();
        let templates = TemplateSet::builtin();
        let state = midsegment_state();
        let target = state.id_of("LengthOfLine(DE) = 4").expect("DE derived");
        let path = build_path(&state, target).unwrap();

        let figure = figure_of(&state);
        let nl = step_texts(registry, templates, &path).unwrap();
        let ctx = PathContext {
            image: "images/0000000007.svg",
            figure: &figure,
            source: "synth",
            seed: 7,
            index: 0,
        };
        let pairs =
            make_questions(registry, templates, &path, &nl, &ctx, &ALL_MODES).unwrap();

        assert_eq!(pairs.len(), 2);
        let described = &pairs[0];
        let bare = &pairs[1];
        assert!(described.question.starts_with("In the figure, "));
        assert!(described.question.ends_with(". Find DE."));
        assert!(described
            .figure_description
            .as_deref()
            .unwrap()
            .contains("D is the midpoint of AB"));
        assert_eq!(bare.question, "Find DE.");
        assert_eq!(bare.figure_description, None);
        for pair in pairs.iter() {
            assert_eq!(pair.answer, "4");
            assert_eq!(pair.solution_nl.len(), pair.solution_formal.len());
            assert_eq!(pair.meta.signature, signature_of(&path));
            assert_eq!(pair.image, "images/0000000007.svg");
        }
        assert_ne!(described.id, bare.id);

        let no_modes =
            make_questions(registry, templates, &path, &nl, &ctx, &[]).unwrap();
        assert!(no_modes.is_empty());
    }

    #[test]
    fn relation_targets_get_a_proof_question() {
        let registry = builtin_registry();
        let templates = TemplateSet::builtin();
        let state = midsegment_state();
        let target = state
            .id_of("IsMidsegmentOfTriangle(DE,ABC)")
            .expect("midsegment derived");
        let path = build_path(&state, target).unwrap();

        let figure = figure_of(&state);
        let nl = step_texts(registry, templates, &path).unwrap();
        let ctx = PathContext {
            image: "images/0000000007.svg",
            figure: &figure,
            source: "synth",
            seed: 7,
            index: 1,
        };
        let pairs =
            make_questions(registry, templates, &path, &nl, &ctx, &ALL_MODES).unwrap();

        assert_eq!(pairs.len(), 1);
        let pair = &pairs[0];
        assert!(pair
            .question
            .ends_with("Prove that DE is a midsegment of triangle ABC."));
        assert_eq!(pair.answer, "IsMidsegmentOfTriangle(DE,ABC)");
        assert_eq!(pair.meta.depth, path.depth);
    }

    #[test]
    fn every_packaged_formal_step_verifies_strictly() {
        let registry = builtin_registry();
        let templates = TemplateSet::builtin();
        let state = midsegment_state();
        let target = state.id_of("LengthOfLine(DE) = 4").unwrap();
        let path = build_path(&state, target).unwrap();
        let figure = figure_of(&state);
        let nl = step_texts(registry, templates, &path).unwrap();
        let ctx = PathContext {
            image: "x.svg",
            figure: &figure,
            source: "synth",
            seed: 1,
            index: 0,
        };
        let pairs =
            make_questions(registry, templates, &path, &nl, &ctx, &ALL_MODES).unwrap();
        for pair in pairs {
            for step in &pair.solution_formal {
                let triple = StepTriple {
                    conditions: step
                        .conditions
                        .iter()
                        .map(|c| FactClaim::parse(registry, c).unwrap())
                        .collect(),
                    theorem: step.theorem.name.clone(),
                    conclusion: FactClaim::parse(registry, &step.conclusion).unwrap(),
                };
                let verdict = verify_strict(&state, &triple);
                assert!(verdict.valid, "step failed: {:?}", verdict.reason);
                assert_eq!(verdict.mode, VerifyMode::Strict);
            }
        }
    }

    #[test]
    fn transcription_keeps_arity_or_falls_back() {
        let drafts = vec![
            "Since M is the midpoint of AB, AM = AB/2.".to_string(),
            "Substituting AB = 10, AM = 10/2 = 5.".to_string(),
        ];

        let echoed = transcribe(&drafts, &EchoMock).unwrap();
        assert_eq!(echoed, drafts);

        let rewritten = ScriptedMock::from_entries(vec![
            "M bisects AB, so AM = AB/2.\nWith AB = 10, AM = 5.".to_string(),
        ]);
        let polished = transcribe(&drafts, &rewritten).unwrap();
        assert_eq!(polished.len(), drafts.len());
        assert_ne!(polished, drafts);

        let truncating =
            ScriptedMock::from_entries(vec!["one line only".to_string()]);
        match transcribe(&drafts, &truncating) {
            Err(QaError::StepCount { expected: 2, got: 1 }) => {}
            other => panic!("expected a step-count rejection, got {other:?}"),
        }
        let fallen_back = transcribe_or_identity(
            &drafts,
            Some(&ScriptedMock::from_entries(vec!["one line".to_string()])),
        );
        assert_eq!(fallen_back, drafts);
        assert_eq!(transcribe_or_identity(&drafts, None), drafts);
    }

    fn stub_pair(seed: u64, tag: &str, signature: &str, question: &str) -> QAPair {
        QAPair {
            id: format!("synth-{seed:010}-{tag}"),
            image: format!("images/{seed:010}.svg"),
            question: question.to_string(),
            figure_description: None,
            solution_nl: vec!["step".to_string()],
            solution_formal: vec![FormalStep {
                conditions: vec![],
                theorem: TheoremRef {
                    id: 4,
                    name: "midpoint_length_half".to_string(),
                    binding: BTreeMap::new(),
                },
                conclusion: "LengthOfLine(AM) = 5".to_string(),
            }],
            answer: "5".to_string(),
            meta: QAMeta {
                signature: signature.to_string(),
                depth: 1,
                source: "synth".to_string(),
                seed,
            },
        }
    }

    #[test]
    fn dedup_and_cap_holds_every_signature_under_budget() {
        let mut pairs = Vec::new();
        for seed in 0..5 {
            pairs.push(stub_pair(seed, "00b", "4-0", &format!("Find q{seed}.")));
        }
        pairs.push(stub_pair(9, "00b", "15-0", "Find r."));
        // A byte-identical duplicate of seed 0.
        pairs.push(stub_pair(0, "00b", "4-0", "Find q0."));

        let kept = dedup_and_cap(pairs, 3);
        assert_eq!(kept.len(), 4);
        let shared: Vec<u64> = kept
            .iter()
            .filter(|p| p.meta.signature == "4-0")
            .map(|p| p.meta.seed)
            .collect();
        assert_eq!(shared, [0, 1, 2], "earliest seeds win");
        assert!(kept.iter().any(|p| p.meta.signature == "15-0"));

        let manifest = manifest_of(&kept);
        assert!(manifest.signatures.values().all(|&n| n <= 3));
        assert_eq!(manifest.step_counts.values().sum::<usize>(), kept.len());
    }

    #[test]
    fn export_writes_the_same_bytes_twice() {
        let pairs = vec![
            stub_pair(1, "00b", "4-0", "Find a."),
            stub_pair(2, "00b", "4-0", "Find b."),
        ];
        let mut images = BTreeMap::new();
        images.insert("images/0000000001.svg".to_string(), "<svg>1</svg>".to_string());
        images.insert("images/0000000002.svg".to_string(), "<svg>2</svg>".to_string());

        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a");
        let second = dir.path().join("b");
        let manifest = export(&pairs, &images, &first).unwrap();
        export(&pairs, &images, &second).unwrap();

        assert_eq!(manifest.count, 2);
        let jsonl_a = std::fs::read(first.join("data.jsonl")).unwrap();
        let jsonl_b = std::fs::read(second.join("data.jsonl")).unwrap();
        assert_eq!(jsonl_a, jsonl_b);
        assert_eq!(jsonl_a.iter().filter(|&&b| b == b'\n').count(), 2);
        assert!(first.join("images/0000000001.svg").is_file());
        assert!(first.join("manifest.json").is_file());

        let missing = export(&pairs, &BTreeMap::new(), &dir.path().join("c"));
        assert!(matches!(missing, Err(QaError::MissingImage(_))));
    }

    #[test]
    fn a_small_synth_run_reproduces_itself() {
        let registry = builtin_registry();
        let templates = TemplateSet::builtin();
        let options = SynthOptions {
            diagrams: 4,
            seed: 11,
            cap: 400,
            ..SynthOptions::default()
        };
        let a = synthesize_dataset(registry, templates, &options, None).unwrap();
        let b = synthesize_dataset(registry, templates, &options, None).unwrap();

        assert!(!a.pairs.is_empty(), "four seeds should yield something");
        assert_eq!(a.pairs, b.pairs);
        assert_eq!(a.images, b.images);
        assert!(a.diagrams_plotted <= a.diagrams_requested);
        for pair in &a.pairs {
            assert_eq!(pair.solution_nl.len(), pair.solution_formal.len());
            assert!(a.images.contains_key(&pair.image));
        }
    }

    #[test]
    fn expand_builds_records_from_annotations_alone() {
        let registry = builtin_registry();
        let templates = TemplateSet::builtin();
        let source = r#"[
            {"id": "midseg-1", "givens": [
                "Triangle(ABC)",
                "IsMidpointOfLine(D,AB)",
                "IsMidpointOfLine(E,AC)",
                "Line(DE)",
                "LengthOfLine(BC) = 8"
            ]}
        ]"#;
        let problems = parse_expand_file(source).unwrap();
        let filter = TargetFilter::default();
        let pairs =
            expand_dataset(registry, templates, &problems, &filter, 400, None).unwrap();
        assert!(!pairs.is_empty());
        for pair in &pairs {
            assert_eq!(pair.meta.source, "expand");
            assert_eq!(pair.image, "");
        }

        let garbage = parse_expand_file("not json");
        assert!(matches!(garbage, Err(QaError::Annotation(_))));
    }
}
