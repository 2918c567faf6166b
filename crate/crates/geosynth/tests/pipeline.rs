//! End-to-end runs of the synthesis pipeline: diagrams feed the chase,
//! and the rounded numeric givens must never contradict anything the
//! rules derive from them.

use std::collections::BTreeSet;

use geosynth::deduce::{chase, ChaseOptions};
use geosynth::formal::builtin_registry;
use geosynth::plot::{synthesize, PlotOptions};
use geosynth::target::{paths_for, Answer, TargetFilter, TargetKind};

#[test]
fn every_diagram_supports_a_clean_chase() {
    let registry = builtin_registry();
    let options = PlotOptions::default();
    let mut derived_any = 0;
    let mut checked = 0;
    for seed in 0..150 {
        let Ok(mut diagram) = synthesize(registry, seed, &options) else {
            continue;
        };
        checked += 1;
        let before = diagram.state.facts().len();
        let stats = chase(&mut diagram.state, &ChaseOptions::default()).unwrap_or_else(|e| {
            panic!("seed {seed}: chase failed: {e}");
        });
        assert!(stats.layers >= 1);
        if diagram.state.facts().len() > before {
            derived_any += 1;
        }
    }
    assert!(checked >= 140);
    // Diagrams are sampled to be provable scenes, not bare sketches; the
    // occasional inert one is fine, silence across the corpus is not.
    assert!(
        derived_any * 10 >= checked * 9,
        "only {derived_any} of {checked} diagrams derived anything"
    );
}

#[test]
fn selected_paths_are_bounded_grounded_and_replayable() {
    let registry = builtin_registry();
    let options = PlotOptions::default();
    let filter = TargetFilter::default();
    let mut paths_seen = 0;
    for seed in 200..400 {
        let Ok(mut diagram) = synthesize(registry, seed, &options) else {
            continue;
        };
        if chase(&mut diagram.state, &ChaseOptions::default()).is_err() {
            continue;
        }
        let state = &diagram.state;
        let given_texts: BTreeSet<&str> = state
            .facts()
            .iter()
            .filter(|f| f.is_given())
            .map(|f| f.text())
            .collect();
        // build_path replays every numeric answer through a fresh solver
        // internally, so an Ok here is already the independence check.
        let pairs = match paths_for(state, &filter, seed) {
            Ok(pairs) => pairs,
            Err(e) => panic!("seed {seed}: target selection failed: {e}"),
        };
        for (score, path) in pairs {
            paths_seen += 1;
            assert!(score.depth >= filter.min_depth && score.depth <= filter.max_depth);
            assert!(score.steps <= filter.max_steps);
            assert_eq!(path.steps.len(), score.steps);
            assert_eq!(path.theorem_sequence.len(), path.steps.len());
            assert_eq!(path.steps.last().unwrap().conclusion, path.target);
            for given in &path.givens {
                assert!(
                    given_texts.contains(given.as_str()),
                    "seed {seed}: path given `{given}` is not a diagram given"
                );
            }
            match (&path.kind, &path.answer) {
                (TargetKind::Numeric, Answer::Value(_)) => {}
                (TargetKind::Relation, Answer::Relation(text)) => {
                    assert_eq!(text, &path.target)
                }
                other => panic!("seed {seed}: mismatched target kind and answer: {other:?}"),
            }
        }
    }
    assert!(
        paths_seen >= 300,
        "only {paths_seen} paths extracted across 200 seeds"
    );
}
