//! Placement vetting and diagram enrichment.
//!
//! Vetting rejects placements that satisfy the constraints but make a
//! useless picture: points on top of each other, polygon corners that
//! almost flatten out, or a constructed collinear point that slid outside
//! its segment (the fate of an altitude foot on an obtuse base).
//!
//! Enrichment then grows the drawn figure. Extra chords connect point
//! pairs that no segment joins yet, which is what lets diagonal-based
//! rules fire on quadrilaterals. Afterwards every drawn segment is closed
//! under the points lying on it: when M sits on the drawn AB, the
//! sub-segments AM and MB become drawn too. Chords are chosen to keep a
//! clear berth around every other point, so the only points on a segment
//! are the constructed ones, and closure stays exact rather than a
//! floating-point guess.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{distance, PlotOptions};
use crate::deduce::{DeduceError, State};
use crate::formal::{Literal, PointRef};

/// Sine of the flattest polygon corner the checks tolerate; 0.2 keeps
/// every rendered angle between roughly 12 and 168 degrees.
const MIN_CORNER_SINE: f64 = 0.2;
/// How far inside its segment a collinear middle point must sit, as a
/// fraction of the segment.
const BETWEEN_MARGIN: f64 = 0.05;

pub(super) fn placement_is_sound(
    state: &State<'_>,
    coords: &BTreeMap<PointRef, (f64, f64)>,
    options: &PlotOptions,
) -> bool {
    let at = |p: &PointRef| coords[p];

    for &(x, y) in coords.values() {
        if !(0.0..=options.canvas).contains(&x) || !(0.0..=options.canvas).contains(&y) {
            return false;
        }
    }

    let points: Vec<&PointRef> = coords.keys().collect();
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            if distance(at(p), at(q)) < options.min_separation {
                return false;
            }
        }
    }

    for fact in state.facts() {
        let Some(lit) = fact.literal() else { continue };
        if lit.pred() == "Collinear" {
            let flat = lit.flat_points();
            if !strictly_between(at(&flat[1]), at(&flat[0]), at(&flat[2])) {
                return false;
            }
            continue;
        }
        // Slot groups of three or more points are polygon outlines.
        for group in lit.args() {
            if group.len() < 3 {
                continue;
            }
            let n = group.len();
            for i in 0..n {
                let a = at(&group[i]);
                let b = at(&group[(i + 1) % n]);
                let c = at(&group[(i + 2) % n]);
                if corner_sine(a, b, c) < MIN_CORNER_SINE {
                    return false;
                }
            }
        }
    }
    true
}

/// Sine of the angle at `b`.
fn corner_sine(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let u = (a.0 - b.0, a.1 - b.1);
    let v = (c.0 - b.0, c.1 - b.1);
    let cross = (u.0 * v.1 - u.1 * v.0).abs();
    cross / (u.0.hypot(u.1) * v.0.hypot(v.1))
}

/// Whether `m` projects well inside the segment `ab`. The constraints
/// already hold m on the line itself.
fn strictly_between(m: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let ab = (b.0 - a.0, b.1 - a.1);
    let am = (m.0 - a.0, m.1 - a.1);
    let t = (am.0 * ab.0 + am.1 * ab.1) / (ab.0 * ab.0 + ab.1 * ab.1);
    (BETWEEN_MARGIN..=1.0 - BETWEEN_MARGIN).contains(&t)
}

/// Draws up to two random chords, then closes drawn segments under the
/// points sitting on them.
pub(super) fn extend(
    state: &mut State<'_>,
    coords: &BTreeMap<PointRef, (f64, f64)>,
    rng: &mut ChaCha8Rng,
    options: &PlotOptions,
) -> Result<(), DeduceError> {
    for _ in 0..2 {
        if rng.gen::<f64>() >= options.extra_chord_probability {
            continue;
        }
        let candidates = chord_candidates(state, coords, options);
        if candidates.is_empty() {
            continue;
        }
        let (p, q) = candidates[rng.gen_range(0..candidates.len())].clone();
        let registry = state.registry();
        let chord = Literal::new(registry, "Line", vec![vec![p, q]])
            .expect("two distinct points form a segment");
        state.add_literal(chord, 0, None)?;
    }
    close_subsegments(state)
}

/// Point pairs with no segment between them whose chord keeps a clear
/// berth around every other point.
fn chord_candidates(
    state: &State<'_>,
    coords: &BTreeMap<PointRef, (f64, f64)>,
    options: &PlotOptions,
) -> Vec<(PointRef, PointRef)> {
    let points: Vec<&PointRef> = coords.keys().collect();
    let clearance = options.min_separation / 2.0;
    let mut out = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            let lit = Literal::new(
                state.registry(),
                "Line",
                vec![vec![p.clone(), q.clone()]],
            )
            .expect("two distinct points form a segment");
            if state.literal_id(&lit).is_some() {
                continue;
            }
            let blocked = points.iter().any(|&r| {
                r != p && r != q && segment_distance(coords[r], coords[p], coords[q]) < clearance
            });
            if !blocked {
                out.push((p.clone(), q.clone()));
            }
        }
    }
    out
}

fn segment_distance(r: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let ab = (b.0 - a.0, b.1 - a.1);
    let ar = (r.0 - a.0, r.1 - a.1);
    let len2 = ab.0 * ab.0 + ab.1 * ab.1;
    let t = ((ar.0 * ab.0 + ar.1 * ab.1) / len2).clamp(0.0, 1.0);
    distance(r, (a.0 + t * ab.0, a.1 + t * ab.1))
}

/// For every drawn segment, adds the segments between consecutive-or-not
/// points of its collinear run. Membership comes from the recorded
/// Collinear facts, so the run is exact and closure is idempotent.
fn close_subsegments(state: &mut State<'_>) -> Result<(), DeduceError> {
    // A point belongs to a segment's run when a Collinear fact puts it
    // between the endpoints, directly or through another run member.
    let collinear: Vec<[PointRef; 3]> = state
        .facts_of_pred("Collinear")
        .iter()
        .filter_map(|&id| {
            let flat = state.fact(id).literal()?.flat_points();
            Some([flat[0].clone(), flat[1].clone(), flat[2].clone()])
        })
        .collect();
    let lines: Vec<[PointRef; 2]> = state
        .facts_of_pred("Line")
        .iter()
        .filter_map(|&id| {
            let flat = state.fact(id).literal()?.flat_points();
            Some([flat[0].clone(), flat[1].clone()])
        })
        .collect();

    for [a, b] in lines {
        let mut run = vec![a.clone(), b.clone()];
        // A middle point joins when both its outer points are already in
        // the run; repeat until nothing new lands.
        loop {
            let before = run.len();
            for [p, m, q] in &collinear {
                if run.contains(p) && run.contains(q) && !run.contains(m) {
                    run.push(m.clone());
                }
            }
            if run.len() == before {
                break;
            }
        }
        if run.len() < 3 {
            continue;
        }
        run.sort();
        for (i, p) in run.iter().enumerate() {
            for q in &run[i + 1..] {
                let lit = Literal::new(state.registry(), "Line", vec![vec![p.clone(), q.clone()]])
                    .expect("run members are distinct");
                state.add_literal(lit, 0, None)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::builtin_registry;
    use rand::SeedableRng;

    fn point(n: &str) -> PointRef {
        PointRef::new(n).unwrap()
    }

    #[test]
    fn midpoints_split_their_segment_into_drawn_halves() {
        let registry = builtin_registry();
        let mut state = State::new(&registry);
        let lit = |p: &str, args: Vec<Vec<&str>>| {
            Literal::new(
                &registry,
                p,
                args.into_iter()
                    .map(|g| g.into_iter().map(point).collect())
                    .collect(),
            )
            .unwrap()
        };
        state
            .add_literal(lit("Triangle", vec![vec!["A", "B", "C"]]), 0, None)
            .unwrap();
        state
            .add_literal(
                lit("IsMidpointOfLine", vec![vec!["M"], vec!["A", "B"]]),
                0,
                None,
            )
            .unwrap();
        let coords: BTreeMap<PointRef, (f64, f64)> = [
            ("A", (1.0, 1.0)),
            ("B", (9.0, 1.0)),
            ("C", (5.0, 8.0)),
            ("M", (5.0, 1.0)),
        ]
        .into_iter()
        .map(|(n, xy)| (point(n), xy))
        .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let options = PlotOptions {
            extra_chord_probability: 0.0,
            ..PlotOptions::default()
        };
        extend(&mut state, &coords, &mut rng, &options).unwrap();
        assert!(state.id_of("Line(AM)").is_some());
        assert!(state.id_of("Line(BM)").is_some());
    }

    #[test]
    fn feet_outside_their_segment_are_rejected() {
        let registry = builtin_registry();
        let mut state = State::new(&registry);
        let collinear = Literal::new(
            &registry,
            "Collinear",
            vec![vec![point("A")], vec![point("D")], vec![point("C")]],
        )
        .unwrap();
        state.add_literal(collinear, 0, None).unwrap();
        let mut coords: BTreeMap<PointRef, (f64, f64)> = [
            ("A", (2.0, 2.0)),
            ("C", (6.0, 2.0)),
            ("D", (4.0, 2.0)),
        ]
        .into_iter()
        .map(|(n, xy)| (point(n), xy))
        .collect();
        let options = PlotOptions::default();
        assert!(placement_is_sound(&state, &coords, &options));

        // Slide the middle point past an endpoint; same line, bad figure.
        coords.insert(point("D"), (7.5, 2.0));
        assert!(!placement_is_sound(&state, &coords, &options));
    }

    #[test]
    fn chords_avoid_passing_through_points() {
        let registry = builtin_registry();
        let mut state = State::new(&registry);
        let square = Literal::new(
            &registry,
            "Square",
            vec![vec![point("A"), point("B"), point("C"), point("D")]],
        )
        .unwrap();
        state.add_literal(square, 0, None).unwrap();
        // E sits dead center, blocking both diagonals.
        let even = Literal::new(&registry, "Line", vec![vec![point("A"), point("E")]]).unwrap();
        state.add_literal(even, 0, None).unwrap();
        let coords: BTreeMap<PointRef, (f64, f64)> = [
            ("A", (2.0, 2.0)),
            ("B", (8.0, 2.0)),
            ("C", (8.0, 8.0)),
            ("D", (2.0, 8.0)),
            ("E", (5.0, 5.0)),
        ]
        .into_iter()
        .map(|(n, xy)| (point(n), xy))
        .collect();
        let candidates = chord_candidates(&state, &coords, &PlotOptions::default());
        assert!(candidates.contains(&(point("B"), point("E"))));
        assert!(!candidates.contains(&(point("B"), point("D"))));
        assert!(!candidates.contains(&(point("A"), point("C"))));
    }
}
