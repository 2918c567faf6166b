//! Deterministic SVG rendering.
//!
//! The byte stream is part of the synthesis contract: the same seed must
//! reproduce the same file. Everything that could wobble is pinned;
//! segments and labels are emitted in sorted order and every coordinate
//! is formatted to exactly two decimals.

use super::Diagram;

/// Pixels per coordinate unit at the default canvas size.
const VIEW: f64 = 440.0;
const MARGIN: f64 = 20.0;

pub(super) fn render(diagram: &Diagram<'_>) -> String {
    let scale = (VIEW - 2.0 * MARGIN) / canvas_extent(diagram);
    // SVG y grows downward; diagram y grows upward.
    let tx = |x: f64| MARGIN + x * scale;
    let ty = |y: f64| VIEW - MARGIN - y * scale;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEW:.0} {VIEW:.0}\">\n"
    ));
    out.push_str(&format!(
        "  <rect width=\"{VIEW:.0}\" height=\"{VIEW:.0}\" fill=\"white\"/>\n"
    ));

    let mut segments: Vec<(&str, [f64; 4])> = Vec::new();
    for &id in diagram.state.facts_of_pred("Line") {
        let Some(lit) = diagram.state.fact(id).literal() else {
            continue;
        };
        let flat = lit.flat_points();
        let (xa, ya) = diagram.coords[&flat[0]];
        let (xb, yb) = diagram.coords[&flat[1]];
        segments.push((lit.text(), [tx(xa), ty(ya), tx(xb), ty(yb)]));
    }
    segments.sort_by_key(|(text, _)| *text);
    for (_, [x1, y1, x2, y2]) in segments {
        out.push_str(&format!(
            "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"#1a1a1a\" stroke-width=\"1.5\"/>\n"
        ));
    }

    for (point, &(x, y)) in &diagram.coords {
        let (cx, cy) = (tx(x), ty(y));
        out.push_str(&format!(
            "  <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"3\" fill=\"#1a1a1a\"/>\n"
        ));
        // Labels sit up-right of their point, clamped back into view for
        // points near the top or right edge.
        let lx = (cx + 6.0).min(VIEW - 16.0);
        let ly = (cy - 6.0).max(14.0);
        out.push_str(&format!(
            "  <text x=\"{lx:.2}\" y=\"{ly:.2}\" font-family=\"sans-serif\" \
             font-size=\"14\">{}</text>\n",
            point.name()
        ));
    }

    out.push_str("</svg>\n");
    out
}

fn canvas_extent(diagram: &Diagram<'_>) -> f64 {
    diagram
        .coords
        .values()
        .flat_map(|&(x, y)| [x, y])
        .fold(10.0_f64, f64::max)
}

#[cfg(test)]
mod tests {
    use crate::formal::builtin_registry;
    use crate::plot::{synthesize, PlotOptions};

    #[test]
    fn rendering_is_sorted_and_scaled() {
        let registry = builtin_registry();
        let diagram = synthesize(&registry, 12, &PlotOptions::default()).unwrap();
        let svg = diagram.svg();
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        let lines: Vec<&str> = svg.lines().filter(|l| l.contains("<line ")).collect();
        assert!(!lines.is_empty());
        let labels = svg.matches("<text ").count();
        assert_eq!(labels, diagram.coords.len());
    }
}
