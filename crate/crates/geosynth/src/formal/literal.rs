//! Literals: a predicate applied to entities, stored canonically.
//!
//! Arguments are kept as raw point tuples structured by the predicate's
//! slots. Canonical form is the lexicographically smallest image of the
//! flattened point tuple under the predicate's symmetry group, so the
//! group alone decides which rewritings denote the same fact. Predicates
//! whose meaning depends on argument order (an apex vertex, an altitude
//! foot) simply declare a smaller group.

use std::cmp::Ordering;
use std::fmt;

use super::entity::{GeoEntity, PointRef};
use super::registry::{PredicateKind, Registry};
use super::FormalError;

#[derive(Clone, Debug)]
pub struct Literal {
    pred: String,
    args: Vec<Vec<PointRef>>,
    text: String,
}

impl Literal {
    /// Builds and canonicalizes a literal, validating slot structure and
    /// shared-letter consistency against the registry.
    pub fn new(
        registry: &Registry,
        pred: &str,
        args: Vec<Vec<PointRef>>,
    ) -> Result<Self, FormalError> {
        let def = registry.predicate(pred)?;
        if def.kind() == PredicateKind::Measure {
            return Err(FormalError::SlotKindMismatch {
                pred: pred.to_owned(),
                slot: 0,
                expected: "literal predicate",
                detail: "measure predicates appear in expressions, not literals".into(),
            });
        }
        if args.len() != def.slots().len() {
            return Err(FormalError::ArityMismatch {
                pred: pred.to_owned(),
                expected: def.slots().len(),
                got: args.len(),
            });
        }
        for (i, (slot, arg)) in def.slots().iter().zip(&args).enumerate() {
            if slot.letters.len() != arg.len() {
                return Err(FormalError::SlotKindMismatch {
                    pred: pred.to_owned(),
                    slot: i,
                    expected: slot.kind.describe(),
                    detail: format!(
                        "expected {} point(s), got {}",
                        slot.letters.len(),
                        arg.len()
                    ),
                });
            }
        }
        // Positions sharing a declaration letter must hold the same point.
        // Distinct letters must hold distinct points within a slot always,
        // and across slots unless the predicate opts out (perpendicular
        // segments may share an endpoint).
        let flat: Vec<PointRef> = args.iter().flatten().cloned().collect();
        let letters = def.flat_letters();
        let slot_of: Vec<usize> = def
            .slots()
            .iter()
            .enumerate()
            .flat_map(|(s, slot)| std::iter::repeat(s).take(slot.letters.len()))
            .collect();
        for i in 0..flat.len() {
            for j in i + 1..flat.len() {
                let (la, pa) = (letters[i], &flat[i]);
                let (lb, pb) = (letters[j], &flat[j]);
                if la == lb && pa != pb {
                    return Err(FormalError::MalformedEntity(format!(
                        "`{pred}` requires the same point where it repeats letter `{la}`"
                    )));
                }
                if la != lb
                    && pa == pb
                    && (slot_of[i] == slot_of[j] || def.cross_distinct())
                {
                    return Err(FormalError::MalformedEntity(format!(
                        "`{pred}` requires distinct points, `{pa}` repeats"
                    )));
                }
            }
        }
        let canonical = def.canonicalize_flat(flat);
        let mut rebuilt = Vec::with_capacity(args.len());
        let mut cursor = 0;
        for slot in def.slots() {
            let n = slot.letters.len();
            rebuilt.push(canonical[cursor..cursor + n].to_vec());
            cursor += n;
        }
        let text = render(pred, &rebuilt);
        Ok(Literal {
            pred: pred.to_owned(),
            args: rebuilt,
            text,
        })
    }

    pub fn pred(&self) -> &str {
        &self.pred
    }

    /// Raw canonical point tuples, one per slot.
    pub fn args(&self) -> &[Vec<PointRef>] {
        &self.args
    }

    /// Flattened canonical point tuple.
    pub fn flat_points(&self) -> Vec<PointRef> {
        self.args.iter().flatten().cloned().collect()
    }

    /// Distinct points, in first-appearance order.
    pub fn points(&self) -> Vec<PointRef> {
        let mut out: Vec<PointRef> = Vec::new();
        for p in self.args.iter().flatten() {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
        out
    }

    /// Arguments as standalone entities (entity-level canonical form; this
    /// may reorder points relative to [`Self::args`]).
    pub fn arg_entities(&self, registry: &Registry) -> Result<Vec<GeoEntity>, FormalError> {
        let def = registry.predicate(&self.pred)?;
        def.slots()
            .iter()
            .zip(&self.args)
            .map(|(slot, pts)| GeoEntity::from_points(slot.kind, pts))
            .collect()
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

fn render(pred: &str, args: &[Vec<PointRef>]) -> String {
    let mut out = String::from(pred);
    out.push('(');
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        for p in arg {
            out.push_str(p.name());
        }
    }
    out.push(')');
    out
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}
impl Eq for Literal {}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.text.cmp(&other.text)
    }
}

impl std::hash::Hash for Literal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.text.hash(state);
    }
}

#[cfg(test)]
mod tests {
    use crate::formal::{builtin_registry, parse_literal};

    #[test]
    fn canonicalizes_by_symmetry_group() {
        let reg = builtin_registry();
        let a = parse_literal(reg, "Triangle(CAB)").unwrap();
        let b = parse_literal(reg, "Triangle(BCA)").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.text(), "Triangle(ABC)");
        // The apex slot is pinned: only the base endpoints may swap.
        let iso = parse_literal(reg, "IsoscelesTriangle(B,CA)").unwrap();
        assert_eq!(iso.text(), "IsoscelesTriangle(B,AC)");
        let other = parse_literal(reg, "IsoscelesTriangle(A,BC)").unwrap();
        assert_ne!(iso, other);
    }

    #[test]
    fn collinear_keeps_its_middle_point() {
        let reg = builtin_registry();
        let l = parse_literal(reg, "Collinear(B,M,A)").unwrap();
        assert_eq!(l.text(), "Collinear(A,M,B)");
        let swapped = parse_literal(reg, "Collinear(A,B,M)").unwrap();
        assert_ne!(l, swapped);
        assert!(parse_literal(reg, "Collinear(A,A,B)").is_err());
    }

    #[test]
    fn cross_slot_sharing_is_per_predicate() {
        let reg = builtin_registry();
        assert!(parse_literal(reg, "PerpendicularBetweenLine(BD,AD)").is_ok());
        assert!(parse_literal(reg, "ParallelBetweenLine(BD,AD)").is_err());
        assert!(parse_literal(reg, "PerpendicularBetweenLine(DD,AB)").is_err());
    }

    #[test]
    fn quadrilateral_reflections_are_equal() {
        let reg = builtin_registry();
        let a = parse_literal(reg, "Parallelogram(ABCD)").unwrap();
        let b = parse_literal(reg, "Parallelogram(DCBA)").unwrap();
        let c = parse_literal(reg, "Parallelogram(CDAB)").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        // A vertex transposition names a different (crossed) quadrilateral.
        let d = parse_literal(reg, "Parallelogram(ABDC)").unwrap();
        assert_ne!(a, d);
    }
}
