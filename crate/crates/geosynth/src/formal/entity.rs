//! Points and composite geometric entities.

use std::fmt;

use super::FormalError;

/// A named point. Names are one uppercase ASCII letter optionally followed
/// by one digit (`A`, `P1`), which keeps concatenated entity text such as
/// `A1B` unambiguous to tokenize.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointRef(String);

impl PointRef {
    pub fn new(name: &str) -> Result<Self, FormalError> {
        let bytes = name.as_bytes();
        let ok = match bytes {
            [c] => c.is_ascii_uppercase(),
            [c, d] => c.is_ascii_uppercase() && d.is_ascii_digit(),
            _ => false,
        };
        if ok {
            Ok(PointRef(name.to_owned()))
        } else {
            Err(FormalError::MalformedEntity(format!(
                "`{name}` is not a valid point name"
            )))
        }
    }

    /// Name of the n-th allocated point (0-based): `A`..`Z`, then `A1`..`Z1`,
    /// `A2`.. — the 27th point is `A1`.
    pub fn nth(index: usize) -> Self {
        let letter = (b'A' + (index % 26) as u8) as char;
        match index / 26 {
            0 => PointRef(letter.to_string()),
            round => PointRef(format!("{letter}{round}")),
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Splits concatenated point names (`"A1BC"` → `[A1, B, C]`).
    pub fn tokenize(text: &str) -> Result<Vec<PointRef>, FormalError> {
        let mut out = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            if !bytes[i].is_ascii_uppercase() {
                return Err(FormalError::MalformedEntity(format!(
                    "unexpected character `{}` in `{text}`",
                    bytes[i] as char
                )));
            }
            let mut end = i + 1;
            if end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            out.push(PointRef(text[i..end].to_owned()));
            i = end;
        }
        if out.is_empty() {
            return Err(FormalError::MalformedEntity("empty entity text".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for PointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for PointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointRef({})", self.0)
    }
}

/// The shape of an entity, as expected by a predicate slot or measure.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EntityKind {
    Point,
    Segment,
    Angle,
    /// Fixed vertex count.
    Polygon(usize),
    /// Any vertex count >= 3 (used by polygon measures).
    AnyPolygon,
    Circle,
}

impl EntityKind {
    pub fn describe(self) -> &'static str {
        match self {
            EntityKind::Point => "point",
            EntityKind::Segment => "segment",
            EntityKind::Angle => "angle",
            EntityKind::Polygon(_) | EntityKind::AnyPolygon => "polygon",
            EntityKind::Circle => "circle",
        }
    }

    /// Number of points the kind consumes, if fixed.
    pub fn arity(self) -> Option<usize> {
        match self {
            EntityKind::Point | EntityKind::Circle => Some(1),
            EntityKind::Segment => Some(2),
            EntityKind::Angle => Some(3),
            EntityKind::Polygon(n) => Some(n),
            EntityKind::AnyPolygon => None,
        }
    }
}

/// A concrete geometric entity in canonical form:
/// * segment endpoints sorted,
/// * angle endpoints sorted around the (middle) vertex,
/// * polygon rotated so its smallest vertex comes first, orientation kept.
///
/// Canonical form at the *entity* level is about values used on their own
/// (inside measure symbols, diagrams). Literal arguments are canonicalized
/// separately by each predicate's symmetry group, which may keep orderings
/// an entity constructor would normalize away.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GeoEntity {
    Point(PointRef),
    Segment(PointRef, PointRef),
    Angle(PointRef, PointRef, PointRef),
    Polygon(Vec<PointRef>),
    Circle { center: PointRef, id: u32 },
}

fn require_distinct(points: &[PointRef]) -> Result<(), FormalError> {
    for (i, p) in points.iter().enumerate() {
        if points[i + 1..].contains(p) {
            return Err(FormalError::MalformedEntity(format!(
                "repeated point `{p}`"
            )));
        }
    }
    Ok(())
}

/// Rotates so the smallest vertex comes first; vertex order is preserved.
pub fn rotate_min(mut points: Vec<PointRef>) -> Vec<PointRef> {
    let min = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    points.rotate_left(min);
    points
}

impl GeoEntity {
    pub fn point(p: PointRef) -> Self {
        GeoEntity::Point(p)
    }

    pub fn segment(a: PointRef, b: PointRef) -> Result<Self, FormalError> {
        require_distinct(&[a.clone(), b.clone()])?;
        if a <= b {
            Ok(GeoEntity::Segment(a, b))
        } else {
            Ok(GeoEntity::Segment(b, a))
        }
    }

    pub fn angle(a: PointRef, vertex: PointRef, c: PointRef) -> Result<Self, FormalError> {
        require_distinct(&[a.clone(), vertex.clone(), c.clone()])?;
        let (lo, hi) = if a <= c { (a, c) } else { (c, a) };
        Ok(GeoEntity::Angle(lo, vertex, hi))
    }

    pub fn polygon(points: Vec<PointRef>) -> Result<Self, FormalError> {
        if points.len() < 3 {
            return Err(FormalError::MalformedEntity(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        require_distinct(&points)?;
        Ok(GeoEntity::Polygon(rotate_min(points)))
    }

    pub fn circle(center: PointRef) -> Self {
        GeoEntity::Circle { center, id: 0 }
    }

    /// Builds an entity of the given kind from raw points, canonicalizing.
    pub fn from_points(kind: EntityKind, pts: &[PointRef]) -> Result<Self, FormalError> {
        match kind {
            EntityKind::Point => match pts {
                [p] => Ok(GeoEntity::point(p.clone())),
                _ => Err(bad_count("point", 1, pts.len())),
            },
            EntityKind::Segment => match pts {
                [a, b] => GeoEntity::segment(a.clone(), b.clone()),
                _ => Err(bad_count("segment", 2, pts.len())),
            },
            EntityKind::Angle => match pts {
                [a, v, c] => GeoEntity::angle(a.clone(), v.clone(), c.clone()),
                _ => Err(bad_count("angle", 3, pts.len())),
            },
            EntityKind::Polygon(n) => {
                if pts.len() != n {
                    return Err(bad_count("polygon", n, pts.len()));
                }
                GeoEntity::polygon(pts.to_vec())
            }
            EntityKind::AnyPolygon => GeoEntity::polygon(pts.to_vec()),
            EntityKind::Circle => match pts {
                [c] => Ok(GeoEntity::circle(c.clone())),
                _ => Err(bad_count("circle", 1, pts.len())),
            },
        }
    }

    pub fn kind(&self) -> EntityKind {
        match self {
            GeoEntity::Point(_) => EntityKind::Point,
            GeoEntity::Segment(..) => EntityKind::Segment,
            GeoEntity::Angle(..) => EntityKind::Angle,
            GeoEntity::Polygon(p) => EntityKind::Polygon(p.len()),
            GeoEntity::Circle { .. } => EntityKind::Circle,
        }
    }

    pub fn points(&self) -> Vec<PointRef> {
        match self {
            GeoEntity::Point(p) => vec![p.clone()],
            GeoEntity::Segment(a, b) => vec![a.clone(), b.clone()],
            GeoEntity::Angle(a, v, c) => vec![a.clone(), v.clone(), c.clone()],
            GeoEntity::Polygon(pts) => pts.clone(),
            GeoEntity::Circle { center, .. } => vec![center.clone()],
        }
    }
}

fn bad_count(what: &str, want: usize, got: usize) -> FormalError {
    FormalError::MalformedEntity(format!("{what} needs {want} point(s), got {got}"))
}

impl fmt::Display for GeoEntity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeoEntity::Point(p) => write!(f, "{p}"),
            GeoEntity::Segment(a, b) => write!(f, "{a}{b}"),
            GeoEntity::Angle(a, v, c) => write!(f, "{a}{v}{c}"),
            GeoEntity::Polygon(pts) => {
                for p in pts {
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            GeoEntity::Circle { center, id } => {
                if *id == 0 {
                    write!(f, "{center}")
                } else {
                    write!(f, "{center}#{id}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> PointRef {
        PointRef::new(name).unwrap()
    }

    #[test]
    fn point_names_validate() {
        assert!(PointRef::new("A").is_ok());
        assert!(PointRef::new("P1").is_ok());
        assert!(PointRef::new("a").is_err());
        assert!(PointRef::new("AB").is_err());
        assert!(PointRef::new("A12").is_err());
        assert!(PointRef::new("").is_err());
    }

    #[test]
    fn nth_wraps_into_numbered_names() {
        assert_eq!(PointRef::nth(0).name(), "A");
        assert_eq!(PointRef::nth(25).name(), "Z");
        assert_eq!(PointRef::nth(26).name(), "A1");
        assert_eq!(PointRef::nth(27).name(), "B1");
        assert_eq!(PointRef::nth(52).name(), "A2");
    }

    #[test]
    fn tokenize_handles_numbered_points() {
        let pts = PointRef::tokenize("A1BC").unwrap();
        assert_eq!(
            pts.iter().map(|p| p.name()).collect::<Vec<_>>(),
            ["A1", "B", "C"]
        );
        assert!(PointRef::tokenize("aB").is_err());
        assert!(PointRef::tokenize("").is_err());
    }

    #[test]
    fn segment_sorts_endpoints() {
        let s = GeoEntity::segment(p("B"), p("A")).unwrap();
        assert_eq!(s.to_string(), "AB");
        assert!(GeoEntity::segment(p("A"), p("A")).is_err());
    }

    #[test]
    fn angle_keeps_vertex_and_sorts_ends() {
        let a = GeoEntity::angle(p("C"), p("B"), p("A")).unwrap();
        assert_eq!(a.to_string(), "ABC");
        let b = GeoEntity::angle(p("A"), p("B"), p("C")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn polygon_rotates_to_smallest_vertex() {
        let q = GeoEntity::polygon(vec![p("C"), p("A"), p("B")]).unwrap();
        assert_eq!(q.to_string(), "ABC");
        // Orientation is preserved: reflections stay distinct values.
        let r = GeoEntity::polygon(vec![p("A"), p("C"), p("B")]).unwrap();
        assert_eq!(r.to_string(), "ACB");
        assert_ne!(q, r);
    }
}
