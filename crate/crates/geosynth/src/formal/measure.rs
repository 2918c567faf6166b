//! Measure symbols: the numeric quantities equations talk about.

use std::fmt;

use super::entity::{rotate_min, EntityKind, GeoEntity, PointRef};
use super::FormalError;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MeasureKind {
    Length,
    Angle,
    Area,
    Perimeter,
}

impl MeasureKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Length => "LengthOfLine",
            MeasureKind::Angle => "MeasureOfAngle",
            MeasureKind::Area => "AreaOfPolygon",
            MeasureKind::Perimeter => "PerimeterOfPolygon",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "LengthOfLine" => Some(MeasureKind::Length),
            "MeasureOfAngle" => Some(MeasureKind::Angle),
            "AreaOfPolygon" => Some(MeasureKind::Area),
            "PerimeterOfPolygon" => Some(MeasureKind::Perimeter),
            _ => None,
        }
    }

    pub fn entity_kind(self) -> EntityKind {
        match self {
            MeasureKind::Length => EntityKind::Segment,
            MeasureKind::Angle => EntityKind::Angle,
            MeasureKind::Area | MeasureKind::Perimeter => EntityKind::AnyPolygon,
        }
    }
}

/// A measure applied to a canonical entity. All four measures are
/// direction-free, so the polygon inside an area or perimeter symbol is
/// normalized under reflection as well as rotation; this keeps the symbol
/// produced by any symmetric theorem binding identical.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MeasureSymbol {
    kind: MeasureKind,
    entity: GeoEntity,
}

impl MeasureSymbol {
    pub fn new(kind: MeasureKind, points: &[PointRef]) -> Result<Self, FormalError> {
        let entity = match kind {
            MeasureKind::Length => GeoEntity::from_points(EntityKind::Segment, points)?,
            MeasureKind::Angle => GeoEntity::from_points(EntityKind::Angle, points)?,
            MeasureKind::Area | MeasureKind::Perimeter => {
                let forward = GeoEntity::polygon(points.to_vec())?;
                let mut reversed: Vec<PointRef> = points.to_vec();
                reversed.reverse();
                let backward = GeoEntity::Polygon(rotate_min(reversed));
                if forward <= backward {
                    forward
                } else {
                    backward
                }
            }
        };
        Ok(MeasureSymbol { kind, entity })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn entity(&self) -> &GeoEntity {
        &self.entity
    }

    pub fn points(&self) -> Vec<PointRef> {
        self.entity.points()
    }
}

impl fmt::Display for MeasureSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.name(), self.entity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(text: &str) -> Vec<PointRef> {
        PointRef::tokenize(text).unwrap()
    }

    #[test]
    fn length_sorts_segment() {
        let m = MeasureSymbol::new(MeasureKind::Length, &pts("ED")).unwrap();
        assert_eq!(m.to_string(), "LengthOfLine(DE)");
    }

    #[test]
    fn angle_reversal_is_same_symbol() {
        let a = MeasureSymbol::new(MeasureKind::Angle, &pts("ABC")).unwrap();
        let b = MeasureSymbol::new(MeasureKind::Angle, &pts("CBA")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "MeasureOfAngle(ABC)");
    }

    #[test]
    fn polygon_measures_ignore_orientation() {
        let a = MeasureSymbol::new(MeasureKind::Perimeter, &pts("BCA")).unwrap();
        let b = MeasureSymbol::new(MeasureKind::Perimeter, &pts("ACB")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "PerimeterOfPolygon(ABC)");
    }
}
