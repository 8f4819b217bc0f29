//! Ground spaces, their metrics, and the quadtree cell hierarchy.
//!
//! Both ground spaces live on the half-open square `[0, side)²`. On the torus
//! opposite edges are identified and distances wrap per axis.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("side length must be positive and finite, got {0}")]
    BadSide(f64),
    #[error("point ({x}, {y}) lies outside [0, {side})²")]
    OutOfRange { x: f64, y: f64, side: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Square,
    Torus,
}

impl SpaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::Square => "square",
            SpaceKind::Torus => "torus",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" => Ok(SpaceKind::Square),
            "torus" => Ok(SpaceKind::Torus),
            other => Err(format!("unknown space kind `{other}` (expected square or torus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// A square or flat-torus ground space with an explicit side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundSpace {
    kind: SpaceKind,
    side: f64,
}

impl GroundSpace {
    pub fn new(kind: SpaceKind, side: f64) -> Result<Self, GeometryError> {
        if !(side.is_finite() && side > 0.0) {
            return Err(GeometryError::BadSide(side));
        }
        Ok(GroundSpace { kind, side })
    }

    pub fn square(side: f64) -> Result<Self, GeometryError> {
        Self::new(SpaceKind::Square, side)
    }

    pub fn torus(side: f64) -> Result<Self, GeometryError> {
        Self::new(SpaceKind::Torus, side)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..self.side).contains(&p.x) && (0.0..self.side).contains(&p.y)
    }

    pub fn check(&self, p: Point) -> Result<(), GeometryError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(GeometryError::OutOfRange { x: p.x, y: p.y, side: self.side })
        }
    }

    /// Per-axis separation, wrapped on the torus.
    #[inline]
    fn axis_gap(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        match self.kind {
            SpaceKind::Square => d,
            SpaceKind::Torus => d.min(self.side - d),
        }
    }

    #[inline]
    pub fn distance_squared(&self, p: Point, q: Point) -> f64 {
        let dx = self.axis_gap(p.x, q.x);
        let dy = self.axis_gap(p.y, q.y);
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(&self, p: Point, q: Point) -> f64 {
        self.distance_squared(p, q).sqrt()
    }

    pub fn root_cell(&self) -> Cell {
        Cell::root(self.side)
    }

    /// The unique level-`level` cell whose half-open rectangle contains `p`.
    pub fn cell_of_point(&self, p: Point, level: u32) -> Cell {
        let mut cell = self.root_cell();
        for _ in 0..level {
            let (xm, ym) = cell.midpoint();
            let quadrant = match (p.x >= xm, p.y >= ym) {
                (false, true) => 1,
                (true, true) => 2,
                (false, false) => 3,
                (true, false) => 4,
            };
            cell = cell.child(quadrant);
        }
        cell
    }
}

/// A quadtree cell `[x1,x2)×[y1,y2)` addressed by a word over `{1,2,3,4}`.
///
/// Children are numbered 1 = upper left, 2 = upper right, 3 = lower left,
/// 4 = lower right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub word: Vec<u8>,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl Cell {
    pub fn root(side: f64) -> Self {
        Cell { word: Vec::new(), x1: 0.0, x2: side, y1: 0.0, y2: side }
    }

    pub fn level(&self) -> u32 {
        self.word.len() as u32
    }

    pub fn side(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn word_string(&self) -> String {
        self.word.iter().map(|d| char::from(b'0' + d)).collect()
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x1..self.x2).contains(&p.x) && (self.y1..self.y2).contains(&p.y)
    }

    fn midpoint(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    fn child(&self, digit: u8) -> Cell {
        let (xm, ym) = self.midpoint();
        let (x1, x2, y1, y2) = match digit {
            1 => (self.x1, xm, ym, self.y2),
            2 => (xm, self.x2, ym, self.y2),
            3 => (self.x1, xm, self.y1, ym),
            4 => (xm, self.x2, self.y1, ym),
            _ => unreachable!("quadrant digits are 1..=4"),
        };
        let mut word = self.word.clone();
        word.push(digit);
        Cell { word, x1, x2, y1, y2 }
    }

    pub fn children(&self) -> [Cell; 4] {
        [self.child(1), self.child(2), self.child(3), self.child(4)]
    }

    pub fn is_ancestor_of(&self, other: &Cell) -> bool {
        other.word.starts_with(&self.word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rect(c: &Cell) -> (f64, f64, f64, f64) {
        (c.x1, c.x2, c.y1, c.y2)
    }

    #[test]
    fn distances() {
        let sq = GroundSpace::square(10.0).unwrap();
        assert_eq!(sq.distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        let t = GroundSpace::torus(10.0).unwrap();
        assert!((t.distance(Point::new(1.0, 1.0), Point::new(9.0, 1.0)) - 2.0).abs() < 1e-12);
        let d = t.distance(Point::new(1.0, 1.0), Point::new(9.0, 9.0));
        assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_side() {
        assert!(GroundSpace::square(0.0).is_err());
        assert!(GroundSpace::torus(f64::NAN).is_err());
    }

    #[test]
    fn root_children_match_quadrant_numbering() {
        let kids = Cell::root(4.0).children();
        assert_eq!(rect(&kids[0]), (0.0, 2.0, 2.0, 4.0));
        assert_eq!(rect(&kids[1]), (2.0, 4.0, 2.0, 4.0));
        assert_eq!(rect(&kids[2]), (0.0, 2.0, 0.0, 2.0));
        assert_eq!(rect(&kids[3]), (2.0, 4.0, 0.0, 2.0));
        let grand: Vec<Cell> = kids.iter().flat_map(|k| k.children()).collect();
        assert_eq!(grand.len(), 16);
        assert!(grand.iter().all(|c| c.side() == 1.0 && c.level() == 2));
    }

    #[test]
    fn cell_lookup() {
        let s = GroundSpace::square(4.0).unwrap();
        assert_eq!(s.cell_of_point(Point::new(0.5, 0.5), 1).word_string(), "3");
        assert_eq!(s.cell_of_point(Point::new(2.0, 2.0), 1).word_string(), "2");
        assert_eq!(s.cell_of_point(Point::new(3.9, 0.1), 0).word_string(), "");
    }

    #[test]
    fn children_tile_parent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = GroundSpace::square(7.0).unwrap();
        for _ in 0..2000 {
            let p = Point::new(rng.gen_range(0.0..7.0), rng.gen_range(0.0..7.0));
            let c = s.cell_of_point(p, 3);
            let hits = c.children().iter().filter(|k| k.contains(p)).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn metric_properties_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [SpaceKind::Square, SpaceKind::Torus] {
            let s = GroundSpace::new(kind, 13.0).unwrap();
            let mut pt = || Point::new(rng.gen_range(0.0..13.0), rng.gen_range(0.0..13.0));
            for _ in 0..10_000 {
                let (a, b, c) = (pt(), pt(), pt());
                assert!(s.distance(a, c) <= s.distance(a, b) + s.distance(b, c) + 1e-9);
                assert_eq!(s.distance(a, b), s.distance(b, a));
                assert_eq!(s.distance(a, a), 0.0);
            }
        }
    }

    #[test]
    fn torus_never_exceeds_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sq = GroundSpace::square(9.0).unwrap();
        let to = GroundSpace::torus(9.0).unwrap();
        for _ in 0..5000 {
            let p = Point::new(rng.gen_range(0.0..9.0), rng.gen_range(0.0..9.0));
            let q = Point::new(rng.gen_range(0.0..9.0), rng.gen_range(0.0..9.0));
            assert!(to.distance(p, q) <= sq.distance(p, q));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn nested_cells(x in 0.0f64..16.0, y in 0.0f64..16.0, level in 0u32..10) {
                let s = GroundSpace::torus(16.0).unwrap();
                let p = Point::new(x, y);
                let c = s.cell_of_point(p, level);
                prop_assert!(c.contains(p));
                prop_assert!((c.side() - 16.0 / f64::from(1u32 << level)).abs() < 1e-12);
                let next = s.cell_of_point(p, level + 1);
                prop_assert!(c.children().contains(&next));
                prop_assert!(c.is_ancestor_of(&next));
            }
        }
    }
}
