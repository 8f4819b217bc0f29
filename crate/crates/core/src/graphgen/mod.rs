//! Random geometric graph sampling.
//!
//! Points come from ChaCha8 with one stream per vertex: point `i` depends only
//! on `(seed, i)`, so output never depends on thread scheduling. Edges are found
//! with a bucket grid whose cells are at least `r` wide, scanning the 3×3 block
//! of buckets around each point.

mod format;

pub use format::{read_graph, read_graph_from, write_graph, write_graph_to, ParseError, ParseErrorKind};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, GroundSpace, Point, SpaceKind};
use crate::graph::GeometricGraph;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("vertex count must be at least 1")]
    NoVertices,
    #[error("radius exponent must satisfy 0 < rho < 1/2, got {0}")]
    BadExponent(f64),
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("torus radius {r} must be below half the side length {side}")]
    TorusRadiusTooLarge { r: f64, side: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusSpec {
    /// `r = n^rho`.
    Exponent(f64),
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RggParams {
    pub n: usize,
    pub radius: RadiusSpec,
    pub kind: SpaceKind,
    pub seed: u64,
}

impl RggParams {
    pub fn with_exponent(n: usize, rho: f64, kind: SpaceKind, seed: u64) -> Self {
        RggParams { n, radius: RadiusSpec::Exponent(rho), kind, seed }
    }

    pub fn with_radius(n: usize, r: f64, kind: SpaceKind, seed: u64) -> Self {
        RggParams { n, radius: RadiusSpec::Explicit(r), kind, seed }
    }

    pub fn side(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    pub fn r(&self) -> f64 {
        match self.radius {
            RadiusSpec::Exponent(rho) => (self.n as f64).powf(rho),
            RadiusSpec::Explicit(r) => r,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::NoVertices);
        }
        if let RadiusSpec::Exponent(rho) = self.radius {
            if !(rho > 0.0 && rho < 0.5) {
                return Err(GenError::BadExponent(rho));
            }
        }
        let r = self.r();
        if !(r.is_finite() && r > 0.0) {
            return Err(GenError::BadRadius(r));
        }
        check_torus_radius(self.kind, self.side(), r)
    }
}

fn check_torus_radius(kind: SpaceKind, side: f64, r: f64) -> Result<(), GenError> {
    if kind == SpaceKind::Torus && r >= side / 2.0 {
        return Err(GenError::TorusRadiusTooLarge { r, side });
    }
    Ok(())
}

/// Point `index` of the stream for `seed`, uniform in `[0, side)²`.
pub fn sample_point(seed: u64, index: u64, side: f64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut coord = || {
        let c = rng.gen::<f64>() * side;
        if c < side {
            c
        } else {
            side.next_down()
        }
    };
    let x = coord();
    let y = coord();
    Point::new(x, y)
}

pub fn sample_rgg(params: &RggParams) -> Result<GeometricGraph, GenError> {
    params.validate()?;
    let side = params.side();
    let points: Vec<Point> = (0..params.n as u64).into_par_iter().map(|i| sample_point(params.seed, i, side)).collect();
    from_points(params.kind, side, points, params.r())
}

/// Connects an explicit point set with the threshold rule `d(v, w) ≤ r`.
pub fn from_points(kind: SpaceKind, side: f64, points: Vec<Point>, r: f64) -> Result<GeometricGraph, GenError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(GenError::BadRadius(r));
    }
    check_torus_radius(kind, side, r)?;
    let space = GroundSpace::new(kind, side)?;
    for &p in &points {
        space.check(p)?;
    }
    let grid = BucketGrid::new(&space, r, &points);
    let adjacency: Vec<Vec<u32>> =
        (0..points.len()).into_par_iter().map(|v| grid.neighbors_of(&space, &points, v, r)).collect();
    Ok(GeometricGraph::from_sorted_adjacency(space, points, adjacency, Some(r)))
}

/// Uniform bucket grid with buckets of side at least `r`.
struct BucketGrid {
    per_axis: usize,
    bucket_side: f64,
    start: Vec<usize>,
    members: Vec<u32>,
    wrap: bool,
}

impl BucketGrid {
    fn new(space: &GroundSpace, r: f64, points: &[Point]) -> Self {
        let per_axis = ((space.side() / r).floor() as usize).clamp(1, 1 << 12);
        let bucket_side = space.side() / per_axis as f64;
        let mut grid = BucketGrid {
            per_axis,
            bucket_side,
            start: Vec::new(),
            members: Vec::new(),
            wrap: space.kind() == SpaceKind::Torus,
        };
        let cells = per_axis * per_axis;
        let mut count = vec![0usize; cells + 1];
        let ids: Vec<usize> = points.iter().map(|&p| grid.bucket_of(p)).collect();
        for &b in &ids {
            count[b + 1] += 1;
        }
        for i in 0..cells {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut members = vec![0u32; points.len()];
        for (v, &b) in ids.iter().enumerate() {
            members[fill[b]] = v as u32;
            fill[b] += 1;
        }
        grid.start = count;
        grid.members = members;
        grid
    }

    fn axis_index(&self, c: f64) -> usize {
        ((c / self.bucket_side) as usize).min(self.per_axis - 1)
    }

    fn bucket_of(&self, p: Point) -> usize {
        self.axis_index(p.y) * self.per_axis + self.axis_index(p.x)
    }

    /// Distinct bucket coordinates within one step on each axis.
    fn neighborhood(&self, i: usize) -> Vec<usize> {
        let k = self.per_axis as isize;
        let mut out: Vec<usize> = (-1..=1)
            .filter_map(|d| {
                let j = i as isize + d;
                if self.wrap {
                    Some(j.rem_euclid(k) as usize)
                } else if (0..k).contains(&j) {
                    Some(j as usize)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn neighbors_of(&self, space: &GroundSpace, points: &[Point], v: usize, r: f64) -> Vec<u32> {
        let p = points[v];
        let (bx, by) = (self.axis_index(p.x), self.axis_index(p.y));
        let mut out = Vec::new();
        for y in self.neighborhood(by) {
            for x in self.neighborhood(bx) {
                let b = y * self.per_axis + x;
                for &w in &self.members[self.start[b]..self.start[b + 1]] {
                    if w as usize != v && space.distance(p, points[w as usize]) <= r {
                        out.push(w);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_edges(g: &GeometricGraph, r: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..g.n() {
            for v in u + 1..g.n() {
                if g.space().distance(g.coord(u), g.coord(v)) <= r {
                    out.push((u, v));
                }
            }
        }
        out
    }

    #[test]
    fn single_vertex() {
        let g = sample_rgg(&RggParams::with_radius(1, 0.3, SpaceKind::Square, 4)).unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
    }

    #[test]
    fn threshold_rule_on_fixed_points() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(0.0, 2.5)];
        let g = from_points(SpaceKind::Square, 3.0, pts, 1.0).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn parameter_validation() {
        let bad = RggParams::with_exponent(100, 0.6, SpaceKind::Square, 0);
        assert_eq!(sample_rgg(&bad), Err(GenError::BadExponent(0.6)));
        let big = RggParams::with_radius(100, 5.0, SpaceKind::Torus, 0);
        assert!(matches!(sample_rgg(&big), Err(GenError::TorusRadiusTooLarge { .. })));
        // The same radius is fine on the square.
        assert!(sample_rgg(&RggParams::with_radius(100, 5.0, SpaceKind::Square, 0)).is_ok());
        assert_eq!(sample_rgg(&RggParams::with_radius(0, 1.0, SpaceKind::Square, 0)), Err(GenError::NoVertices));
    }

    #[test]
    fn grid_matches_brute_force() {
        for (i, kind) in [SpaceKind::Square, SpaceKind::Torus].into_iter().enumerate() {
            for (n, r) in [(500, 1.7), (400, 3.3), (200, 6.9), (50, 3.4)] {
                let g = sample_rgg(&RggParams::with_radius(n, r, kind, 17 + i as u64)).unwrap();
                assert_eq!(g.edges().collect::<Vec<_>>(), brute_force_edges(&g, r), "{kind} n={n} r={r}");
            }
        }
    }

    #[test]
    fn degrees_match_brute_force() {
        let g = sample_rgg(&RggParams::with_exponent(500, 0.25, SpaceKind::Torus, 9)).unwrap();
        let r = g.radius();
        for v in 0..g.n() {
            let expect = (0..g.n()).filter(|&w| w != v && g.space().distance(g.coord(v), g.coord(w)) <= r).count();
            assert_eq!(g.degree(v), expect);
        }
    }

    #[test]
    fn seed_determinism() {
        let p = RggParams::with_exponent(800, 0.3, SpaceKind::Torus, 42);
        let a = sample_rgg(&p).unwrap();
        let b = sample_rgg(&p).unwrap();
        assert_eq!(a, b);
        let c = sample_rgg(&RggParams { seed: 43, ..p }).unwrap();
        assert_ne!(a.coords(), c.coords());
        // Point i only depends on (seed, i).
        let small = sample_rgg(&RggParams { n: 200, ..p }).unwrap();
        assert_eq!(small.coord(7), sample_point(42, 7, (200f64).sqrt()));
    }

    #[test]
    fn mean_degree_tracks_disk_area_on_torus() {
        let n = 4000;
        let rho = 0.3;
        let mut total = 0.0;
        for seed in 0..20 {
            let g = sample_rgg(&RggParams::with_exponent(n, rho, SpaceKind::Torus, seed)).unwrap();
            total += g.average_degree();
        }
        let mean = total / 20.0;
        let expected = std::f64::consts::PI * (n as f64).powf(2.0 * rho);
        assert!((mean - expected).abs() / expected < 0.15, "mean {mean} expected {expected}");
    }
}
