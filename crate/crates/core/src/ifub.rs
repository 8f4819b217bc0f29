//! iFUB: eccentricities in descending distance from a center until the
//! fringe can no longer beat the best eccentricity seen.

use serde::Serialize;

use crate::graph::{two_sweep, BfsScratch, GeometricGraph, GraphError, Hops, TwoSweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterStrategy {
    /// Midpoint of a double sweep started at the given vertex.
    TwoSweep(usize),
    Fixed(usize),
}

/// Source of exact eccentricities for the fringe loop.
pub trait EccSource {
    /// Returns `ecc(v)` and the work it cost.
    fn ecc(&mut self, g: &GeometricGraph, v: usize) -> (Hops, u64);
}

/// One full BFS per query.
#[derive(Debug, Clone)]
pub struct BfsEcc {
    scratch: BfsScratch,
}

impl BfsEcc {
    pub fn new(g: &GeometricGraph) -> Self {
        BfsEcc { scratch: BfsScratch::new(g.n()) }
    }
}

impl EccSource for BfsEcc {
    fn ecc(&mut self, g: &GeometricGraph, v: usize) -> (Hops, u64) {
        self.scratch.run(g, v)
    }
}

/// Precomputed eccentricities, e.g. from [`crate::graph::all_eccentricities`].
/// Runs many centers on one graph without repeating BFS; reports zero work.
#[derive(Debug, Clone, Copy)]
pub struct CachedEcc<'a>(pub &'a [Hops]);

impl EccSource for CachedEcc<'_> {
    fn ecc(&mut self, _g: &GeometricGraph, v: usize) -> (Hops, u64) {
        (self.0[v], 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IfubStep {
    pub vertex: usize,
    pub dist: Hops,
    pub ecc: Hops,
    /// Lower bound after this step.
    pub lower: Hops,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IfubTrace {
    pub center: usize,
    #[serde(skip)]
    pub sweep: Option<TwoSweep>,
    /// Vertices by descending `dist(c, ·)`, ties to the lowest id.
    pub order: Vec<u32>,
    /// `dist(c, ·)`.
    pub dist: Vec<Hops>,
    /// Starting lower bound `ecc(c)`.
    pub initial_lower: Hops,
    /// Fringe eccentricity computations; the explored set is the matching
    /// prefix of `order`.
    pub steps: Vec<IfubStep>,
    pub fringe_bfs: usize,
    /// Fringe BFS plus the center BFS plus the sweep BFS runs.
    pub total_bfs: usize,
    /// Arcs scanned by all BFS runs.
    pub work: u64,
    pub diameter: Hops,
}

impl IfubTrace {
    pub fn explored(&self) -> impl Iterator<Item = usize> + '_ {
        self.order[..self.steps.len()].iter().map(|&v| v as usize)
    }

    pub fn explored_fraction(&self) -> f64 {
        if self.order.is_empty() {
            0.0
        } else {
            self.steps.len() as f64 / self.order.len() as f64
        }
    }
}

pub fn ifub(g: &GeometricGraph, strategy: CenterStrategy) -> Result<(Hops, IfubTrace), GraphError> {
    let mut src = BfsEcc::new(g);
    ifub_with(g, strategy, &mut src)
}

pub fn ifub_with(
    g: &GeometricGraph,
    strategy: CenterStrategy,
    ecc_source: &mut impl EccSource,
) -> Result<(Hops, IfubTrace), GraphError> {
    g.require_connected()?;
    let (center, sweep, mut total_bfs, mut work) = match strategy {
        CenterStrategy::Fixed(v) => {
            g.check_vertex(v)?;
            (v, None, 0, 0)
        }
        CenterStrategy::TwoSweep(start) => {
            let s = two_sweep(g, start)?;
            // Two full BFS runs; the sweep does not report its arc count.
            (s.center, Some(s), 2, 2 * 2 * g.m() as u64)
        }
    };
    let mut scratch = BfsScratch::new(g.n());
    let (ecc_c, scanned) = scratch.run(g, center);
    total_bfs += 1;
    work += scanned;
    let dist = scratch.dist;
    let mut order: Vec<u32> = (0..g.n() as u32).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(dist[v as usize]), v));

    let mut lower = ecc_c;
    let mut steps = Vec::new();
    for &v in &order {
        let v = v as usize;
        if 2 * dist[v] <= lower {
            break;
        }
        let (e, w) = ecc_source.ecc(g, v);
        work += w;
        lower = lower.max(e);
        steps.push(IfubStep { vertex: v, dist: dist[v], ecc: e, lower });
    }
    let fringe_bfs = steps.len();
    total_bfs += fringe_bfs;
    let trace = IfubTrace {
        center,
        sweep,
        order,
        dist,
        initial_lower: ecc_c,
        steps,
        fringe_bfs,
        total_bfs,
        work,
        diameter: lower,
    };
    Ok((lower, trace))
}

/// Both inclusions of the explored-set characterisation for diameter `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExploredCheck {
    /// `⌈D/2⌉`.
    pub half: Hops,
    pub at_least_half: usize,
    pub above_half: usize,
    pub explored: usize,
    /// Vertices at distance `≥ ⌈D/2⌉ + 1` left unexplored.
    pub missed: usize,
    /// Explored vertices at distance `< ⌈D/2⌉`.
    pub too_close: usize,
}

impl ExploredCheck {
    pub fn holds(&self) -> bool {
        self.missed == 0 && self.too_close == 0
    }
}

pub fn explored_bounds_check(trace: &IfubTrace, diam: Hops) -> ExploredCheck {
    let half = diam.div_ceil(2);
    let mut explored = vec![false; trace.dist.len()];
    for v in trace.explored() {
        explored[v] = true;
    }
    let mut check =
        ExploredCheck { half, at_least_half: 0, above_half: 0, explored: trace.steps.len(), missed: 0, too_close: 0 };
    for (v, &d) in trace.dist.iter().enumerate() {
        if d >= half {
            check.at_least_half += 1;
        }
        if d > half {
            check.above_half += 1;
            if !explored[v] {
                check.missed += 1;
            }
        }
        if d < half && explored[v] {
            check.too_close += 1;
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpaceKind;
    use crate::graph::{all_eccentricities, fixtures, naive_diameter};
    use crate::graphgen::{sample_rgg, RggParams};

    #[test]
    fn path_fixed_center() {
        let g = fixtures::path(5);
        let (d, t) = ifub(&g, CenterStrategy::Fixed(2)).unwrap();
        assert_eq!(d, 4);
        assert_eq!(t.fringe_bfs, 1);
        assert_eq!(t.total_bfs, 2);
        assert_eq!(t.steps[0], IfubStep { vertex: 0, dist: 2, ecc: 4, lower: 4 });
        let c = explored_bounds_check(&t, 4);
        assert!(c.holds());
        assert_eq!((c.half, c.at_least_half, c.above_half), (2, 2, 0));
    }

    #[test]
    fn star_fixed_center() {
        let g = fixtures::star(3);
        let (d, t) = ifub(&g, CenterStrategy::Fixed(0)).unwrap();
        assert_eq!((d, t.fringe_bfs), (2, 1));
        assert!(explored_bounds_check(&t, 2).holds());
    }

    #[test]
    fn cycle_explores_half() {
        let g = fixtures::cycle(8);
        for c in 0..8 {
            let (d, t) = ifub(&g, CenterStrategy::Fixed(c)).unwrap();
            assert_eq!(d, 4);
            let check = explored_bounds_check(&t, 4);
            assert!(check.holds());
            // The antipode and both vertices at distance 3.
            assert_eq!(t.fringe_bfs, 3);
            assert_eq!(t.steps[0].vertex, (c + 4) % 8);
            assert_eq!((check.at_least_half, check.above_half), (5, 3));
        }
    }

    #[test]
    fn two_sweep_counts_sweeps() {
        let g = fixtures::path(7);
        let (d, t) = ifub(&g, CenterStrategy::TwoSweep(0)).unwrap();
        assert_eq!(d, 6);
        assert_eq!(t.center, 3);
        assert_eq!(t.total_bfs, 3 + t.fringe_bfs);
    }

    #[test]
    fn disconnected_is_rejected() {
        let coords = (0..4).map(|i| crate::geometry::Point::new(i as f64, 0.0)).collect();
        let g = GeometricGraph::from_edges(fixtures::unit_space(4), coords, &[(0, 1), (2, 3)], None).unwrap();
        assert!(ifub(&g, CenterStrategy::Fixed(0)).is_err());
    }

    #[test]
    fn matches_naive_on_rggs() {
        for seed in 0..12 {
            let kind = if seed % 2 == 0 { SpaceKind::Square } else { SpaceKind::Torus };
            let g = sample_rgg(&RggParams::with_exponent(400, 0.25, kind, seed)).unwrap();
            if !g.is_connected() {
                continue;
            }
            let truth = naive_diameter(&g).unwrap();
            let (ecc, _) = all_eccentricities(&g);
            for strat in [CenterStrategy::TwoSweep(0), CenterStrategy::Fixed(seed as usize)] {
                let (d, t) = ifub(&g, strat).unwrap();
                assert_eq!(d, truth);
                assert!(explored_bounds_check(&t, truth).holds());
                assert!(t.steps.windows(2).all(|w| w[0].lower <= w[1].lower));
                let (dc, tc) = ifub_with(&g, strat, &mut CachedEcc(&ecc)).unwrap();
                assert_eq!((dc, tc.steps), (d, t.steps));
            }
        }
    }
}
