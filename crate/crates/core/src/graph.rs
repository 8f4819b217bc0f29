//! Immutable geometric graphs and the BFS machinery everything else is built on.

use std::collections::HashSet;

use thiserror::Error;

use crate::geometry::{GeometryError, GroundSpace, Point};

/// Hop count. [`UNREACHABLE`] is larger than any attainable distance.
pub type Hops = u32;

pub const UNREACHABLE: Hops = u32::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("expected {expected} coordinates, got {got}")]
    CoordCount { expected: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("graph is disconnected: vertices {a} and {b} lie in different components")]
    Disconnected { a: usize, b: usize },
    #[error("graph has no vertices")]
    Empty,
}

/// Undirected simple graph in CSR form with a position for every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    coords: Vec<Point>,
    space: GroundSpace,
    radius: Option<f64>,
}

impl GeometricGraph {
    /// Builds the graph from an undirected edge list. Each edge must appear once
    /// (in either orientation).
    pub fn from_edges(
        space: GroundSpace,
        coords: Vec<Point>,
        edges: &[(usize, usize)],
        radius: Option<f64>,
    ) -> Result<Self, GraphError> {
        let n = coords.len();
        for &p in &coords {
            space.check(p)?;
        }
        let mut degree = vec![0usize; n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0u32; 2 * edges.len()];
        for &(u, v) in edges {
            targets[fill[u]] = v as u32;
            fill[u] += 1;
            targets[fill[v]] = u as u32;
            fill[v] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok(GeometricGraph { offsets, targets, coords, space, radius })
    }

    /// Builds from per-vertex sorted, symmetric adjacency lists (trusted input).
    pub(crate) fn from_sorted_adjacency(
        space: GroundSpace,
        coords: Vec<Point>,
        adjacency: Vec<Vec<u32>>,
        radius: Option<f64>,
    ) -> Self {
        let mut offsets = Vec::with_capacity(coords.len() + 1);
        offsets.push(0);
        let total = adjacency.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        for list in adjacency {
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        GeometricGraph { offsets, targets, coords, space, radius }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn coord(&self, v: usize) -> Point {
        self.coords[v]
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Edges with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u).iter().map(|&v| v as usize).filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    /// The connection radius if the graph was sampled, else the longest edge.
    ///
    /// The longest edge is a valid stand-in for lower-stretch checks since every
    /// edge spans at most that geometric distance.
    pub fn radius(&self) -> f64 {
        self.radius.unwrap_or_else(|| {
            self.edges().map(|(u, v)| self.space.distance(self.coords[u], self.coords[v])).fold(0.0, f64::max)
        })
    }

    pub fn stored_radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.targets.len() as f64 / self.n() as f64
        }
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    /// Lowest-id representative of each connected component, in ascending order.
    pub fn component_representatives(&self) -> Vec<usize> {
        let n = self.n();
        let mut dist = vec![UNREACHABLE; n];
        let mut queue = Vec::new();
        let mut reps = Vec::new();
        for v in 0..n {
            if dist[v] == UNREACHABLE {
                reps.push(v);
                bfs_core(self, v, |_| true, &mut dist, &mut queue);
            }
        }
        reps
    }

    pub fn is_connected(&self) -> bool {
        self.component_representatives().len() <= 1
    }

    pub fn require_connected(&self) -> Result<(), GraphError> {
        match self.component_representatives().as_slice() {
            [] => Err(GraphError::Empty),
            [_] => Ok(()),
            [a, b, ..] => Err(GraphError::Disconnected { a: *a, b: *b }),
        }
    }
}

/// Result of a single-source BFS.
#[derive(Debug, Clone, PartialEq)]
pub struct DistArray {
    pub source: usize,
    pub dist: Vec<Hops>,
}

impl DistArray {
    /// Largest finite distance.
    pub fn eccentricity(&self) -> Hops {
        self.dist.iter().copied().filter(|&d| d != UNREACHABLE).max().unwrap_or(0)
    }
}

/// Membership bitmap over the vertices of a graph.
#[derive(Debug, Clone)]
pub struct VertexSet {
    member: Vec<bool>,
}

impl VertexSet {
    pub fn from_vertices(n: usize, vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut member = vec![false; n];
        for v in vertices {
            member[v] = true;
        }
        VertexSet { member }
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v)
    }
}

/// BFS from `source` over vertices accepted by `inside`. `dist` must be
/// `UNREACHABLE` everywhere on entry. Returns (eccentricity, arcs scanned).
#[inline]
pub(crate) fn bfs_core(
    g: &GeometricGraph,
    source: usize,
    inside: impl Fn(usize) -> bool,
    dist: &mut [Hops],
    queue: &mut Vec<u32>,
) -> (Hops, u64) {
    queue.clear();
    dist[source] = 0;
    queue.push(source as u32);
    let mut head = 0;
    let mut scanned = 0u64;
    let mut ecc = 0;
    while head < queue.len() {
        let u = queue[head] as usize;
        head += 1;
        let du = dist[u];
        ecc = du;
        let nbrs = g.neighbors(u);
        scanned += nbrs.len() as u64;
        for &w in nbrs {
            let w = w as usize;
            if dist[w] == UNREACHABLE && inside(w) {
                dist[w] = du + 1;
                queue.push(w as u32);
            }
        }
    }
    (ecc, scanned)
}

/// Reusable buffers for repeated BFS runs on one graph.
#[derive(Debug, Clone)]
pub struct BfsScratch {
    pub dist: Vec<Hops>,
    queue: Vec<u32>,
}

impl BfsScratch {
    pub fn new(n: usize) -> Self {
        BfsScratch { dist: vec![UNREACHABLE; n], queue: Vec::with_capacity(n) }
    }

    /// Runs a full BFS, leaving distances in `self.dist`. Returns (ecc, arcs scanned).
    pub fn run(&mut self, g: &GeometricGraph, source: usize) -> (Hops, u64) {
        self.dist.fill(UNREACHABLE);
        bfs_core(g, source, |_| true, &mut self.dist, &mut self.queue)
    }

    pub fn run_within(&mut self, g: &GeometricGraph, source: usize, inside: impl Fn(usize) -> bool) -> (Hops, u64) {
        self.dist.fill(UNREACHABLE);
        bfs_core(g, source, inside, &mut self.dist, &mut self.queue)
    }

    /// Vertices reached by the last run, in BFS order.
    pub fn order(&self) -> &[u32] {
        &self.queue
    }
}

pub fn bfs(g: &GeometricGraph, source: usize, restriction: Option<&VertexSet>) -> Result<DistArray, GraphError> {
    g.check_vertex(source)?;
    if let Some(set) = restriction {
        if !set.contains(source) {
            return Err(GraphError::VertexOutOfRange { vertex: source, n: set.len() });
        }
    }
    let mut scratch = BfsScratch::new(g.n());
    match restriction {
        Some(set) => scratch.run_within(g, source, |w| set.contains(w)),
        None => scratch.run(g, source),
    };
    Ok(DistArray { source, dist: scratch.dist })
}

pub fn eccentricity(g: &GeometricGraph, v: usize, restriction: Option<&VertexSet>) -> Result<Hops, GraphError> {
    Ok(bfs(g, v, restriction)?.eccentricity())
}

/// All-pairs-BFS diameter. Also returns the number of arcs scanned.
pub fn naive_diameter_counted(g: &GeometricGraph) -> Result<(Hops, u64), GraphError> {
    g.require_connected()?;
    let mut scratch = BfsScratch::new(g.n());
    let mut best = 0;
    let mut work = 0;
    for v in 0..g.n() {
        let (ecc, scanned) = scratch.run(g, v);
        best = best.max(ecc);
        work += scanned;
    }
    Ok((best, work))
}

pub fn naive_diameter(g: &GeometricGraph) -> Result<Hops, GraphError> {
    naive_diameter_counted(g).map(|(d, _)| d)
}

/// Exact max distance between two vertex sets by BFS from every `a ∈ A`.
/// Returns [`UNREACHABLE`] if some pair is disconnected.
pub fn maxdist_bruteforce(g: &GeometricGraph, a_set: &[usize], b_set: &[usize]) -> Hops {
    let mut scratch = BfsScratch::new(g.n());
    let mut best = 0;
    for &a in a_set {
        scratch.run(g, a);
        for &b in b_set {
            best = best.max(scratch.dist[b]);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoSweep {
    /// Farthest vertex from the start.
    pub w: usize,
    /// Farthest vertex from `w`.
    pub w_far: usize,
    /// Midpoint of the `w → w_far` path at index `⌊length/2⌋` from `w`.
    pub center: usize,
    pub length: Hops,
}

fn argmax_lowest(dist: &[Hops]) -> usize {
    let mut best = 0;
    for (v, &d) in dist.iter().enumerate() {
        if d != UNREACHABLE && d > dist[best] {
            best = v;
        }
    }
    best
}

/// Double-sweep center selection. All ties go to the lowest vertex id.
pub fn two_sweep(g: &GeometricGraph, start: usize) -> Result<TwoSweep, GraphError> {
    g.check_vertex(start)?;
    g.require_connected()?;
    let mut scratch = BfsScratch::new(g.n());
    scratch.run(g, start);
    let w = argmax_lowest(&scratch.dist);
    scratch.run(g, w);
    let w_far = argmax_lowest(&scratch.dist);
    let length = scratch.dist[w_far];
    let dist = &scratch.dist;
    // Walk back from w_far through lowest-id parents.
    let mut path = vec![w_far];
    let mut cur = w_far;
    while cur != w {
        let parent = g
            .neighbors(cur)
            .iter()
            .map(|&p| p as usize)
            .find(|&p| dist[p] + 1 == dist[cur])
            .expect("BFS parent exists");
        path.push(parent);
        cur = parent;
    }
    path.reverse();
    let center = path[(length / 2) as usize];
    Ok(TwoSweep { w, w_far, center, length })
}

/// Eccentricities of all vertices using 64-source bit-parallel BFS sweeps.
///
/// Each entry is the largest finite distance from that vertex, as with
/// [`DistArray::eccentricity`]. Returns the eccentricities and the number of
/// word operations performed.
pub fn all_eccentricities(g: &GeometricGraph) -> (Vec<Hops>, u64) {
    let n = g.n();
    let mut ecc = vec![0; n];
    let mut seen = vec![0u64; n];
    let mut frontier = vec![0u64; n];
    let mut next = vec![0u64; n];
    let mut ops = 0u64;
    for base in (0..n).step_by(64) {
        let batch = (n - base).min(64);
        seen.fill(0);
        frontier.fill(0);
        for i in 0..batch {
            seen[base + i] |= 1 << i;
            frontier[base + i] |= 1 << i;
        }
        let full: u64 = if batch == 64 { u64::MAX } else { (1u64 << batch) - 1 };
        let mut level = 0;
        loop {
            level += 1;
            let mut reached = 0u64;
            for v in 0..n {
                if seen[v] == full {
                    next[v] = 0;
                    continue;
                }
                let mut acc = 0u64;
                let nbrs = g.neighbors(v);
                ops += nbrs.len() as u64;
                for &w in nbrs {
                    acc |= frontier[w as usize];
                }
                let fresh = acc & !seen[v];
                next[v] = fresh;
                reached |= fresh;
            }
            if reached == 0 {
                break;
            }
            for v in 0..n {
                seen[v] |= next[v];
            }
            std::mem::swap(&mut frontier, &mut next);
            let mut bits = reached;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                ecc[base + i] = level;
                bits &= bits - 1;
            }
        }
    }
    (ecc, ops)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn unit_space(n: usize) -> GroundSpace {
        GroundSpace::square(n.max(1) as f64).unwrap()
    }

    pub fn path(n: usize) -> GeometricGraph {
        let coords = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        GeometricGraph::from_edges(unit_space(n), coords, &edges, Some(1.0)).unwrap()
    }

    pub fn cycle(n: usize) -> GeometricGraph {
        let coords = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((n - 1, 0));
        GeometricGraph::from_edges(unit_space(n), coords, &edges, None).unwrap()
    }

    pub fn star(leaves: usize) -> GeometricGraph {
        let coords = (0..=leaves).map(|i| Point::new(i as f64, 0.0)).collect();
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        GeometricGraph::from_edges(unit_space(leaves + 1), coords, &edges, None).unwrap()
    }

    pub fn random_tree(n: usize, seed: u64) -> GeometricGraph {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
        let edges: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
        GeometricGraph::from_edges(unit_space(n), coords, &edges, None).unwrap()
    }
}
