//! Exact distance oracle over a recursive partition.
//!
//! For every block `B` and every separator vertex `s` of `B` the oracle keeps
//! `d_{G[B]}(s, ·)` as a dense row indexed by position in `B`. A query for
//! `(u, v)` takes the minimum of `D[s][u] + D[s][v]` over the separators of
//! `lca(leaf(u), leaf(v))` and all of its ancestors.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{GeometricGraph, Hops, UNREACHABLE};
use crate::lca::EulerLca;
use crate::partition::{NodeId, RecursivePartition};

/// Default cap on stored distance entries (4 GiB of `u32`).
pub const DEFAULT_MAX_ENTRIES: u64 = 1 << 30;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle would store {entries} distance entries, above the cap of {cap}")]
    TooLarge { entries: u64, cap: u64 },
    #[error("partition covers {partition} vertices but the graph has {graph}")]
    SizeMismatch { partition: usize, graph: usize },
}

/// Outcome of an oracle query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Exact(Hops),
    /// Both vertices are interior to one leaf block. `detour` is the best route
    /// through a separator, an upper bound on the true distance.
    SameLeafInterior {
        detour: Hops,
    },
}

impl Distance {
    pub fn exact(self) -> Option<Hops> {
        match self {
            Distance::Exact(d) => Some(d),
            Distance::SameLeafInterior { .. } => None,
        }
    }

    pub fn value(self) -> Hops {
        match self {
            Distance::Exact(d) | Distance::SameLeafInterior { detour: d } => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EccRep {
    pub vertex: usize,
    /// Eccentricity inside `G[B]`, [`UNREACHABLE`] when the block is disconnected.
    pub ecc: Hops,
}

#[derive(Debug, Clone)]
pub struct DistanceOracle {
    partition: Arc<RecursivePartition>,
    /// Row-major `|sep(B)| × |B|` table per node.
    tables: Vec<Vec<Hops>>,
    reps: Vec<EccRep>,
    leaf_boundary: Vec<bool>,
    /// Σ |sep| over each node and its ancestors.
    chain_cost: Vec<u64>,
    lca: EulerLca,
    build_work: u64,
}

/// Stored entry count `Σ_B |sep(B)| · |B|`.
pub fn accounted_entries(p: &RecursivePartition) -> u64 {
    p.nodes().iter().map(|n| n.separator.len() as u64 * n.block.len() as u64).sum()
}

/// BFS inside a block from `source`, writing distances by block position.
/// `loc[v]` is v's block position or `u32::MAX` outside. Returns arcs scanned.
fn block_bfs(g: &GeometricGraph, loc: &[u32], source: usize, row: &mut [Hops], queue: &mut Vec<u32>) -> u64 {
    row.fill(UNREACHABLE);
    queue.clear();
    row[loc[source] as usize] = 0;
    queue.push(source as u32);
    let mut head = 0;
    let mut scanned = 0u64;
    while head < queue.len() {
        let u = queue[head] as usize;
        head += 1;
        let next = row[loc[u] as usize] + 1;
        let nbrs = g.neighbors(u);
        scanned += nbrs.len() as u64;
        for &w in nbrs {
            let l = loc[w as usize];
            if l != u32::MAX && row[l as usize] == UNREACHABLE {
                row[l as usize] = next;
                queue.push(w);
            }
        }
    }
    scanned
}

/// Up to 64 block BFS runs at once with one bit per source. Fills `rows`
/// (row-major, one row of `block.len()` per source) and returns the arcs a
/// plain BFS per source would scan, so work accounting matches [`block_bfs`].
fn block_bfs_batch(g: &GeometricGraph, block: &[u32], loc: &[u32], sources: &[u32], rows: &mut [Hops]) -> u64 {
    let size = block.len();
    debug_assert!(sources.len() <= 64 && rows.len() == sources.len() * size);
    rows.fill(UNREACHABLE);
    let mut seen = vec![0u64; size];
    let mut frontier = vec![0u64; size];
    let mut next = vec![0u64; size];
    for (i, &s) in sources.iter().enumerate() {
        let at = loc[s as usize] as usize;
        seen[at] |= 1 << i;
        frontier[at] |= 1 << i;
        rows[i * size + at] = 0;
    }
    let mut level = 0;
    loop {
        level += 1;
        let mut any = 0u64;
        for (at, &v) in block.iter().enumerate() {
            let mut acc = 0u64;
            for &w in g.neighbors(v as usize) {
                let l = loc[w as usize];
                if l != u32::MAX {
                    acc |= frontier[l as usize];
                }
            }
            let fresh = acc & !seen[at];
            next[at] = fresh;
            any |= fresh;
        }
        if any == 0 {
            break;
        }
        for at in 0..size {
            let mut fresh = next[at];
            seen[at] |= fresh;
            while fresh != 0 {
                let i = fresh.trailing_zeros() as usize;
                rows[i * size + at] = level;
                fresh &= fresh - 1;
            }
        }
        std::mem::swap(&mut frontier, &mut next);
    }
    block.iter().zip(&seen).map(|(&v, &bits)| u64::from(bits.count_ones()) * g.neighbors(v as usize).len() as u64).sum()
}

/// Block positions of `node`'s vertices written into `loc`.
fn fill_loc(p: &RecursivePartition, node: NodeId, loc: &mut [u32]) {
    for (i, &v) in p.node(node).block.iter().enumerate() {
        loc[v as usize] = i as u32;
    }
}

fn clear_loc(p: &RecursivePartition, node: NodeId, loc: &mut [u32]) {
    for &v in &p.node(node).block {
        loc[v as usize] = u32::MAX;
    }
}

fn row_ecc(row: &[Hops]) -> Hops {
    row.iter().copied().max().unwrap_or(0)
}

impl DistanceOracle {
    pub fn build(g: &GeometricGraph, partition: impl Into<Arc<RecursivePartition>>) -> Result<Self, OracleError> {
        Self::build_capped(g, partition, DEFAULT_MAX_ENTRIES)
    }

    pub fn build_capped(
        g: &GeometricGraph,
        partition: impl Into<Arc<RecursivePartition>>,
        max_entries: u64,
    ) -> Result<Self, OracleError> {
        let p: Arc<RecursivePartition> = partition.into();
        let covered = p.node(p.root()).size();
        if covered != g.n() {
            return Err(OracleError::SizeMismatch { partition: covered, graph: g.n() });
        }
        let entries = accounted_entries(&p);
        if entries > max_entries {
            return Err(OracleError::TooLarge { entries, cap: max_entries });
        }

        let mut loc = vec![u32::MAX; g.n()];
        let mut built: Vec<(Vec<Hops>, EccRep, u64)> = Vec::with_capacity(p.len());
        for id in 0..p.len() {
            let node = p.node(id);
            let size = node.size();
            fill_loc(&p, id, &mut loc);
            let mut table = vec![UNREACHABLE; node.separator.len() * size];
            let mut work: u64 = if size == 0 {
                0
            } else {
                let loc = &loc;
                table
                    .par_chunks_mut(size * 64)
                    .zip(node.separator.par_chunks(64))
                    .map(|(rows, sources)| block_bfs_batch(g, &node.block, loc, sources, rows))
                    .sum()
            };
            let rep_vertex = match node.parent {
                None => node.block.first().copied(),
                Some(_) => node.boundary.first().or(node.block.first()).copied(),
            };
            let rep = match rep_vertex {
                None => EccRep { vertex: 0, ecc: 0 },
                Some(b) => {
                    let ecc = match node.separator.binary_search(&b) {
                        Ok(j) => row_ecc(&table[j * size..(j + 1) * size]),
                        Err(_) => {
                            let mut row = vec![UNREACHABLE; size];
                            work += block_bfs(g, &loc, b as usize, &mut row, &mut Vec::new());
                            row_ecc(&row)
                        }
                    };
                    EccRep { vertex: b as usize, ecc }
                }
            };
            clear_loc(&p, id, &mut loc);
            built.push((table, rep, work));
        }

        let mut tables = Vec::with_capacity(built.len());
        let mut reps = Vec::with_capacity(built.len());
        let mut build_work = 0;
        for (t, r, w) in built {
            tables.push(t);
            reps.push(r);
            build_work += w;
        }

        let mut leaf_boundary = vec![false; g.n()];
        for leaf in p.leaves() {
            for &v in &p.node(leaf).boundary {
                leaf_boundary[v as usize] = true;
            }
        }
        let mut chain_cost = vec![0u64; p.len()];
        for id in 0..p.len() {
            let own = p.node(id).separator.len() as u64;
            chain_cost[id] = own + p.node(id).parent.map_or(0, |par| chain_cost[par]);
        }
        let children: Vec<Vec<usize>> = p.nodes().iter().map(|n| n.children.clone()).collect();
        let lca = EulerLca::new(&children, p.root());
        Ok(DistanceOracle { partition: p, tables, reps, leaf_boundary, chain_cost, lca, build_work })
    }

    pub fn partition(&self) -> &RecursivePartition {
        &self.partition
    }

    pub fn partition_arc(&self) -> Arc<RecursivePartition> {
        Arc::clone(&self.partition)
    }

    /// Arcs scanned while building.
    pub fn build_work(&self) -> u64 {
        self.build_work
    }

    pub fn stored_entries(&self) -> u64 {
        self.tables.iter().map(|t| t.len() as u64).sum()
    }

    /// `d_{G[B]}(s, v)` for separator vertex index `j` of `node` and `v ∈ node`.
    pub fn table_entry(&self, node: NodeId, j: usize, v: usize) -> Option<Hops> {
        let size = self.partition.node(node).size();
        let local = self.partition.local_index(node, v)?;
        self.tables[node].get(j * size + local).copied()
    }

    /// Distances from separator vertex `j` of `node`, indexed by block position.
    #[inline]
    pub fn row(&self, node: NodeId, j: usize) -> &[Hops] {
        let size = self.partition.node(node).size();
        &self.tables[node][j * size..(j + 1) * size]
    }

    pub fn ecc_rep(&self, node: NodeId) -> EccRep {
        self.reps[node]
    }

    pub fn lca_node(&self, a: NodeId, b: NodeId) -> NodeId {
        self.lca.lca(a, b)
    }

    /// Separator entries a query starting at `node` touches.
    pub fn chain_cost(&self, node: NodeId) -> u64 {
        self.chain_cost[node]
    }

    /// Separator entries touched by a query for `(u, v)`.
    pub fn query_cost(&self, u: usize, v: usize) -> u64 {
        if u == v {
            return 0;
        }
        let p = &self.partition;
        self.chain_cost[self.lca.lca(p.leaf_of(u), p.leaf_of(v))]
    }

    /// Minimum separator detour for `(u, v)` over `start` and its ancestors.
    fn detour_from(&self, start: NodeId, u: usize, v: usize) -> Hops {
        let p = &self.partition;
        let mut best = UNREACHABLE;
        for id in p.ancestors(start) {
            let node = p.node(id);
            if node.separator.is_empty() {
                continue;
            }
            let size = node.size();
            let depth = node.depth as usize;
            let (pu, pv) = (p.position(u, depth), p.position(v, depth));
            let table = &self.tables[id];
            for j in 0..node.separator.len() {
                let row = &table[j * size..(j + 1) * size];
                best = best.min(row[pu].saturating_add(row[pv]));
            }
        }
        best
    }

    pub fn query_distance(&self, u: usize, v: usize) -> Distance {
        if u == v {
            return Distance::Exact(0);
        }
        let p = &self.partition;
        let (lu, lv) = (p.leaf_of(u), p.leaf_of(v));
        let top = self.lca.lca(lu, lv);
        let detour = self.detour_from(top, u, v);
        if lu == lv && !self.leaf_boundary[u] && !self.leaf_boundary[v] {
            Distance::SameLeafInterior { detour }
        } else {
            Distance::Exact(detour)
        }
    }

    /// Exact `d_G(u, v)`, falling back to a BFS inside the shared leaf when
    /// both vertices are leaf-interior.
    pub fn query_distance_exact(&self, g: &GeometricGraph, u: usize, v: usize) -> Hops {
        match self.query_distance(u, v) {
            Distance::Exact(d) => d,
            Distance::SameLeafInterior { detour } => detour.min(self.leaf_distance(g, u, v)),
        }
    }

    /// `d_{G[leaf]}(u, v)` for two vertices of the same leaf.
    pub fn leaf_distance(&self, g: &GeometricGraph, u: usize, v: usize) -> Hops {
        let p = &self.partition;
        let leaf = p.leaf_of(u);
        debug_assert_eq!(leaf, p.leaf_of(v));
        self.leaf_row(g, u)[p.position(v, p.node(leaf).depth as usize)]
    }

    /// `d_{G[leaf(u)]}(u, ·)` by block position.
    fn leaf_row(&self, g: &GeometricGraph, u: usize) -> Vec<Hops> {
        let p = &self.partition;
        let leaf = p.leaf_of(u);
        let mut loc = vec![u32::MAX; g.n()];
        fill_loc(p, leaf, &mut loc);
        let mut row = vec![UNREACHABLE; p.node(leaf).size()];
        block_bfs(g, &loc, u, &mut row, &mut Vec::new());
        row
    }

    /// Exact `d_G(u, ·)` restricted to `targets`, in the order given, using one
    /// leaf BFS for any leaf-interior pairs.
    pub fn distances_from(&self, g: &GeometricGraph, u: usize, targets: &[usize]) -> Vec<Hops> {
        let p = &self.partition;
        let mut leaf_row: Option<Vec<Hops>> = None;
        targets
            .iter()
            .map(|&v| match self.query_distance(u, v) {
                Distance::Exact(d) => d,
                Distance::SameLeafInterior { detour } => {
                    let row = leaf_row.get_or_insert_with(|| self.leaf_row(g, u));
                    detour.min(row[p.position(v, p.node(p.leaf_of(v)).depth as usize)])
                }
            })
            .collect()
    }
}
