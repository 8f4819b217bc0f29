//! Overlay graphs `H_(A,B)`: `G[A ∪ B]` plus a weighted clique on the
//! boundary vertices of `A` and `B` carrying exact `G`-distances.

use crate::graph::{GeometricGraph, Hops, UNREACHABLE};
use crate::oracle::{Distance, DistanceOracle};
use crate::partition::NodeId;
use crate::work::{BudgetExceeded, WorkCounter};

#[derive(Debug, Clone)]
pub struct OverlayGraph {
    /// Global ids; `A` occupies `0..a_len`, then `B` when `B ≠ A`.
    vertices: Vec<u32>,
    a_len: usize,
    same: bool,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<Hops>,
    boundary: Vec<u32>,
    unit: bool,
}

/// Reusable Dial bucket queue.
#[derive(Debug, Default)]
struct Buckets {
    slots: Vec<Vec<u32>>,
}

impl OverlayGraph {
    /// `a` and `b` must be equal or disjoint, as blocks of one flat partition are.
    pub fn build(
        o: &DistanceOracle,
        g: &GeometricGraph,
        a: NodeId,
        b: NodeId,
        work: &mut WorkCounter,
    ) -> Result<Self, BudgetExceeded> {
        let p = o.partition();
        let same = a == b;
        debug_assert!(same || !(p.ancestors(a).any(|x| x == b) || p.ancestors(b).any(|x| x == a)));
        let a_block = &p.node(a).block;
        let mut vertices = a_block.clone();
        let mut boundary: Vec<u32> = Vec::new();
        let a_len = vertices.len();
        if !same {
            vertices.extend_from_slice(&p.node(b).block);
        }
        let local = |v: usize| -> Option<usize> {
            p.local_index(a, v).or_else(|| if same { None } else { p.local_index(b, v).map(|i| a_len + i) })
        };
        boundary.extend(p.node(a).boundary.iter().map(|&v| local(v as usize).unwrap() as u32));
        if !same {
            boundary.extend(p.node(b).boundary.iter().map(|&v| local(v as usize).unwrap() as u32));
        }

        let h = vertices.len();
        let mut adj: Vec<Vec<(u32, Hops)>> = vec![Vec::new(); h];
        let mut scanned = 0u64;
        for (i, &v) in vertices.iter().enumerate() {
            let nbrs = g.neighbors(v as usize);
            scanned += nbrs.len() as u64;
            for &w in nbrs {
                if let Some(j) = local(w as usize) {
                    adj[i].push((j as u32, 1));
                }
            }
        }
        work.charge(scanned)?;

        for (x, &si) in boundary.iter().enumerate() {
            let s = vertices[si as usize] as usize;
            for &ti in &boundary[x + 1..] {
                let t = vertices[ti as usize] as usize;
                work.charge(o.query_cost(s, t))?;
                let d = match o.query_distance(s, t) {
                    Distance::Exact(d) => d,
                    Distance::SameLeafInterior { .. } => {
                        let d = o.query_distance_exact(g, s, t);
                        work.charge(o.partition().node(o.partition().leaf_of(s)).size() as u64)?;
                        d
                    }
                };
                if d != UNREACHABLE && d > 1 {
                    adj[si as usize].push((ti, d));
                    adj[ti as usize].push((si, d));
                }
            }
        }

        let mut offsets = Vec::with_capacity(h + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        for list in adj {
            for (t, w) in list {
                targets.push(t);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        let unit = weights.iter().all(|&w| w == 1);
        Ok(OverlayGraph { vertices, a_len, same, offsets, targets, weights, boundary, unit })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn global(&self, local: usize) -> usize {
        self.vertices[local] as usize
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    /// Local ids of the clique vertices.
    pub fn boundary(&self) -> &[u32] {
        &self.boundary
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    fn b_range(&self) -> std::ops::Range<usize> {
        if self.same {
            0..self.a_len
        } else {
            self.a_len..self.vertices.len()
        }
    }

    /// Weighted distances from local vertex `src`; returns work spent.
    fn sssp(&self, src: usize, dist: &mut [Hops], buckets: &mut Buckets) -> u64 {
        if self.unit {
            return self.bfs(src, dist, buckets);
        }
        dist.fill(UNREACHABLE);
        dist[src] = 0;
        if buckets.slots.is_empty() {
            buckets.slots.push(Vec::new());
        }
        buckets.slots[0].push(src as u32);
        let mut pending = 1usize;
        let mut cur = 0usize;
        let mut ops = 1u64;
        while pending > 0 {
            let Some(v) = buckets.slots[cur].pop() else {
                cur += 1;
                continue;
            };
            pending -= 1;
            ops += 1;
            let v = v as usize;
            if dist[v] as usize != cur {
                continue;
            }
            let (lo, hi) = (self.offsets[v], self.offsets[v + 1]);
            ops += (hi - lo) as u64;
            for (&w, &wt) in self.targets[lo..hi].iter().zip(&self.weights[lo..hi]) {
                let nd = dist[v] + wt;
                if nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    let slot = nd as usize;
                    if slot >= buckets.slots.len() {
                        buckets.slots.resize_with(slot + 1, Vec::new);
                    }
                    buckets.slots[slot].push(w);
                    pending += 1;
                    ops += 1;
                }
            }
        }
        ops
    }

    /// Plain BFS when every edge has weight 1. Queue pushes and pops are
    /// charged like bucket operations.
    fn bfs(&self, src: usize, dist: &mut [Hops], buckets: &mut Buckets) -> u64 {
        dist.fill(UNREACHABLE);
        dist[src] = 0;
        if buckets.slots.is_empty() {
            buckets.slots.push(Vec::new());
        }
        let queue = &mut buckets.slots[0];
        queue.clear();
        queue.push(src as u32);
        let mut head = 0;
        let mut ops = 0u64;
        while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            let (lo, hi) = (self.offsets[v], self.offsets[v + 1]);
            ops += (hi - lo) as u64;
            let next = dist[v] + 1;
            for &w in &self.targets[lo..hi] {
                if dist[w as usize] == UNREACHABLE {
                    dist[w as usize] = next;
                    queue.push(w);
                }
            }
        }
        let touched = queue.len() as u64;
        queue.clear();
        ops + 2 * touched
    }

    /// `d_H(src, ·)` indexed by local id.
    pub fn distances_from(&self, src: usize) -> Vec<Hops> {
        let mut dist = vec![UNREACHABLE; self.len()];
        self.sssp(src, &mut dist, &mut Buckets::default());
        dist
    }

    /// `maxdist(A, B)` by one shortest-path run per vertex of `A`.
    pub fn maxdist(&self, work: &mut WorkCounter) -> Result<Hops, BudgetExceeded> {
        let targets = self.b_range();
        let mut best = 0;
        if self.unit {
            for start in (0..self.a_len).step_by(64) {
                let batch = self.bfs_batch(start..(start + 64).min(self.a_len), targets.clone());
                for (ops, far) in batch {
                    work.charge(ops)?;
                    best = best.max(far);
                }
            }
            return Ok(best);
        }
        let mut dist = vec![UNREACHABLE; self.len()];
        let mut buckets = Buckets::default();
        for src in 0..self.a_len {
            work.charge(self.sssp(src, &mut dist, &mut buckets))?;
            let far = dist[targets.clone()].iter().copied().max().unwrap_or(0);
            best = best.max(far);
        }
        Ok(best)
    }

    /// [`Self::bfs`] from up to 64 sources at once, one bit per source.
    /// Returns per source the ops `bfs` would charge and the largest
    /// distance into `targets`.
    fn bfs_batch(&self, sources: std::ops::Range<usize>, targets: std::ops::Range<usize>) -> Vec<(u64, Hops)> {
        let h = self.len();
        let width = sources.len();
        debug_assert!(width <= 64);
        let mut seen = vec![0u64; h];
        let mut frontier = vec![0u64; h];
        let mut next = vec![0u64; h];
        let mut far = vec![0 as Hops; width];
        for (i, s) in sources.clone().enumerate() {
            seen[s] |= 1 << i;
            frontier[s] |= 1 << i;
        }
        let mut level: Hops = 0;
        loop {
            level += 1;
            let mut any = 0u64;
            for v in 0..h {
                let mut acc = 0u64;
                for &w in &self.targets[self.offsets[v]..self.offsets[v + 1]] {
                    acc |= frontier[w as usize];
                }
                let fresh = acc & !seen[v];
                next[v] = fresh;
                any |= fresh;
            }
            if any == 0 {
                break;
            }
            for v in 0..h {
                seen[v] |= next[v];
            }
            for t in targets.clone() {
                let mut fresh = next[t];
                while fresh != 0 {
                    far[fresh.trailing_zeros() as usize] = level;
                    fresh &= fresh - 1;
                }
            }
            std::mem::swap(&mut frontier, &mut next);
        }
        let mut ops = vec![0u64; width];
        for (v, &reached) in seen.iter().enumerate() {
            let cost = (self.offsets[v + 1] - self.offsets[v]) as u64 + 2;
            let mut bits = reached;
            while bits != 0 {
                ops[bits.trailing_zeros() as usize] += cost;
                bits &= bits - 1;
            }
        }
        let all = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        for t in targets {
            let mut missing = !seen[t] & all;
            while missing != 0 {
                far[missing.trailing_zeros() as usize] = UNREACHABLE;
                missing &= missing - 1;
            }
        }
        ops.into_iter().zip(far).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpaceKind;
    use crate::graph::{bfs, fixtures, maxdist_bruteforce};
    use crate::graphgen::{sample_rgg, RggParams};
    use crate::partition::{induce_partition, RecursivePartition};
    use rand::{Rng, SeedableRng};

    #[test]
    fn batched_maxdist_matches_per_source() {
        let g = sample_rgg(&RggParams::with_exponent(300, 0.25, SpaceKind::Torus, 8)).unwrap();
        let o = DistanceOracle::build(&g, RecursivePartition::from_words(&g, &vec![vec![]; g.n()]).unwrap()).unwrap();
        let h = OverlayGraph::build(&o, &g, 0, 0, &mut WorkCounter::unlimited()).unwrap();
        assert!(h.unit);
        let (mut work, mut best) = (0, 0);
        let mut dist = vec![0; h.len()];
        for src in 0..h.len() {
            work += h.bfs(src, &mut dist, &mut Buckets::default());
            best = best.max(*dist.iter().max().unwrap());
        }
        let mut counter = WorkCounter::unlimited();
        assert_eq!(h.maxdist(&mut counter).unwrap(), best);
        assert_eq!(counter.spent(), work);
        let mut capped = WorkCounter::with_budget(work / 2);
        assert!(h.maxdist(&mut capped).is_err());
    }

    #[test]
    fn path_split_overlay() {
        let g = fixtures::path(5);
        let words = vec![vec![1], vec![1], vec![1], vec![2], vec![2]];
        let o = DistanceOracle::build(&g, RecursivePartition::from_words(&g, &words).unwrap()).unwrap();
        let (a, b) = (o.partition().node(0).children[0], o.partition().node(0).children[1]);
        let h = OverlayGraph::build(&o, &g, a, b, &mut WorkCounter::unlimited()).unwrap();
        assert_eq!(h.vertices(), &[0, 1, 2, 3, 4]);
        assert_eq!(h.boundary(), &[2, 3]);
        assert_eq!(h.edge_count(), 4);
        assert_eq!(h.distances_from(0)[4], 4);
        assert_eq!(h.maxdist(&mut WorkCounter::unlimited()).unwrap(), 4);
    }

    #[test]
    fn root_self_overlay_is_the_graph() {
        let g = fixtures::cycle(9);
        let o = DistanceOracle::build(&g, RecursivePartition::from_words(&g, &vec![vec![]; 9]).unwrap()).unwrap();
        let h = OverlayGraph::build(&o, &g, 0, 0, &mut WorkCounter::unlimited()).unwrap();
        assert_eq!(h.len(), 9);
        assert_eq!(h.edge_count(), g.m());
        assert_eq!(h.maxdist(&mut WorkCounter::unlimited()).unwrap(), 4);
    }

    #[test]
    fn overlay_distances_match_graph() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for seed in 0..6 {
            let kind = if seed % 2 == 0 { SpaceKind::Square } else { SpaceKind::Torus };
            let g = sample_rgg(&RggParams::with_exponent(250, 0.2, kind, seed)).unwrap();
            let o = DistanceOracle::build(&g, induce_partition(&g, 2)).unwrap();
            let nodes = o.partition().len();
            for _ in 0..4 {
                let a = rng.gen_range(0..nodes);
                let b = if rng.gen_bool(0.3) { a } else { rng.gen_range(0..nodes) };
                let p = o.partition();
                let overlap = p.ancestors(a).any(|x| x == b) || p.ancestors(b).any(|x| x == a);
                if overlap && a != b {
                    continue;
                }
                let h = OverlayGraph::build(&o, &g, a, b, &mut WorkCounter::unlimited()).unwrap();
                for src in 0..h.len() {
                    let truth = bfs(&g, h.global(src), None).unwrap().dist;
                    let dh = h.distances_from(src);
                    for t in 0..h.len() {
                        assert_eq!(dh[t], truth[h.global(t)]);
                    }
                }
                let av: Vec<usize> = p.node(a).block.iter().map(|&v| v as usize).collect();
                let bv: Vec<usize> = p.node(b).block.iter().map(|&v| v as usize).collect();
                assert_eq!(h.maxdist(&mut WorkCounter::unlimited()).unwrap(), maxdist_bruteforce(&g, &av, &bv));
            }
        }
    }
}
