//! Top-down candidate enumeration over shrinking flat partitions.
//!
//! Starting from the root self-pair, the largest candidate-owning block is
//! repeatedly replaced by its children. Each child is paired with every
//! partner its parent had (the parent itself yields child-child pairs) and
//! the pair survives only if `u(child, partner) ≥ ℓ`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::graph::{GeometricGraph, Hops};
use crate::oracle::DistanceOracle;
use crate::partition::NodeId;
use crate::work::{BudgetExceeded, WorkCounter};

use super::{estimate_cost, upper_bound, CostEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Split until every candidate-owning block has at most `k` vertices.
    TargetSize(usize),
    /// Split until the estimated bill for the candidate pairs fits the
    /// remaining budget.
    CostModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrunedPair {
    pub a: NodeId,
    pub b: NodeId,
    pub upper: Hops,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidatePair {
    pub a: NodeId,
    pub b: NodeId,
    pub upper: Hops,
    pub cost: CostEstimate,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

#[derive(Debug, Clone)]
pub struct CandidateState {
    ell: Hops,
    partners: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pairs: BTreeMap<(NodeId, NodeId), CandidatePair>,
    heap: BinaryHeap<(usize, Reverse<NodeId>)>,
    bill: u64,
    deg: u64,
    record_pruned: bool,
    pub pruned: Vec<PrunedPair>,
    /// Largest upper bound among pruned pairs.
    pub max_pruned_upper: Option<Hops>,
    pub splits: usize,
    pub upper_bounds: u64,
}

impl CandidateState {
    /// The initial flat partition `{root}`.
    pub fn new(
        o: &DistanceOracle,
        g: &GeometricGraph,
        ell: Hops,
        record_pruned: bool,
        work: &mut WorkCounter,
    ) -> Result<Self, BudgetExceeded> {
        let deg = g.average_degree().ceil() as u64;
        let mut st = CandidateState {
            ell,
            partners: BTreeMap::new(),
            pairs: BTreeMap::new(),
            heap: BinaryHeap::new(),
            bill: 0,
            deg,
            record_pruned,
            pruned: Vec::new(),
            max_pruned_upper: None,
            splits: 0,
            upper_bounds: 0,
        };
        let root = o.partition().root();
        st.consider(o, g, root, root, work)?;
        st.push_if_splittable(o, root);
        Ok(st)
    }

    pub fn ell(&self) -> Hops {
        self.ell
    }

    pub fn pairs(&self) -> impl Iterator<Item = &CandidatePair> {
        self.pairs.values()
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Blocks that own at least one candidate pair.
    pub fn owning_blocks(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.partners.keys().copied()
    }

    pub fn partners_of(&self, block: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.partners.get(&block).into_iter().flatten().copied()
    }

    pub fn max_candidates_per_block(&self) -> usize {
        self.partners.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Estimated cost of evaluating every current candidate pair.
    pub fn bill(&self) -> u64 {
        self.bill
    }

    pub fn largest_block(&mut self, o: &DistanceOracle) -> Option<NodeId> {
        while let Some(&(_, Reverse(id))) = self.heap.peek() {
            if self.partners.contains_key(&id) && !o.partition().node(id).is_leaf() {
                return Some(id);
            }
            self.heap.pop();
        }
        None
    }

    fn push_if_splittable(&mut self, o: &DistanceOracle, id: NodeId) {
        let node = o.partition().node(id);
        if !node.is_leaf() && self.partners.contains_key(&id) {
            self.heap.push((node.size(), Reverse(id)));
        }
    }

    fn consider(
        &mut self,
        o: &DistanceOracle,
        g: &GeometricGraph,
        a: NodeId,
        b: NodeId,
        work: &mut WorkCounter,
    ) -> Result<(), BudgetExceeded> {
        let (a, b) = key(a, b);
        let (ra, rb) = (o.ecc_rep(a).vertex, o.ecc_rep(b).vertex);
        work.charge(if a == b { 1 } else { o.query_cost(ra, rb).max(1) })?;
        self.upper_bounds += 1;
        let upper = upper_bound(o, g, a, b);
        if upper >= self.ell {
            let cost = estimate_cost(o, a, b, self.deg);
            self.bill = self.bill.saturating_add(cost.cheaper());
            self.pairs.insert((a, b), CandidatePair { a, b, upper, cost });
            self.partners.entry(a).or_default().insert(b);
            self.partners.entry(b).or_default().insert(a);
        } else {
            self.max_pruned_upper = Some(self.max_pruned_upper.map_or(upper, |m| m.max(upper)));
            if self.record_pruned {
                self.pruned.push(PrunedPair { a, b, upper });
            }
        }
        Ok(())
    }

    fn remove_pair(&mut self, a: NodeId, b: NodeId) {
        if let Some(pair) = self.pairs.remove(&key(a, b)) {
            self.bill = self.bill.saturating_sub(pair.cost.cheaper());
        }
        for (x, y) in [(a, b), (b, a)] {
            if let Some(set) = self.partners.get_mut(&x) {
                set.remove(&y);
                if set.is_empty() {
                    self.partners.remove(&x);
                }
            }
        }
    }

    /// Replaces `block` by its children.
    pub fn split(
        &mut self,
        o: &DistanceOracle,
        g: &GeometricGraph,
        block: NodeId,
        work: &mut WorkCounter,
    ) -> Result<(), BudgetExceeded> {
        let partners: Vec<NodeId> = self.partners_of(block).collect();
        for &y in &partners {
            self.remove_pair(block, y);
        }
        let children = o.partition().node(block).children.clone();
        self.splits += 1;
        for &y in &partners {
            if y == block {
                for (i, &ci) in children.iter().enumerate() {
                    for &cj in &children[i..] {
                        self.consider(o, g, ci, cj, work)?;
                    }
                }
            } else {
                for &c in &children {
                    self.consider(o, g, c, y, work)?;
                }
            }
        }
        for &c in &children {
            self.push_if_splittable(o, c);
        }
        Ok(())
    }

    /// Splits until `stop` fires or nothing splittable remains. Returns
    /// whether the stop rule fired.
    pub fn run(
        &mut self,
        o: &DistanceOracle,
        g: &GeometricGraph,
        stop: StopRule,
        work: &mut WorkCounter,
    ) -> Result<bool, BudgetExceeded> {
        let fired = |st: &Self, block: Option<NodeId>, work: &WorkCounter| match stop {
            StopRule::TargetSize(k) => block.is_none_or(|b| o.partition().node(b).size() <= k),
            StopRule::CostModel => st.bill <= work.remaining(),
        };
        while let Some(block) = self.largest_block(o) {
            if fired(self, Some(block), work) {
                return Ok(true);
            }
            self.split(o, g, block, work)?;
        }
        Ok(fired(self, None, work))
    }
}

/// Runs the enumeration from `{root}` under `stop`.
pub fn enumerate_candidates(
    o: &DistanceOracle,
    g: &GeometricGraph,
    ell: Hops,
    stop: StopRule,
    record_pruned: bool,
    work: &mut WorkCounter,
) -> Result<CandidateState, BudgetExceeded> {
    let mut st = CandidateState::new(o, g, ell, record_pruned, work)?;
    st.run(o, g, stop, work)?;
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpaceKind;
    use crate::graph::{fixtures, maxdist_bruteforce, naive_diameter};
    use crate::graphgen::{sample_rgg, RggParams};
    use crate::partition::{induce_partition, RecursivePartition};

    fn block(o: &DistanceOracle, id: NodeId) -> Vec<usize> {
        o.partition().node(id).block.iter().map(|&v| v as usize).collect()
    }

    #[test]
    fn root_pruned_when_ell_exceeds_twice_ecc() {
        let g = fixtures::path(5);
        let o = DistanceOracle::build(&g, RecursivePartition::from_words(&g, &vec![vec![]; 5]).unwrap()).unwrap();
        let mut w = WorkCounter::unlimited();
        let st = enumerate_candidates(&o, &g, 9, StopRule::TargetSize(1), true, &mut w).unwrap();
        assert_eq!(st.pair_count(), 0);
        assert_eq!(st.pruned, vec![PrunedPair { a: 0, b: 0, upper: 8 }]);
    }

    #[test]
    fn path_split_keeps_cross_pair() {
        let g = fixtures::path(5);
        let words = vec![vec![1], vec![1], vec![1], vec![2], vec![2]];
        let o = DistanceOracle::build(&g, RecursivePartition::from_words(&g, &words).unwrap()).unwrap();
        let mut w = WorkCounter::unlimited();
        let st = enumerate_candidates(&o, &g, 4, StopRule::TargetSize(3), true, &mut w).unwrap();
        assert_eq!(st.splits, 1);
        let (a, b) = (o.partition().node(0).children[0], o.partition().node(0).children[1]);
        let pair = st.pairs().find(|p| key(p.a, p.b) == key(a, b)).unwrap();
        assert_eq!(pair.upper, 7);
        // Self pairs: u(A,A) = 4 survives, u(B,B) = 2 is pruned.
        assert!(st.pairs().any(|p| (p.a, p.b) == (a, a)));
        assert!(st.pruned.iter().any(|p| (p.a, p.b) == (b, b) && p.upper == 2));
    }

    #[test]
    fn pruned_pairs_are_below_ell() {
        for seed in 0..8 {
            let kind = if seed % 2 == 0 { SpaceKind::Square } else { SpaceKind::Torus };
            let g = sample_rgg(&RggParams::with_exponent(300, 0.2, kind, seed)).unwrap();
            if !g.is_connected() {
                continue;
            }
            let diam = naive_diameter(&g).unwrap();
            let o = DistanceOracle::build(&g, induce_partition(&g, 3)).unwrap();
            let k = o.partition().max_leaf_size();
            for ell in [diam.saturating_sub(1).max(1), diam, diam + 1] {
                let mut w = WorkCounter::unlimited();
                let st = enumerate_candidates(&o, &g, ell, StopRule::TargetSize(k), true, &mut w).unwrap();
                for p in &st.pruned {
                    assert!(maxdist_bruteforce(&g, &block(&o, p.a), &block(&o, p.b)) < ell);
                }
                assert!(st.owning_blocks().all(|b| o.partition().node(b).size() <= k));
            }
        }
    }
}
