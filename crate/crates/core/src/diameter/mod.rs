//! The separator-hierarchy diameter algorithm.
//!
//! For a guess `ℓ`, [`decide`] discards block pairs whose upper bound
//! `u(A, B)` is below `ℓ` and computes exact `maxdist` for the rest, either
//! straight from the oracle or on an overlay graph. [`compute_diameter`]
//! drives `decide` with a doubling work budget and a binary search over `ℓ`.

mod candidates;
mod overlay;
mod search;

pub use candidates::{enumerate_candidates, CandidatePair, CandidateState, PrunedPair, StopRule};
pub use overlay::OverlayGraph;
pub use search::{
    compute_diameter, framework_diameter, DecideRecord, DiameterConfig, DiameterReport, LeafLevel, SearchStrategy,
    FRAMEWORK_C_LEAF,
};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{GeometricGraph, GraphError, Hops, UNREACHABLE};
use crate::oracle::{Distance, DistanceOracle, OracleError};
use crate::partition::NodeId;
use crate::work::{BudgetExceeded, WorkCounter};

#[derive(Debug, Error, PartialEq)]
pub enum DiameterError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("block size limit {k} must be at least the largest leaf ({max_leaf}) and at most max(n/2, largest leaf) for n = {n}")]
    InvalidK { k: usize, max_leaf: usize, n: usize },
    #[error("guess must be at least 1")]
    InvalidGuess,
    #[error("work budget cap {cap} exhausted before the diameter was determined")]
    BudgetCap { cap: u64 },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// `u(A, B) = 2·ecc(a) + 2·ecc(b) + d(a, b)`, or `2·ecc(a)` when `A = B`.
pub fn upper_bound(o: &DistanceOracle, g: &GeometricGraph, a: NodeId, b: NodeId) -> Hops {
    let (ra, rb) = (o.ecc_rep(a), o.ecc_rep(b));
    if ra.ecc == UNREACHABLE || rb.ecc == UNREACHABLE {
        return UNREACHABLE;
    }
    if a == b {
        return ra.ecc.saturating_mul(2);
    }
    let d = o.query_distance_exact(g, ra.vertex, rb.vertex);
    ra.ecc.saturating_mul(2).saturating_add(rb.ecc.saturating_mul(2)).saturating_add(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Direct,
    Overlay,
}

/// Work estimates for both maxdist engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostEstimate {
    /// `None` for self-pairs, which only the overlay handles.
    pub direct: Option<u64>,
    pub overlay: u64,
}

impl CostEstimate {
    pub fn engine(&self) -> Engine {
        match self.direct {
            Some(d) if d <= self.overlay => Engine::Direct,
            _ => Engine::Overlay,
        }
    }

    pub fn cheaper(&self) -> u64 {
        self.direct.map_or(self.overlay, |d| d.min(self.overlay))
    }
}

/// Estimates `maxdist(A, B)` cost from block sizes, boundary sizes, query
/// chain length and a degree surrogate `deg`.
pub fn estimate_cost(o: &DistanceOracle, a: NodeId, b: NodeId, deg: u64) -> CostEstimate {
    let p = o.partition();
    let (na, nb) = (p.node(a).size() as u64, p.node(b).size() as u64);
    let same = a == b;
    let top = o.lca_node(a, b);
    let chain = o.chain_cost(top);
    let direct = (!same).then(|| na * nb * chain.max(1));
    let nh = if same { na } else { na + nb };
    let s = if same {
        p.node(a).boundary.len() as u64
    } else {
        (p.node(a).boundary.len() + p.node(b).boundary.len()) as u64
    };
    let clique = s * s.saturating_sub(1) / 2;
    let build = nh * deg + clique * chain.max(1);
    let per_source = nh * deg + 2 * clique + 2 * nh;
    CostEstimate { direct, overlay: build.saturating_add(na.saturating_mul(per_source)) }
}

/// Picks the engine with the smaller estimate.
pub fn cost_model(o: &DistanceOracle, a: NodeId, b: NodeId, deg: u64) -> Engine {
    estimate_cost(o, a, b, deg).engine()
}

/// Exact `maxdist(A, B)` for two incomparable blocks by querying the oracle
/// for every cross pair.
pub fn maxdist_direct(o: &DistanceOracle, a: NodeId, b: NodeId, work: &mut WorkCounter) -> Result<Hops, DecideError> {
    let p = o.partition();
    if a == b || p.ancestors(a).any(|x| x == b) || p.ancestors(b).any(|x| x == a) {
        return Err(DecideError::Invalid(DiameterError::Internal(format!(
            "direct maxdist needs disjoint blocks, got {a} and {b}"
        ))));
    }
    let top = o.lca_node(a, b);
    let chain: Vec<NodeId> = p.ancestors(top).filter(|&x| !p.node(x).separator.is_empty()).collect();
    let a_block = &p.node(a).block;
    let b_block = &p.node(b).block;
    // Positions of A and B inside every chain block.
    let pos = |verts: &[u32], x: NodeId| -> Vec<u32> {
        let depth = p.node(x).depth as usize;
        verts.iter().map(|&v| p.position(v as usize, depth) as u32).collect()
    };
    let a_pos: Vec<Vec<u32>> = chain.iter().map(|&x| pos(a_block, x)).collect();
    let b_pos: Vec<Vec<u32>> = chain.iter().map(|&x| pos(b_block, x)).collect();
    let per_row = b_block.len() as u64 * o.chain_cost(top);
    let mut best_row = vec![UNREACHABLE; b_block.len()];
    let mut best = 0;
    for ai in 0..a_block.len() {
        work.charge(per_row.max(1))?;
        best_row.fill(UNREACHABLE);
        for (ci, &x) in chain.iter().enumerate() {
            for j in 0..p.node(x).separator.len() {
                let row = o.row(x, j);
                let du = row[a_pos[ci][ai] as usize];
                if du == UNREACHABLE {
                    continue;
                }
                for (slot, &pb) in best_row.iter_mut().zip(&b_pos[ci]) {
                    let d = du.saturating_add(row[pb as usize]);
                    if d < *slot {
                        *slot = d;
                    }
                }
            }
        }
        best = best.max(best_row.iter().copied().max().unwrap_or(0));
    }
    Ok(best)
}

/// Builds `H_(A,B)` and returns `maxdist(A, B)`.
pub fn maxdist_overlay(
    o: &DistanceOracle,
    g: &GeometricGraph,
    a: NodeId,
    b: NodeId,
    work: &mut WorkCounter,
) -> Result<Hops, BudgetExceeded> {
    OverlayGraph::build(o, g, a, b, work)?.maxdist(work)
}

#[derive(Debug)]
pub enum DecideError {
    Budget(BudgetExceeded),
    Invalid(DiameterError),
}

impl From<BudgetExceeded> for DecideError {
    fn from(e: BudgetExceeded) -> Self {
        DecideError::Budget(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    /// `diam < ℓ`, with certified bounds `lower ≤ diam ≤ upper < ℓ`.
    /// `lower` is the largest exact distance seen; `upper` is the larger of
    /// that and every pruned pair's upper bound.
    Less {
        lower: Hops,
        upper: Hops,
    },
    /// `diam ≥ ℓ`; the value is the exact diameter.
    EqualOrGreater(Hops),
    Timeout,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DecideStats {
    pub splits: usize,
    pub upper_bounds: u64,
    pub candidate_pairs: usize,
    pub owning_blocks: usize,
    pub max_candidates_per_block: usize,
    pub largest_candidate_block: usize,
    /// Candidate pairs by the depth of their deeper block.
    pub candidates_per_depth: Vec<usize>,
    pub evaluated_pairs: usize,
    /// Pairs skipped because `u(A, B)` could not beat the best maxdist found.
    pub skipped_pairs: usize,
    pub direct: usize,
    pub overlay: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiameterVerdict {
    pub outcome: Outcome,
    pub work: u64,
    pub stats: DecideStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecideOptions {
    pub stop: StopRule,
    /// Work budget; `None` for unlimited.
    pub budget: Option<u64>,
    pub record_pruned: bool,
}

impl DecideOptions {
    pub fn target_size(k: usize) -> Self {
        DecideOptions { stop: StopRule::TargetSize(k), budget: None, record_pruned: false }
    }
}

/// Decides how `diam(G)` compares to `ell`.
pub fn decide(
    g: &GeometricGraph,
    o: &DistanceOracle,
    ell: Hops,
    opts: &DecideOptions,
) -> Result<DiameterVerdict, DiameterError> {
    decide_traced(g, o, ell, opts).map(|(v, _)| v)
}

/// Like [`decide`], also returning the final candidate state (absent on timeout).
pub fn decide_traced(
    g: &GeometricGraph,
    o: &DistanceOracle,
    ell: Hops,
    opts: &DecideOptions,
) -> Result<(DiameterVerdict, Option<CandidateState>), DiameterError> {
    if ell == 0 {
        return Err(DiameterError::InvalidGuess);
    }
    if let StopRule::TargetSize(k) = opts.stop {
        let max_leaf = o.partition().max_leaf_size();
        let n = g.n();
        if k < max_leaf || k > (n / 2).max(max_leaf) {
            return Err(DiameterError::InvalidK { k, max_leaf, n });
        }
    }
    let mut work = opts.budget.map_or_else(WorkCounter::unlimited, WorkCounter::with_budget);
    let mut stats = DecideStats::default();
    match run_decide(g, o, ell, opts, &mut work, &mut stats) {
        Ok((outcome, st)) => Ok((DiameterVerdict { outcome, work: work.spent(), stats }, Some(st))),
        Err(DecideError::Budget(_)) => {
            Ok((DiameterVerdict { outcome: Outcome::Timeout, work: work.spent(), stats }, None))
        }
        Err(DecideError::Invalid(e)) => Err(e),
    }
}

fn run_decide(
    g: &GeometricGraph,
    o: &DistanceOracle,
    ell: Hops,
    opts: &DecideOptions,
    work: &mut WorkCounter,
    stats: &mut DecideStats,
) -> Result<(Outcome, CandidateState), DecideError> {
    let p = o.partition();
    let mut st = CandidateState::new(o, g, ell, opts.record_pruned, work)?;
    let enumerated = st.run(o, g, opts.stop, work);
    stats.splits = st.splits;
    stats.upper_bounds = st.upper_bounds;
    let fits = enumerated?;

    stats.candidate_pairs = st.pair_count();
    stats.owning_blocks = st.owning_blocks().count();
    stats.max_candidates_per_block = st.max_candidates_per_block();
    stats.largest_candidate_block = st.owning_blocks().map(|b| p.node(b).size()).max().unwrap_or(0);
    for pair in st.pairs() {
        let depth = p.node(pair.a).depth.max(p.node(pair.b).depth) as usize;
        if stats.candidates_per_depth.len() <= depth {
            stats.candidates_per_depth.resize(depth + 1, 0);
        }
        stats.candidates_per_depth[depth] += 1;
    }

    if !fits && opts.stop == StopRule::CostModel {
        // Even the finest partition's estimated bill exceeds what is left.
        return Err(DecideError::Budget(BudgetExceeded { spent: work.spent(), budget: work.budget() }));
    }

    let mut order: Vec<CandidatePair> = st.pairs().copied().collect();
    order.sort_by_key(|c| (std::cmp::Reverse(c.upper), c.cost.cheaper(), c.a, c.b));
    let mut best: Option<Hops> = None;
    for pair in order {
        if best.is_some_and(|m| pair.upper <= m) {
            stats.skipped_pairs += 1;
            continue;
        }
        let d = match pair.cost.engine() {
            Engine::Direct => {
                stats.direct += 1;
                maxdist_direct(o, pair.a, pair.b, work)?
            }
            Engine::Overlay => {
                stats.overlay += 1;
                maxdist_overlay(o, g, pair.a, pair.b, work)?
            }
        };
        stats.evaluated_pairs += 1;
        best = Some(best.map_or(d, |m| m.max(d)));
    }
    let outcome = match best {
        Some(m) if m >= ell => Outcome::EqualOrGreater(m),
        _ => {
            let lower = best.unwrap_or(0).max(o.ecc_rep(p.root()).ecc);
            let upper = st.max_pruned_upper.map_or(lower, |u| u.max(lower)).min(ell - 1);
            Outcome::Less { lower, upper }
        }
    };
    Ok((outcome, st))
}

/// Exact distance used by tests and callers that need `d(u, v)` with the
/// leaf fallback.
pub fn oracle_distance(o: &DistanceOracle, g: &GeometricGraph, u: usize, v: usize) -> Hops {
    match o.query_distance(u, v) {
        Distance::Exact(d) => d,
        Distance::SameLeafInterior { .. } => o.query_distance_exact(g, u, v),
    }
}
