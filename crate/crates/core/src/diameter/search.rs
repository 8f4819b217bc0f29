//! Budget-doubling search driver around [`decide`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::graph::{GeometricGraph, Hops};
use crate::oracle::{DistanceOracle, DEFAULT_MAX_ENTRIES};
use crate::partition::{induce_partition, leaf_level_for, RecursivePartition};

use super::{decide, DecideOptions, DecideStats, DiameterError, Outcome, StopRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    /// One budget loop; each `decide` descends until its estimated bill fits.
    Refined,
    /// Budget doubling, then block-size doubling, then binary search on `ℓ`.
    SizeDoubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafLevel {
    /// Leaf cells of side at least `c_leaf · r`.
    Auto {
        c_leaf: f64,
    },
    Fixed(u32),
}

/// Leaf cell side over radius used by [`LeafLevel::default`].
pub const FRAMEWORK_C_LEAF: f64 = 2.0;

impl Default for LeafLevel {
    fn default() -> Self {
        LeafLevel::Auto { c_leaf: FRAMEWORK_C_LEAF }
    }
}

impl LeafLevel {
    pub fn resolve(self, g: &GeometricGraph) -> u32 {
        match self {
            LeafLevel::Fixed(l) => l,
            LeafLevel::Auto { c_leaf } => leaf_level_for(g.space().side(), g.radius(), c_leaf),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterConfig {
    pub leaf_level: LeafLevel,
    pub strategy: SearchStrategy,
    /// Use `TargetSize(k)` with this `k` in every round instead of the
    /// strategy's own stop rule.
    pub fixed_k: Option<usize>,
    /// First budget; `None` starts at `2m + n`.
    pub initial_budget: Option<u64>,
    /// Give up once the budget would exceed this.
    pub budget_cap: Option<u64>,
    pub oracle_max_entries: u64,
}

impl Default for DiameterConfig {
    fn default() -> Self {
        DiameterConfig {
            leaf_level: LeafLevel::default(),
            strategy: SearchStrategy::Refined,
            fixed_k: None,
            initial_budget: None,
            budget_cap: None,
            oracle_max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecideRecord {
    pub ell: Hops,
    pub budget: u64,
    /// Block size limit, absent under the cost-model stop rule.
    pub k: Option<usize>,
    pub outcome: Outcome,
    pub work: u64,
    pub stats: DecideStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiameterReport {
    pub diameter: Hops,
    pub leaf_level: u32,
    pub max_leaf_size: usize,
    /// Block size limit of the deciding call, if any.
    pub k: Option<usize>,
    pub oracle_entries: u64,
    pub oracle_work: u64,
    pub decide_work: u64,
    pub total_work: u64,
    pub final_budget: u64,
    pub calls: Vec<DecideRecord>,
}

impl DiameterReport {
    pub fn direct_pairs(&self) -> usize {
        self.calls.iter().map(|c| c.stats.direct).sum()
    }

    pub fn overlay_pairs(&self) -> usize {
        self.calls.iter().map(|c| c.stats.overlay).sum()
    }

    /// Stats of the call that produced the answer, if a call did.
    pub fn final_call(&self) -> Option<&DecideRecord> {
        self.calls.last()
    }
}

/// Builds the partition and oracle, then runs [`compute_diameter`].
pub fn framework_diameter(g: &GeometricGraph, cfg: &DiameterConfig) -> Result<DiameterReport, DiameterError> {
    g.require_connected()?;
    let level = cfg.leaf_level.resolve(g);
    let p = induce_partition(g, level);
    let o = DistanceOracle::build_capped(g, Arc::new(p), cfg.oracle_max_entries)?;
    compute_diameter(g, &o, cfg)
}

/// Certified bounds `lo ≤ diam ≤ hi`.
struct Bounds {
    lo: Hops,
    hi: Hops,
}

/// Exact diameter of a connected graph.
pub fn compute_diameter(
    g: &GeometricGraph,
    o: &DistanceOracle,
    cfg: &DiameterConfig,
) -> Result<DiameterReport, DiameterError> {
    g.require_connected()?;
    let p: &RecursivePartition = o.partition();
    let n = g.n();
    let mut report = DiameterReport {
        diameter: 0,
        leaf_level: p.leaf_level(),
        max_leaf_size: p.max_leaf_size(),
        k: None,
        oracle_entries: o.stored_entries(),
        oracle_work: o.build_work(),
        decide_work: 0,
        total_work: o.build_work(),
        final_budget: 0,
        calls: Vec::new(),
    };
    if n <= 1 {
        return Ok(report);
    }
    // The root representative's eccentricity brackets the diameter.
    let ecc0 = o.ecc_rep(p.root()).ecc;
    let mut bounds = Bounds { lo: ecc0.max(1), hi: ecc0.saturating_mul(2).min((n - 1) as Hops) };
    let mut budget = cfg.initial_budget.unwrap_or(2 * g.m() as u64 + n as u64).max(1);

    let max_leaf = p.max_leaf_size();
    let k_cap = (n / 2).max(max_leaf);
    loop {
        if bounds.lo >= bounds.hi {
            report.diameter = bounds.lo;
            break;
        }
        if cfg.budget_cap.is_some_and(|cap| budget > cap) {
            return Err(DiameterError::BudgetCap { cap: cfg.budget_cap.unwrap_or(0) });
        }
        report.final_budget = budget;
        let found = match (cfg.fixed_k, cfg.strategy) {
            (Some(k), _) => search_round(g, o, StopRule::TargetSize(k), budget, &mut bounds, &mut report)?,
            (None, SearchStrategy::Refined) => {
                search_round(g, o, StopRule::CostModel, budget, &mut bounds, &mut report)?
            }
            (None, SearchStrategy::SizeDoubling) => {
                let mut k = max_leaf;
                loop {
                    let found = search_round(g, o, StopRule::TargetSize(k), budget, &mut bounds, &mut report)?;
                    if found.is_some() || bounds.lo >= bounds.hi || k >= k_cap {
                        break found;
                    }
                    k = (2 * k).min(k_cap);
                }
            }
        };
        if let Some(d) = found {
            report.diameter = d;
            break;
        }
        budget = budget.saturating_mul(2);
    }
    report.k = report.final_call().and_then(|c| c.k);
    report.decide_work = report.calls.iter().map(|c| c.work).sum();
    report.total_work = report.oracle_work + report.decide_work;
    Ok(report)
}

/// Binary search on `ℓ` within the certified bounds; a timeout is read as
/// `ℓ < diam` for the rest of the round only.
fn search_round(
    g: &GeometricGraph,
    o: &DistanceOracle,
    stop: StopRule,
    budget: u64,
    bounds: &mut Bounds,
    report: &mut DiameterReport,
) -> Result<Option<Hops>, DiameterError> {
    let (mut lo, mut hi) = (bounds.lo, bounds.hi);
    while lo <= hi && bounds.lo < bounds.hi {
        let ell = lo + (hi - lo).div_ceil(2);
        let opts = DecideOptions { stop, budget: Some(budget), record_pruned: false };
        let verdict = decide(g, o, ell, &opts)?;
        let k = match stop {
            StopRule::TargetSize(k) => Some(k),
            StopRule::CostModel => None,
        };
        report.calls.push(DecideRecord {
            ell,
            budget,
            k,
            outcome: verdict.outcome,
            work: verdict.work,
            stats: verdict.stats,
        });
        match verdict.outcome {
            Outcome::EqualOrGreater(m) => return Ok(Some(m)),
            Outcome::Less { lower, upper } => {
                bounds.hi = bounds.hi.min(upper);
                bounds.lo = bounds.lo.max(lower);
                hi = hi.min(upper);
                lo = lo.max(lower);
            }
            Outcome::Timeout => lo = ell + 1,
        }
    }
    Ok((bounds.lo >= bounds.hi).then_some(bounds.lo))
}
