//! Verifiers for the hard stretch invariant and estimators for the
//! framework properties on concrete instances.
//!
//! Only exact invariants carry a pass/fail verdict. Everything else is a
//! measurement reported as CSV rows.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::SpaceKind;
use crate::graph::{BfsScratch, GeometricGraph, Hops, UNREACHABLE};
use crate::partition::{check_balance, check_separators, NodeId, RecursivePartition};

/// Largest `n` for which an all-pairs distance matrix is built.
pub const ALL_PAIRS_MAX_N: usize = 3000;
/// Cap on `Σ |B| · arcs(B)` when computing every block diameter.
pub const BLOCK_DIAMETER_MAX_WORK: u64 = 1 << 36;
/// CSV schema version written in every row.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum PropError {
    #[error("n = {n} exceeds the all-pairs budget of {cap} vertices")]
    TooLarge { n: usize, cap: usize },
    #[error("block diameters would scan about {work} arcs, above the budget of {cap}")]
    BlockWork { work: u64, cap: u64 },
}

/// Exact all-pairs hop distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Hops>,
    ecc: Vec<Hops>,
}

impl DistanceMatrix {
    pub fn compute(g: &GeometricGraph) -> Result<Self, PropError> {
        let n = g.n();
        if n > ALL_PAIRS_MAX_N {
            return Err(PropError::TooLarge { n, cap: ALL_PAIRS_MAX_N });
        }
        let mut d = vec![UNREACHABLE; n * n];
        d.par_chunks_mut(n.max(1)).enumerate().for_each_init(
            || BfsScratch::new(n),
            |scratch, (v, row)| {
                scratch.run(g, v);
                row.copy_from_slice(&scratch.dist);
            },
        );
        let ecc = (0..n)
            .map(|v| d[v * n..(v + 1) * n].iter().copied().filter(|&x| x != UNREACHABLE).max().unwrap_or(0))
            .collect();
        Ok(DistanceMatrix { n, d, ecc })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> Hops {
        self.d[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[Hops] {
        &self.d[u * self.n..(u + 1) * self.n]
    }

    pub fn ecc(&self, v: usize) -> Hops {
        self.ecc[v]
    }

    pub fn diameter(&self) -> Hops {
        self.ecc.iter().copied().max().unwrap_or(0)
    }
}

/// Ball around `center` containing the covered members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ball {
    pub center: usize,
    pub radius: Hops,
}

/// Greedy cover of `set` by graph balls centered at members. Each ball is
/// centered at the lowest uncovered member and its radius grows while the
/// next distance layer still contains an uncovered member.
pub fn greedy_cover(dm: &DistanceMatrix, set: &[usize]) -> Vec<Ball> {
    let mut uncovered: BTreeSet<usize> = set.iter().copied().collect();
    let mut balls = Vec::new();
    let mut layers: Vec<bool> = Vec::new();
    while let Some(&c) = uncovered.iter().next() {
        let row = dm.row(c);
        layers.clear();
        for &w in &uncovered {
            let d = row[w];
            if d == UNREACHABLE {
                continue;
            }
            if layers.len() <= d as usize {
                layers.resize(d as usize + 1, false);
            }
            layers[d as usize] = true;
        }
        let radius = layers.iter().take_while(|&&hit| hit).count() as Hops - 1;
        uncovered.retain(|&w| row[w] > radius);
        balls.push(Ball { center: c, radius });
    }
    balls
}

/// Greedy cover of `set` by balls of a fixed radius centered at the lowest
/// uncovered member.
pub fn greedy_cover_fixed(dm: &DistanceMatrix, set: &[usize], radius: Hops) -> Vec<Ball> {
    let mut uncovered: BTreeSet<usize> = set.iter().copied().collect();
    let mut balls = Vec::new();
    while let Some(&c) = uncovered.iter().next() {
        let row = dm.row(c);
        uncovered.retain(|&w| row[w] > radius);
        balls.push(Ball { center: c, radius });
    }
    balls
}

/// Plug-in estimate `n^{1/2} r^{-7/3} + 1` for both `d_local` and `d_corner`.
pub fn plug_in_slack(n: usize, r: f64) -> f64 {
    (n as f64).sqrt() * r.powf(-7.0 / 3.0) + 1.0
}

/// Pairs grouped by source: every pair when `n ≤ all_pairs_n`, otherwise
/// about `pairs` random pairs over `⌈√pairs⌉` random sources.
fn sample_pairs(n: usize, pairs: usize, all_pairs_n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, Vec<usize>)> {
    if n <= all_pairs_n {
        return (0..n).map(|s| (s, (0..n).collect())).collect();
    }
    let sources = ((pairs as f64).sqrt().ceil() as usize).clamp(1, n);
    let per = pairs.div_ceil(sources);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    ids.truncate(sources);
    ids.sort_unstable();
    ids.into_iter().map(|s| (s, (0..per).map(|_| rng.gen_range(0..n)).collect())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StretchViolation {
    pub u: usize,
    pub v: usize,
    pub hops: Hops,
    pub bound: Hops,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerStretch {
    pub pairs: usize,
    pub violations: usize,
    pub first_violation: Option<StretchViolation>,
}

impl LowerStretch {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// `⌈d_X / r⌉` with a relative tolerance so that an edge of length exactly
/// `r` is not pushed to 2 by rounding.
fn hop_lower_bound(dx: f64, r: f64) -> Hops {
    let q = dx / r;
    (q * (1.0 - 1e-12)).ceil() as Hops
}

/// `d_G(u,v) ≥ ⌈d_X(u,v)/r⌉` on `pairs` sampled pairs, and on all pairs when
/// `n ≤ 300`.
pub fn check_lower_stretch(g: &GeometricGraph, pairs: usize, seed: u64) -> LowerStretch {
    let r = g.radius();
    let space = *g.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = sample_pairs(g.n(), pairs, 300, &mut rng);
    let mut scratch = BfsScratch::new(g.n());
    let mut out = LowerStretch { pairs: 0, violations: 0, first_violation: None };
    for (s, targets) in plan {
        scratch.run(g, s);
        for t in targets {
            out.pairs += 1;
            let hops = scratch.dist[t];
            let bound = hop_lower_bound(space.distance(g.coord(s), g.coord(t)), r);
            if hops < bound {
                out.violations += 1;
                out.first_violation.get_or_insert(StretchViolation { u: s, v: t, hops, bound });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StretchBucket {
    /// Pairs with `⌊d_X / r⌋ = bucket`.
    pub bucket: u32,
    pub pairs: usize,
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperStretch {
    pub pairs: usize,
    pub max_excess: f64,
    pub p95_excess: f64,
    pub buckets: Vec<StretchBucket>,
}

/// Stretch excess `d_G · r / d_X − 1` over sampled connected pairs with
/// `d_X > r`.
pub fn measure_upper_stretch(g: &GeometricGraph, pairs: usize, seed: u64) -> UpperStretch {
    let r = g.radius();
    let space = *g.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = sample_pairs(g.n(), pairs, 0, &mut rng);
    let mut scratch = BfsScratch::new(g.n());
    let mut excess = Vec::new();
    let mut buckets: Vec<StretchBucket> = Vec::new();
    for (s, targets) in plan {
        scratch.run(g, s);
        for t in targets {
            let dx = space.distance(g.coord(s), g.coord(t));
            let hops = scratch.dist[t];
            if dx <= r || hops == UNREACHABLE {
                continue;
            }
            let e = f64::from(hops) * r / dx - 1.0;
            let b = (dx / r).floor() as u32;
            if buckets.len() <= b as usize {
                buckets.extend((buckets.len() as u32..=b).map(|bucket| StretchBucket {
                    bucket,
                    pairs: 0,
                    max_excess: f64::NEG_INFINITY,
                }));
            }
            let slot = &mut buckets[b as usize];
            slot.pairs += 1;
            slot.max_excess = slot.max_excess.max(e);
            excess.push(e);
        }
    }
    buckets.retain(|b| b.pairs > 0);
    excess.sort_by(f64::total_cmp);
    let p95_excess = quantile(&excess, 0.95);
    UpperStretch { pairs: excess.len(), max_excess: excess.last().copied().unwrap_or(0.0), p95_excess, buckets }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverStats {
    pub x: Hops,
    /// Vertices whose sets were covered.
    pub sampled: usize,
    /// Largest covered set.
    pub max_set: usize,
    pub max_cover: usize,
    pub mean_cover: f64,
    pub max_radius: Hops,
    /// `max_radius / (x + slack)`.
    pub scaled_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalPartners {
    pub diameter: Hops,
    pub slack: f64,
    pub per_x: Vec<CoverStats>,
}

/// Covers of the x-diametric partner sets `{w : d(v,w) ≥ diam − x}` of
/// `samples` random vertices.
pub fn measure_local_partners(
    g: &GeometricGraph,
    dm: &DistanceMatrix,
    x_grid: &[Hops],
    samples: usize,
    seed: u64,
) -> LocalPartners {
    let n = dm.n();
    let diameter = dm.diameter();
    let slack = plug_in_slack(n, g.radius());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sources: Vec<usize> = (0..n).collect();
    sources.shuffle(&mut rng);
    sources.truncate(samples.min(n));
    sources.sort_unstable();
    let per_x = x_grid
        .iter()
        .map(|&x| {
            let cut = diameter.saturating_sub(x);
            let covers: Vec<(usize, Vec<Ball>)> = sources
                .par_iter()
                .map(|&v| {
                    let set: Vec<usize> =
                        (0..n).filter(|&w| dm.get(v, w) != UNREACHABLE && dm.get(v, w) >= cut).collect();
                    (set.len(), greedy_cover(dm, &set))
                })
                .collect();
            let max_radius = covers.iter().flat_map(|(_, c)| c).map(|b| b.radius).max().unwrap_or(0);
            CoverStats {
                x,
                sampled: covers.len(),
                max_set: covers.iter().map(|(s, _)| *s).max().unwrap_or(0),
                max_cover: covers.iter().map(|(_, c)| c.len()).max().unwrap_or(0),
                mean_cover: covers.iter().map(|(_, c)| c.len()).sum::<usize>() as f64 / covers.len().max(1) as f64,
                max_radius,
                scaled_radius: f64::from(max_radius) / (f64::from(x) + slack),
            }
        })
        .collect();
    LocalPartners { diameter, slack, per_x }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerStats {
    pub x: Hops,
    /// Vertices owning an x-diametric partner.
    pub owners: usize,
    pub fraction: f64,
    pub cover: usize,
    pub max_radius: Hops,
    pub scaled_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FewCorners {
    pub diameter: Hops,
    pub slack: f64,
    pub per_x: Vec<CornerStats>,
}

/// Covers of `{v : ecc(v) ≥ diam − x}`.
pub fn measure_few_corners(g: &GeometricGraph, dm: &DistanceMatrix, x_grid: &[Hops]) -> FewCorners {
    let n = dm.n();
    let diameter = dm.diameter();
    let slack = plug_in_slack(n, g.radius());
    let per_x = x_grid
        .iter()
        .map(|&x| {
            let cut = diameter.saturating_sub(x);
            let owners: Vec<usize> = (0..n).filter(|&v| dm.ecc(v) >= cut).collect();
            let cover = greedy_cover(dm, &owners);
            let max_radius = cover.iter().map(|b| b.radius).max().unwrap_or(0);
            CornerStats {
                x,
                owners: owners.len(),
                fraction: owners.len() as f64 / n.max(1) as f64,
                cover: cover.len(),
                max_radius,
                scaled_radius: f64::from(max_radius) / (f64::from(x) + slack),
            }
        })
        .collect();
    FewCorners { diameter, slack, per_x }
}

/// Exact diameter of `G[block]`, `None` if it is disconnected.
pub fn block_diameter(g: &GeometricGraph, block: &[u32]) -> Option<Hops> {
    let h = block.len();
    if h <= 1 {
        return Some(0);
    }
    let mut pos = std::collections::HashMap::with_capacity(h);
    for (i, &v) in block.iter().enumerate() {
        pos.insert(v, i as u32);
    }
    let mut offsets = Vec::with_capacity(h + 1);
    let mut targets = Vec::new();
    offsets.push(0);
    for &v in block {
        targets.extend(g.neighbors(v as usize).iter().filter_map(|w| pos.get(w).copied()));
        offsets.push(targets.len());
    }
    let mut dist = vec![UNREACHABLE; h];
    let mut queue = Vec::with_capacity(h);
    let mut best = 0;
    for s in 0..h {
        dist.fill(UNREACHABLE);
        dist[s] = 0;
        queue.clear();
        queue.push(s as u32);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            for &w in &targets[offsets[v]..offsets[v + 1]] {
                if dist[w as usize] == UNREACHABLE {
                    dist[w as usize] = dist[v] + 1;
                    queue.push(w);
                }
            }
        }
        if queue.len() < h {
            return None;
        }
        best = best.max(dist[*queue.last().unwrap() as usize]);
    }
    Some(best)
}

/// [`block_diameter`] for every node of `p`, indexed by node id.
pub fn block_diameters(g: &GeometricGraph, p: &RecursivePartition) -> Result<Vec<Option<Hops>>, PropError> {
    let deg = g.average_degree();
    let work: f64 = p.nodes().iter().map(|nd| (nd.size() as f64).powi(2) * deg).sum();
    let work = work as u64;
    if work > BLOCK_DIAMETER_MAX_WORK {
        return Err(PropError::BlockWork { work, cap: BLOCK_DIAMETER_MAX_WORK });
    }
    Ok(p.nodes().par_iter().map(|nd| block_diameter(g, &nd.block)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthDiameters {
    pub depth: u32,
    pub blocks: usize,
    pub min_diameter: Hops,
    pub max_diameter: Hops,
    /// `max / min` over connected blocks of at least two vertices.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeDiameters {
    pub root_diameter: Option<Hops>,
    pub per_depth: Vec<DepthDiameters>,
    /// Max over parent/child pairs of `diam(parent) / diam(child)`.
    pub max_parent_child_ratio: f64,
    /// Range of `diam · r / √|B|`.
    pub min_scaled: f64,
    pub max_scaled: f64,
    pub disconnected_blocks: usize,
}

/// Block diameters per depth and their scaling with `√|B| / r`. Blocks with
/// fewer than two vertices or a disconnected induced graph are excluded
/// from the ratios.
pub fn check_size_dependent_diameters(
    g: &GeometricGraph,
    p: &RecursivePartition,
    diams: &[Option<Hops>],
) -> SizeDiameters {
    let r = g.radius();
    let usable = |id: NodeId| diams[id].filter(|&d| d > 0 && p.node(id).size() >= 2);
    let max_depth = p.nodes().iter().map(|nd| nd.depth).max().unwrap_or(0);
    let mut per_depth = Vec::new();
    for depth in 0..=max_depth {
        let ds: Vec<Hops> = (0..p.len()).filter(|&id| p.node(id).depth == depth).filter_map(usable).collect();
        if let (Some(&lo), Some(&hi)) = (ds.iter().min(), ds.iter().max()) {
            per_depth.push(DepthDiameters {
                depth,
                blocks: ds.len(),
                min_diameter: lo,
                max_diameter: hi,
                ratio: f64::from(hi) / f64::from(lo),
            });
        }
    }
    let mut max_parent_child_ratio: f64 = 0.0;
    let (mut min_scaled, mut max_scaled) = (f64::INFINITY, 0.0f64);
    for id in 0..p.len() {
        let Some(d) = usable(id) else { continue };
        let scaled = f64::from(d) * r / (p.node(id).size() as f64).sqrt();
        min_scaled = min_scaled.min(scaled);
        max_scaled = max_scaled.max(scaled);
        if let Some(pd) = p.node(id).parent.and_then(usable) {
            max_parent_child_ratio = max_parent_child_ratio.max(f64::from(pd) / f64::from(d));
        }
    }
    SizeDiameters {
        root_diameter: diams[p.root()],
        per_depth,
        max_parent_child_ratio,
        min_scaled: if min_scaled.is_finite() { min_scaled } else { 0.0 },
        max_scaled,
        disconnected_blocks: diams.iter().filter(|d| d.is_none()).count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusFragmentation {
    pub radius: Hops,
    pub centers: usize,
    pub max_blocks: usize,
    pub mean_blocks: f64,
}

/// Number of blocks with diameter in `[r'/2, 2r']` met by the graph ball of
/// radius `r'` around `samples` random centers.
pub fn measure_fragmentation(
    g: &GeometricGraph,
    p: &RecursivePartition,
    diams: &[Option<Hops>],
    radii: &[Hops],
    samples: usize,
    seed: u64,
) -> Vec<RadiusFragmentation> {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<usize> = (0..n).collect();
    centers.shuffle(&mut rng);
    centers.truncate(samples.min(n));
    centers.sort_unstable();
    radii
        .iter()
        .map(|&rad| {
            let in_range = |id: NodeId| {
                diams[id].is_some_and(|d| 2 * u64::from(d) >= u64::from(rad) && u64::from(d) <= 2 * u64::from(rad))
            };
            let counts: Vec<usize> = centers
                .par_iter()
                .map_init(
                    || BfsScratch::new(n),
                    |scratch, &c| {
                        scratch.run(g, c);
                        let mut met = BTreeSet::new();
                        for v in (0..n).filter(|&v| scratch.dist[v] <= rad) {
                            met.extend(p.chain(v).iter().copied().filter(|&id| in_range(id)));
                        }
                        met.len()
                    },
                )
                .collect();
            RadiusFragmentation {
                radius: rad,
                centers: counts.len(),
                max_blocks: counts.iter().copied().max().unwrap_or(0),
                mean_blocks: counts.iter().sum::<usize>() as f64 / counts.len().max(1) as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockConcentration {
    pub node: NodeId,
    pub side: f64,
    /// `|B| / s²`.
    pub density: f64,
    /// `|boundary(B)| / (4 (s − r) r)`.
    pub boundary_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Concentration {
    pub blocks: Vec<BlockConcentration>,
    pub min_density: f64,
    pub max_density: f64,
    pub max_boundary_ratio: f64,
}

/// Vertex and boundary counts of the leaf-level blocks against the areas
/// predicted for their cells. Cells with side below `2r` are skipped.
pub fn check_block_concentration(g: &GeometricGraph, p: &RecursivePartition) -> Concentration {
    let r = g.radius();
    let leaf_level = p.leaf_level();
    let mut blocks = Vec::new();
    for (id, nd) in p.nodes().iter().enumerate() {
        let s = nd.cell.side();
        if nd.level != leaf_level || s < 2.0 * r {
            continue;
        }
        blocks.push(BlockConcentration {
            node: id,
            side: s,
            density: nd.size() as f64 / (s * s),
            boundary_ratio: nd.boundary.len() as f64 / (4.0 * (s - r) * r),
        });
    }
    let fold =
        |f: fn(&BlockConcentration) -> f64, init: f64, op: fn(f64, f64) -> f64| blocks.iter().map(f).fold(init, op);
    Concentration {
        min_density: if blocks.is_empty() { 0.0 } else { fold(|b| b.density, f64::INFINITY, f64::min) },
        max_density: fold(|b| b.density, 0.0, f64::max),
        max_boundary_ratio: fold(|b| b.boundary_ratio, 0.0, f64::max),
        blocks,
    }
}

/// Description of the instance a report was measured on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub n: usize,
    pub kind: SpaceKind,
    pub r: f64,
    pub seed: Option<u64>,
}

impl Sample {
    pub fn of(g: &GeometricGraph, seed: Option<u64>) -> Self {
        Sample { n: g.n(), kind: g.space().kind(), r: g.radius(), seed }
    }

    /// `log_n r`.
    pub fn rho(&self) -> f64 {
        if self.n > 1 {
            self.r.ln() / (self.n as f64).ln()
        } else {
            0.0
        }
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRow {
    pub schema: u32,
    pub property: String,
    pub n: usize,
    pub kind: SpaceKind,
    pub r: f64,
    pub rho: f64,
    pub seed: Option<u64>,
    /// Parameter point, e.g. `x=4` or `radius=8`; empty when none.
    pub param: String,
    pub statistic: String,
    pub value: f64,
    /// `PASS`/`FAIL` for exact invariants, empty for measurements.
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyReport {
    pub rows: Vec<PropertyRow>,
}

impl PropertyReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn measure(&mut self, s: &Sample, property: &str, param: String, statistic: &str, value: f64) {
        self.push(s, property, param, statistic, value, String::new());
    }

    pub fn verdict(&mut self, s: &Sample, property: &str, statistic: &str, value: f64, pass: bool) {
        let v = if pass { "PASS" } else { "FAIL" };
        self.push(s, property, String::new(), statistic, value, v.to_string());
    }

    fn push(&mut self, s: &Sample, property: &str, param: String, statistic: &str, value: f64, verdict: String) {
        self.rows.push(PropertyRow {
            schema: SCHEMA,
            property: property.to_string(),
            n: s.n,
            kind: s.kind,
            r: s.r,
            rho: s.rho(),
            seed: s.seed,
            param,
            statistic: statistic.to_string(),
            value,
            verdict,
        });
    }

    pub fn extend(&mut self, other: PropertyReport) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != "FAIL")
    }

    pub fn add_lower_stretch(&mut self, s: &Sample, m: &LowerStretch) {
        self.measure(s, "stretch", String::new(), "lower_pairs", m.pairs as f64);
        self.verdict(s, "stretch", "lower_violations", m.violations as f64, m.pass());
    }

    pub fn add_upper_stretch(&mut self, s: &Sample, m: &UpperStretch) {
        self.measure(s, "stretch", String::new(), "upper_pairs", m.pairs as f64);
        self.measure(s, "stretch", String::new(), "max_excess", m.max_excess);
        self.measure(s, "stretch", String::new(), "p95_excess", m.p95_excess);
        for b in &m.buckets {
            self.measure(s, "stretch", format!("bucket={}", b.bucket), "max_excess", b.max_excess);
        }
    }

    pub fn add_local_partners(&mut self, s: &Sample, m: &LocalPartners) {
        self.measure(s, "1", String::new(), "d_local_estimate", m.slack);
        for c in &m.per_x {
            let p = || format!("x={}", c.x);
            self.measure(s, "1", p(), "max_cover", c.max_cover as f64);
            self.measure(s, "1", p(), "mean_cover", c.mean_cover);
            self.measure(s, "1", p(), "max_radius", f64::from(c.max_radius));
            self.measure(s, "1", p(), "scaled_radius", c.scaled_radius);
        }
    }

    pub fn add_few_corners(&mut self, s: &Sample, m: &FewCorners) {
        self.measure(s, "2", String::new(), "d_corner_estimate", m.slack);
        for c in &m.per_x {
            let p = || format!("x={}", c.x);
            self.measure(s, "2", p(), "owners", c.owners as f64);
            self.measure(s, "2", p(), "owner_fraction", c.fraction);
            self.measure(s, "2", p(), "cover", c.cover as f64);
            self.measure(s, "2", p(), "max_radius", f64::from(c.max_radius));
            self.measure(s, "2", p(), "scaled_radius", c.scaled_radius);
        }
    }

    /// Balance and small separators with `α = 1/2`, `β = log_n r`.
    pub fn add_separators(&mut self, s: &Sample, p: &RecursivePartition) {
        let sep = check_separators(p, 0.5, s.rho());
        let bal = check_balance(p, 1.0);
        let param = format!("alpha=0.5;beta={:.4}", s.rho());
        self.measure(s, "3", param.clone(), "max_separator_ratio", sep.max_ratio);
        self.measure(s, "3", param, "max_separator", sep.max_separator as f64);
        self.measure(s, "3", String::new(), "max_balance_excess", bal.max_excess);
    }

    pub fn add_size_diameters(&mut self, s: &Sample, m: &SizeDiameters) {
        if let Some(d) = m.root_diameter {
            self.measure(s, "4", String::new(), "root_diameter", f64::from(d));
        }
        for d in &m.per_depth {
            let p = || format!("depth={}", d.depth);
            self.measure(s, "4", p(), "blocks", d.blocks as f64);
            self.measure(s, "4", p(), "diameter_ratio", d.ratio);
        }
        self.measure(s, "4", String::new(), "max_parent_child_ratio", m.max_parent_child_ratio);
        self.measure(s, "4", String::new(), "min_scaled_diameter", m.min_scaled);
        self.measure(s, "4", String::new(), "max_scaled_diameter", m.max_scaled);
        self.measure(s, "4", String::new(), "disconnected_blocks", m.disconnected_blocks as f64);
    }

    pub fn add_fragmentation(&mut self, s: &Sample, m: &[RadiusFragmentation]) {
        for f in m {
            let p = || format!("radius={}", f.radius);
            self.measure(s, "5", p(), "max_blocks", f.max_blocks as f64);
            self.measure(s, "5", p(), "mean_blocks", f.mean_blocks);
        }
    }

    pub fn add_concentration(&mut self, s: &Sample, m: &Concentration) {
        self.measure(s, "concentration", String::new(), "blocks", m.blocks.len() as f64);
        self.measure(s, "concentration", String::new(), "min_density", m.min_density);
        self.measure(s, "concentration", String::new(), "max_density", m.max_density);
        self.measure(s, "concentration", String::new(), "max_boundary_ratio", m.max_boundary_ratio);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::graph::{fixtures, naive_diameter};
    use crate::graphgen::{from_points, sample_rgg, RggParams};
    use crate::partition::induce_partition;

    fn grid(k: usize, kind: SpaceKind) -> GeometricGraph {
        let pts = (0..k * k).map(|i| Point::new((i % k) as f64, (i / k) as f64)).collect();
        from_points(kind, k as f64, pts, 1.0).unwrap()
    }

    fn rgg(n: usize, rho: f64, kind: SpaceKind, seed: u64) -> GeometricGraph {
        sample_rgg(&RggParams::with_exponent(n, rho, kind, seed)).unwrap()
    }

    #[test]
    fn grid_corner_pair_bound() {
        let g = grid(3, SpaceKind::Square);
        let dx = g.space().distance(g.coord(0), g.coord(8));
        assert_eq!(hop_lower_bound(dx, 1.0), 3);
        assert_eq!(hop_lower_bound(1.0, 1.0), 1);
        let m = check_lower_stretch(&g, 100, 0);
        assert!(m.pass());
        assert_eq!(m.pairs, 81);
    }

    #[test]
    fn lower_stretch_holds_on_rggs() {
        for seed in 0..6 {
            let kind = if seed % 2 == 0 { SpaceKind::Square } else { SpaceKind::Torus };
            let g = rgg(1500, 0.25, kind, seed);
            let m = check_lower_stretch(&g, 10_000, seed);
            assert!(m.pass(), "{:?}", m.first_violation);
            assert!(m.pairs >= 10_000);
        }
    }

    #[test]
    fn complete_graph_has_nonnegative_excess() {
        let pts = (0..6).map(|i| Point::new(0.3 * i as f64, 0.1 * i as f64)).collect();
        let g = from_points(SpaceKind::Square, 3.0, pts, 5.0).unwrap();
        let m = measure_upper_stretch(&g, 100, 1);
        assert_eq!(m.pairs, 0);
        let g = rgg(800, 0.3, SpaceKind::Square, 2);
        let m = measure_upper_stretch(&g, 2000, 1);
        assert!(m.pairs > 0 && m.max_excess >= m.p95_excess);
        assert!(m.buckets.iter().all(|b| b.bucket >= 1));
    }

    #[test]
    fn matrix_matches_naive() {
        let g = rgg(300, 0.3, SpaceKind::Torus, 4);
        let dm = DistanceMatrix::compute(&g).unwrap();
        assert_eq!(dm.diameter(), naive_diameter(&g).unwrap());
        let big = rgg(ALL_PAIRS_MAX_N + 1, 0.3, SpaceKind::Square, 0);
        assert!(matches!(DistanceMatrix::compute(&big), Err(PropError::TooLarge { .. })));
    }

    #[test]
    fn cover_of_everything_is_one_ball() {
        let g = grid(4, SpaceKind::Square);
        let dm = DistanceMatrix::compute(&g).unwrap();
        let all: Vec<usize> = (0..16).collect();
        assert_eq!(greedy_cover(&dm, &all), vec![Ball { center: 0, radius: dm.ecc(0) }]);
        let lp = measure_local_partners(&g, &dm, &[dm.diameter()], 16, 0);
        assert_eq!(lp.per_x[0].max_cover, 1);
        let fc = measure_few_corners(&g, &dm, &[dm.diameter()]);
        assert_eq!((fc.per_x[0].owners, fc.per_x[0].cover), (16, 1));
    }

    #[test]
    fn unique_diametric_pair() {
        let g = fixtures::path(6);
        let dm = DistanceMatrix::compute(&g).unwrap();
        let lp = measure_local_partners(&g, &dm, &[0], 6, 0);
        assert_eq!((lp.per_x[0].max_cover, lp.per_x[0].max_radius), (1, 0));
        let fc = measure_few_corners(&g, &dm, &[0]);
        assert_eq!((fc.per_x[0].owners, fc.per_x[0].cover), (2, 2));
    }

    #[test]
    fn fixed_cover_shrinks_with_radius() {
        let g = fixtures::path(40);
        let dm = DistanceMatrix::compute(&g).unwrap();
        let set: Vec<usize> = (0..40).filter(|v| v % 3 != 1).collect();
        let counts: Vec<usize> = (0..12).map(|r| greedy_cover_fixed(&dm, &set, r).len()).collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    }

    #[test]
    fn corners_concentrate_on_square_not_torus() {
        let sq = rgg(1500, 0.3, SpaceKind::Square, 5);
        let to = rgg(1500, 0.3, SpaceKind::Torus, 5);
        let fs = measure_few_corners(&sq, &DistanceMatrix::compute(&sq).unwrap(), &[1]);
        let ft = measure_few_corners(&to, &DistanceMatrix::compute(&to).unwrap(), &[1]);
        assert!(fs.per_x[0].fraction < ft.per_x[0].fraction);
    }

    #[test]
    fn block_diameters_match_bfs() {
        let g = grid(4, SpaceKind::Square);
        let p = induce_partition(&g, 1);
        let d = block_diameters(&g, &p).unwrap();
        assert_eq!(d[p.root()], Some(6));
        for leaf in p.leaves() {
            assert_eq!(d[leaf], Some(2));
        }
        let sd = check_size_dependent_diameters(&g, &p, &d);
        assert_eq!(sd.root_diameter, Some(6));
        assert_eq!(sd.per_depth[1].ratio, 1.0);
        let path = fixtures::path(4);
        assert_eq!(block_diameter(&path, &[0, 3]), None);
    }

    #[test]
    fn fragmentation_on_grid() {
        let g = grid(4, SpaceKind::Square);
        let p = induce_partition(&g, 1);
        let d = block_diameters(&g, &p).unwrap();
        let f = measure_fragmentation(&g, &p, &d, &[0, 2, 6], 16, 0);
        // Radius 0 admits only singleton blocks, radius 6 only the root.
        assert_eq!(f[0].max_blocks, 0);
        assert_eq!(f[2].max_blocks, 1);
        // From (1,1) a ball of radius 2 meets all four leaves.
        assert_eq!(f[1].max_blocks, 4);
    }

    #[test]
    fn unit_grid_concentration() {
        let pts = (0..16).map(|i| Point::new((i % 4) as f64 + 0.5, (i / 4) as f64 + 0.5)).collect();
        let g = from_points(SpaceKind::Square, 4.0, pts, 0.5).unwrap();
        let c = check_block_concentration(&g, &induce_partition(&g, 1));
        assert_eq!(c.blocks.len(), 4);
        assert!(c.blocks.iter().all(|b| b.density == 1.0));
    }

    #[test]
    fn report_csv_has_schema_column() {
        let g = grid(3, SpaceKind::Square);
        let s = Sample::of(&g, Some(7));
        let mut rep = PropertyReport::new();
        rep.add_lower_stretch(&s, &check_lower_stretch(&g, 10, 0));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "schema,property,n,kind,r,rho,seed,param,statistic,value,verdict");
        assert!(text.contains(",lower_violations,0.0,PASS"));
        assert!(rep.all_pass());
    }
}
