//! Quadtree-induced recursive partitions.
//!
//! Every vertex is assigned to the level-ℓ quadtree cell containing it. Empty
//! cells are dropped and single-child chains are contracted, so every internal
//! node has between two and four children.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Cell, GroundSpace, SpaceKind};
use crate::graph::GeometricGraph;

pub type NodeId = usize;

/// Default ratio between leaf cell side and connection radius.
pub const DEFAULT_C_LEAF: f64 = 8.0;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("block size limit {k} is below the largest leaf block ({max_leaf}); use smaller leaves")]
    NeedSmallerLeaves { k: usize, max_leaf: usize },
    #[error("vertex words must all have length {expected}, vertex {vertex} has {got}")]
    RaggedWords { expected: usize, vertex: usize, got: usize },
    #[error("expected {expected} vertex words, got {got}")]
    WordCount { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct PartitionNode {
    /// Vertices of the block, ascending.
    pub block: Vec<u32>,
    /// Block vertices with a neighbor outside the block, ascending.
    pub boundary: Vec<u32>,
    /// Union of the children's boundaries, ascending. Empty for leaves.
    pub separator: Vec<u32>,
    pub cell: Cell,
    /// Quadtree level of `cell`.
    pub level: u32,
    /// Distance from the root in the contracted tree.
    pub depth: u32,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
}

impl PartitionNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn size(&self) -> usize {
        self.block.len()
    }
}

#[derive(Debug, Clone)]
pub struct RecursivePartition {
    nodes: Vec<PartitionNode>,
    leaf_of: Vec<NodeId>,
    /// `chains[chain_start[v]..chain_start[v+1]]` lists v's ancestors root-first.
    chains: Vec<NodeId>,
    chain_start: Vec<usize>,
    /// Position of v inside each ancestor block, aligned with `chains`.
    positions: Vec<u32>,
    leaf_level: u32,
    warnings: Vec<String>,
}

/// Largest ℓ with `side / 2^ℓ ≥ c_leaf · r`, clamped at 0.
pub fn leaf_level_for(side: f64, r: f64, c_leaf: f64) -> u32 {
    let mut level = 0;
    while level < 30 && side / f64::from(1u32 << (level + 1)) >= c_leaf * r {
        level += 1;
    }
    level
}

/// Leaf level for an `n`-vertex graph on a square of side `√n`.
pub fn default_leaf_level(n: usize, r: f64) -> u32 {
    leaf_level_for((n as f64).sqrt(), r, DEFAULT_C_LEAF)
}

/// Builds `G[𝒫^ℓ]`: vertices grouped by their level-`leaf_level` quadtree cell.
pub fn induce_partition(g: &GeometricGraph, leaf_level: u32) -> RecursivePartition {
    let space = *g.space();
    let words: Vec<Vec<u8>> = g.coords().par_iter().map(|&p| space.cell_of_point(p, leaf_level).word).collect();
    let mut p = RecursivePartition::from_words(g, &words).expect("cell words have uniform length");
    if space.kind() == SpaceKind::Torus {
        let leaf_side = space.side() / f64::from(1u32 << leaf_level.min(30));
        let r = g.radius();
        if leaf_side <= 2.0 * r && leaf_level > 0 {
            let msg = format!("leaf cell side {leaf_side:.3} is not above 2r = {:.3}", 2.0 * r);
            log::warn!("{msg}");
            p.warnings.push(msg);
        }
    }
    p
}

impl RecursivePartition {
    /// Builds a partition from per-vertex words over `{1,2,3,4}`: vertices
    /// sharing a prefix share the corresponding block. All words must have the
    /// same length, which becomes the leaf level.
    pub fn from_words(g: &GeometricGraph, words: &[Vec<u8>]) -> Result<Self, PartitionError> {
        let n = g.n();
        if words.len() != n {
            return Err(PartitionError::WordCount { expected: n, got: words.len() });
        }
        let leaf_level = words.first().map_or(0, Vec::len);
        if let Some((vertex, w)) = words.iter().enumerate().find(|(_, w)| w.len() != leaf_level) {
            return Err(PartitionError::RaggedWords { expected: leaf_level, vertex, got: w.len() });
        }
        let mut builder = Builder { words, root_cell: Cell::root(g.space().side()), leaf_level, nodes: Vec::new() };
        if n > 0 {
            builder.build((0..n as u32).collect(), 0, None, 0);
        } else {
            builder.nodes.push(PartitionNode {
                block: Vec::new(),
                boundary: Vec::new(),
                separator: Vec::new(),
                cell: builder.root_cell.clone(),
                level: 0,
                depth: 0,
                children: Vec::new(),
                parent: None,
            });
        }
        let mut nodes = builder.nodes;

        let mut leaf_of = vec![0; n];
        for (id, node) in nodes.iter().enumerate() {
            if node.is_leaf() {
                for &v in &node.block {
                    leaf_of[v as usize] = id;
                }
            }
        }
        let mut chains = Vec::new();
        let mut chain_start = Vec::with_capacity(n + 1);
        chain_start.push(0);
        for &leaf in &leaf_of {
            let begin = chains.len();
            let mut cur = Some(leaf);
            while let Some(id) = cur {
                chains.push(id);
                cur = nodes[id].parent;
            }
            chains[begin..].reverse();
            chain_start.push(chains.len());
        }
        let mut positions = vec![0u32; chains.len()];
        for (id, node) in nodes.iter().enumerate() {
            let depth = node.depth as usize;
            for (pos, &v) in node.block.iter().enumerate() {
                let at = chain_start[v as usize] + depth;
                debug_assert_eq!(chains[at], id);
                positions[at] = pos as u32;
            }
        }

        // v lies on the boundary of every ancestor strictly below its shallowest
        // LCA with a neighbor.
        let chain = |v: usize| &chains[chain_start[v]..chain_start[v + 1]];
        let cut_depth: Vec<usize> = (0..n)
            .into_par_iter()
            .map(|v| {
                let cv = chain(v);
                g.neighbors(v)
                    .iter()
                    .map(|&w| {
                        let cw = chain(w as usize);
                        cv.iter().zip(cw).take_while(|(a, b)| a == b).count()
                    })
                    .min()
                    .unwrap_or(cv.len())
            })
            .collect();
        for v in 0..n {
            let cv = chain(v);
            for &id in &cv[cut_depth[v]..] {
                nodes[id].boundary.push(v as u32);
            }
        }
        for id in 0..nodes.len() {
            if nodes[id].is_leaf() {
                continue;
            }
            let mut sep: Vec<u32> =
                nodes[id].children.iter().flat_map(|&c| nodes[c].boundary.iter().copied()).collect();
            sep.sort_unstable();
            nodes[id].separator = sep;
        }

        Ok(RecursivePartition {
            nodes,
            leaf_of,
            chains,
            chain_start,
            positions,
            leaf_level: leaf_level as u32,
            warnings: Vec::new(),
        })
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[PartitionNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &PartitionNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf_level(&self) -> u32 {
        self.leaf_level
    }

    /// True when the whole vertex set ended up in a single leaf.
    pub fn is_trivial(&self) -> bool {
        self.nodes[0].is_leaf()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn leaf_of(&self, v: usize) -> NodeId {
        self.leaf_of[v]
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&id| self.nodes[id].is_leaf())
    }

    pub fn max_leaf_size(&self) -> usize {
        self.leaves().map(|id| self.nodes[id].size()).max().unwrap_or(0)
    }

    /// Ancestors of `v`'s leaf, root first, leaf last.
    pub fn chain(&self, v: usize) -> &[NodeId] {
        &self.chains[self.chain_start[v]..self.chain_start[v + 1]]
    }

    /// Index of `v` inside the block of its ancestor at `depth`.
    #[inline]
    pub fn position(&self, v: usize, depth: usize) -> usize {
        self.positions[self.chain_start[v] + depth] as usize
    }

    /// Whether `v` belongs to the block of `node`.
    #[inline]
    pub fn contains(&self, node: NodeId, v: usize) -> bool {
        let depth = self.nodes[node].depth as usize;
        self.chain(v).get(depth) == Some(&node)
    }

    /// Position of `v` in `node`'s block, if it belongs to it.
    #[inline]
    pub fn local_index(&self, node: NodeId, v: usize) -> Option<usize> {
        let depth = self.nodes[node].depth as usize;
        (self.chain(v).get(depth) == Some(&node)).then(|| self.position(v, depth))
    }

    /// Ancestors of `node` including itself, from `node` up to the root.
    pub fn ancestors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(Some(node), move |&id| self.nodes[id].parent)
    }

    pub fn summary(&self) -> Vec<NodeSummary> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(id, node)| NodeSummary {
                id,
                parent: node.parent,
                level: node.level,
                depth: node.depth,
                cell: node.cell.word_string(),
                block_size: node.block.len(),
                boundary_size: node.boundary.len(),
                separator_size: node.separator.len(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("summary serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeSummary {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub level: u32,
    pub depth: u32,
    pub cell: String,
    pub block_size: usize,
    pub boundary_size: usize,
    pub separator_size: usize,
}

struct Builder<'a> {
    words: &'a [Vec<u8>],
    root_cell: Cell,
    leaf_level: usize,
    nodes: Vec<PartitionNode>,
}

impl Builder<'_> {
    fn cell_for(&self, word: &[u8]) -> Cell {
        word.iter().fold(self.root_cell.clone(), |c, &d| c.children()[usize::from(d) - 1].clone())
    }

    fn build(&mut self, vertices: Vec<u32>, mut at: usize, parent: Option<NodeId>, depth: u32) -> NodeId {
        let mut groups: Vec<Vec<u32>>;
        loop {
            if at == self.leaf_level {
                groups = Vec::new();
                break;
            }
            groups = vec![Vec::new(); 4];
            for &v in &vertices {
                let digit = usize::from(self.words[v as usize][at]);
                groups[digit.clamp(1, 4) - 1].push(v);
            }
            groups.retain(|g| !g.is_empty());
            if groups.len() > 1 {
                break;
            }
            at += 1;
        }
        let id = self.nodes.len();
        let cell = self.cell_for(&self.words[vertices[0] as usize][..at]);
        self.nodes.push(PartitionNode {
            block: vertices,
            boundary: Vec::new(),
            separator: Vec::new(),
            cell,
            level: at as u32,
            depth,
            children: Vec::new(),
            parent,
        });
        let children = groups.into_iter().map(|grp| self.build(grp, at + 1, Some(id), depth + 1)).collect();
        self.nodes[id].children = children;
        id
    }
}

/// An antichain of partition nodes whose blocks partition V.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatPartition {
    pub nodes: Vec<NodeId>,
    /// Unordered candidate pairs stored as `(min, max)`, self-pairs allowed.
    pub candidates: BTreeSet<(NodeId, NodeId)>,
}

/// `{B ∈ 𝒫 : |B| ≤ k and |parent(B)| > k}`.
pub fn flat_partition_by_size(p: &RecursivePartition, k: usize) -> Result<FlatPartition, PartitionError> {
    let max_leaf = p.max_leaf_size();
    if k < max_leaf {
        return Err(PartitionError::NeedSmallerLeaves { k, max_leaf });
    }
    let nodes = (0..p.len())
        .filter(|&id| {
            let node = p.node(id);
            node.size() <= k && node.parent.is_none_or(|par| p.node(par).size() > k)
        })
        .collect();
    Ok(FlatPartition { nodes, candidates: BTreeSet::new() })
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceReport {
    pub epsilon: f64,
    /// Max over internal nodes of (largest child / smallest child) − 1.
    pub max_excess: f64,
    pub worst_node: Option<NodeId>,
    pub balanced: bool,
}

pub fn check_balance(p: &RecursivePartition, epsilon: f64) -> BalanceReport {
    let mut max_excess = 0.0;
    let mut worst_node = None;
    for (id, node) in p.nodes().iter().enumerate().filter(|(_, n)| !n.is_leaf()) {
        let sizes = node.children.iter().map(|&c| p.node(c).size());
        let (lo, hi) = sizes.fold((usize::MAX, 0), |(lo, hi), s| (lo.min(s), hi.max(s)));
        let excess = hi as f64 / lo as f64 - 1.0;
        if excess > max_excess || worst_node.is_none() {
            max_excess = excess;
            worst_node = Some(id);
        }
    }
    BalanceReport { epsilon, max_excess, worst_node, balanced: max_excess <= epsilon }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparatorReport {
    pub alpha: f64,
    pub beta: f64,
    /// Max over blocks of |sep(B)| / (|B|^α · n^β).
    pub max_ratio: f64,
    pub worst_node: Option<NodeId>,
    pub max_separator: usize,
}

pub fn check_separators(p: &RecursivePartition, alpha: f64, beta: f64) -> SeparatorReport {
    let n = p.node(p.root()).size() as f64;
    let mut report = SeparatorReport { alpha, beta, max_ratio: 0.0, worst_node: None, max_separator: 0 };
    for (id, node) in p.nodes().iter().enumerate() {
        if node.block.is_empty() {
            continue;
        }
        let ratio = node.separator.len() as f64 / ((node.size() as f64).powf(alpha) * n.powf(beta));
        report.max_separator = report.max_separator.max(node.separator.len());
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst_node = Some(id);
        }
    }
    report
}

/// Side length of a leaf cell at `level` for a given ground space.
pub fn cell_side(space: &GroundSpace, level: u32) -> f64 {
    space.side() / f64::from(1u32 << level.min(30))
}
