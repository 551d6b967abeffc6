//! Loop-multigraphs and the connectivity statistics behind decodability.
//!
//! Vertices are labeled `1..=n`. Edges are positional: an edge's id is its
//! index in the edge list, so parallel edges and repeated loops stay distinct
//! deletion targets. A loop (`u == v`) marks a packet received in the clear;
//! loops count once toward incidence degree and never take part in paths,
//! components, or cuts.
//!
//! A graph is *decodable* when every connected component (components are
//! computed over non-loop edges only) contains at least one loop: the loop
//! seeds one plain packet and XOR edges propagate it through the component.
//! An isolated vertex without a loop is therefore an undecodable component.
//! The empty graph (`n == 0`) is decodable by convention.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheme::Slot;
use crate::subsets;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {index} = ({u}, {v}) has an endpoint outside 1..={n}")]
    EndpointOutOfRange {
        index: usize,
        u: usize,
        v: usize,
        n: usize,
    },
    #[error("unknown edge id {id}; the graph has {m} edges")]
    UnknownEdgeId { id: usize, m: usize },
    #[error("graph is already disconnected")]
    AlreadyDisconnected,
    #[error("edge connectivity is undefined with fewer than two vertices")]
    TooFewVertices,
    #[error("graph is undecodable before any deletion")]
    Undecodable,
    #[error("no loop cut exists: every deletion leaves the graph decodable")]
    NoLoopCut,
    #[error("graph file: {0}")]
    Format(String),
}

/// One edge of a loop-multigraph. `u == v` encodes a loop.
#[derive(Debug, Clone, Copy, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// Relay output slot this edge came from, when built from a scheme.
    pub provenance: Option<Slot>,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Self {
        Self {
            u,
            v,
            provenance: None,
        }
    }

    pub fn with_provenance(u: usize, v: usize, slot: Slot) -> Self {
        Self {
            u,
            v,
            provenance: Some(slot),
        }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint opposite `w`.
    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    fn key(&self) -> (usize, usize) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

// Endpoints are an unordered pair: (u, v) and (v, u) are the same edge.
impl PartialEq for Edge {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key() && self.provenance == other.provenance
    }
}

/// Loop and degree statistics of a graph.
///
/// `incidence_degree[v]` counts edges incident to `v` with loops counted
/// once, so the degrees sum to `2m - loop_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphStats {
    pub loop_count: usize,
    /// Indexed by vertex id; entry 0 is unused.
    pub incidence_degree: Vec<usize>,
    pub min_incidence_degree: usize,
    /// Indexed by vertex id; entry 0 is unused.
    pub loops_at_vertex: Vec<usize>,
    pub max_loops: usize,
    pub incidence_sum: usize,
}

impl GraphStats {
    /// Number of vertices whose incidence degree equals `target`.
    pub fn alpha(&self, target: usize) -> usize {
        self.incidence_degree[1..]
            .iter()
            .filter(|&&d| d == target)
            .count()
    }

    /// Number of vertices whose incidence degree is at least `target + 2`.
    pub fn beta(&self, target: usize) -> usize {
        self.incidence_degree[1..]
            .iter()
            .filter(|&&d| d >= target + 2)
            .count()
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// Multigraph on vertices `1..=n` with loops and parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl MultiGraph {
    pub fn new(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        Self::from_edges(n, pairs.into_iter().map(|(u, v)| Edge::new(u, v)).collect())
    }

    pub fn from_edges(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        for (index, e) in edges.iter().enumerate() {
            if e.u < 1 || e.u > n || e.v < 1 || e.v > n {
                return Err(GraphError::EndpointOutOfRange {
                    index,
                    u: e.u,
                    v: e.v,
                    n,
                });
            }
        }
        Ok(Self { n, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn loop_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_loop()).count()
    }

    /// Connected components as sorted vertex lists, ordered by smallest
    /// member. Loops never merge components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.n);
        for e in &self.edges {
            if !e.is_loop() {
                uf.union(e.u, e.v);
            }
        }
        let mut block_of_root = vec![usize::MAX; self.n + 1];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for v in 1..=self.n {
            let r = uf.find(v);
            if block_of_root[r] == usize::MAX {
                block_of_root[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[block_of_root[r]].push(v);
        }
        blocks
    }

    /// Splits the graph into its components, relabeling each component's
    /// vertices as `1..=n_i` in ascending order of the original ids. Edge
    /// order and provenance are preserved within each component.
    pub fn component_graphs(&self) -> Vec<MultiGraph> {
        let comps = self.components();
        let mut comp_of = vec![usize::MAX; self.n + 1];
        let mut local = vec![0usize; self.n + 1];
        for (ci, comp) in comps.iter().enumerate() {
            for (li, &v) in comp.iter().enumerate() {
                comp_of[v] = ci;
                local[v] = li + 1;
            }
        }
        let mut graphs: Vec<MultiGraph> = comps
            .iter()
            .map(|comp| MultiGraph {
                n: comp.len(),
                edges: Vec::new(),
            })
            .collect();
        for e in &self.edges {
            let ci = comp_of[e.u];
            graphs[ci].edges.push(Edge {
                u: local[e.u],
                v: local[e.v],
                provenance: e.provenance,
            });
        }
        graphs
    }

    /// True when every component contains a loop (vacuously true for n = 0).
    pub fn is_decodable(&self) -> bool {
        let mut scratch = Scratch::new();
        self.decodable_if(&mut scratch, |_| true)
    }

    /// Deletes the edges with the given ids. Survivors keep their relative
    /// order and provenance and are re-indexed from 0.
    pub fn delete_edges(&self, ids: impl IntoIterator<Item = usize>) -> Result<Self, GraphError> {
        let ids: BTreeSet<usize> = ids.into_iter().collect();
        if let Some(&id) = ids.iter().next_back() {
            if id >= self.edge_count() {
                return Err(GraphError::UnknownEdgeId {
                    id,
                    m: self.edge_count(),
                });
            }
        }
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !ids.contains(i))
            .map(|(_, e)| *e)
            .collect();
        Ok(Self { n: self.n, edges })
    }

    pub fn stats(&self) -> GraphStats {
        let mut incidence_degree = vec![0usize; self.n + 1];
        let mut loops_at_vertex = vec![0usize; self.n + 1];
        let mut loop_count = 0;
        for e in &self.edges {
            if e.is_loop() {
                loop_count += 1;
                loops_at_vertex[e.u] += 1;
                incidence_degree[e.u] += 1;
            } else {
                incidence_degree[e.u] += 1;
                incidence_degree[e.v] += 1;
            }
        }
        let min_incidence_degree = incidence_degree[1..].iter().copied().min().unwrap_or(0);
        let max_loops = loops_at_vertex[1..].iter().copied().max().unwrap_or(0);
        let incidence_sum: usize = incidence_degree[1..].iter().sum();
        assert_eq!(incidence_sum, 2 * self.edge_count() - loop_count);
        GraphStats {
            loop_count,
            incidence_degree,
            min_incidence_degree,
            loops_at_vertex,
            max_loops,
            incidence_sum,
        }
    }

    /// Minimum number of non-loop edges whose removal disconnects the graph.
    /// Loops never count toward cuts.
    ///
    /// Brute force in ascending cut size; the non-loop degree minimum is a
    /// constructive upper bound (removing every non-loop edge at one vertex
    /// isolates it), so sizes at the bound need no enumeration.
    pub fn edge_connectivity(&self) -> Result<usize, GraphError> {
        if self.n < 2 {
            return Err(GraphError::TooFewVertices);
        }
        let mut scratch = Scratch::new();
        if !self.connected_if(&mut scratch, |_| true) {
            return Err(GraphError::AlreadyDisconnected);
        }
        let nonloop: Vec<usize> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_loop())
            .map(|(id, _)| id)
            .collect();
        let mut degree = vec![0usize; self.n + 1];
        for &id in &nonloop {
            degree[self.edges[id].u] += 1;
            degree[self.edges[id].v] += 1;
        }
        let bound = degree[1..].iter().copied().min().expect("n >= 2");
        let mut deleted = vec![false; self.edge_count()];
        for size in 1..bound {
            let found = subsets::any_combination(nonloop.len(), size, |pick| {
                for &i in pick {
                    deleted[nonloop[i]] = true;
                }
                let disconnects = !self.connected_if(&mut scratch, |id| !deleted[id]);
                for &i in pick {
                    deleted[nonloop[i]] = false;
                }
                disconnects
            });
            if found {
                return Ok(size);
            }
        }
        Ok(bound)
    }

    /// Minimum number of edge deletions (any edges, by id) that leave the
    /// graph undecodable.
    ///
    /// Requires a decodable graph. Bounded above by min(loop count, minimum
    /// incidence degree): deleting every loop, or every edge at one vertex,
    /// is always fatal. Sizes below the bound are enumerated exhaustively.
    pub fn min_loop_cut(&self) -> Result<usize, GraphError> {
        let mut scratch = Scratch::new();
        if !self.decodable_if(&mut scratch, |_| true) {
            return Err(GraphError::Undecodable);
        }
        if self.n == 0 {
            return Err(GraphError::NoLoopCut);
        }
        let stats = self.stats();
        let bound = stats.loop_count.min(stats.min_incidence_degree);
        let m = self.edge_count();
        let mut deleted = vec![false; m];
        for size in 1..bound {
            let found = subsets::any_combination(m, size, |pick| {
                for &i in pick {
                    deleted[i] = true;
                }
                let fatal = !self.decodable_if(&mut scratch, |id| !deleted[id]);
                for &i in pick {
                    deleted[i] = false;
                }
                fatal
            });
            if found {
                return Ok(size);
            }
        }
        Ok(bound)
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            n: self.n,
            edges: self.edges.iter().map(|e| (e.u, e.v)).collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
        Self::new(file.n, file.edges)
    }

    /// Decodability of the subgraph keeping exactly the edges selected by
    /// `keep`. Shared hot path for the census, the loop-cut search, and the
    /// Monte Carlo trials.
    pub(crate) fn decodable_if(
        &self,
        scratch: &mut Scratch,
        keep: impl Fn(usize) -> bool,
    ) -> bool {
        if self.n == 0 {
            return true;
        }
        scratch.reset(self.n);
        for (id, e) in self.edges.iter().enumerate() {
            if !e.is_loop() && keep(id) {
                scratch.union(e.u, e.v);
            }
        }
        for (id, e) in self.edges.iter().enumerate() {
            if e.is_loop() && keep(id) {
                let r = scratch.find(e.u);
                scratch.loop_at_root[r] = true;
            }
        }
        (1..=self.n).all(|v| {
            let r = scratch.find(v);
            scratch.loop_at_root[r]
        })
    }

    /// Connectivity (ignoring loops) of the subgraph selected by `keep`.
    pub(crate) fn connected_if(&self, scratch: &mut Scratch, keep: impl Fn(usize) -> bool) -> bool {
        if self.n == 0 {
            return true;
        }
        scratch.reset(self.n);
        for (id, e) in self.edges.iter().enumerate() {
            if !e.is_loop() && keep(id) {
                scratch.union(e.u, e.v);
            }
        }
        let root = scratch.find(1);
        (2..=self.n).all(|v| scratch.find(v) == root)
    }
}

/// Reusable union-find buffers for repeated subgraph classification.
pub(crate) struct Scratch {
    parent: Vec<usize>,
    loop_at_root: Vec<bool>,
}

impl Scratch {
    pub(crate) fn new() -> Self {
        Self {
            parent: Vec::new(),
            loop_at_root: Vec::new(),
        }
    }

    fn reset(&mut self, n: usize) {
        self.parent.clear();
        self.parent.extend(0..=n);
        self.loop_at_root.clear();
        self.loop_at_root.resize(n + 1, false);
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..=n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}
