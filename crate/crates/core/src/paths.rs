//! Shortest paths on cost-weighted graphs restricted to vertex subsets.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use fixedbitset::FixedBitSet;

use crate::planar::{EdgeId, PlanarGraph, VertexId};

/// Adjacency lists of a multigraph with positive integer edge costs. Self-loops are dropped
/// since they never lie on a shortest path.
#[derive(Clone, Debug)]
pub struct CostGraph {
    adj: Vec<Vec<(VertexId, EdgeId, u64)>>,
}

#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    pub dist: Vec<Option<u64>>,
    pub pred: Vec<Option<(VertexId, EdgeId)>>,
}

impl ShortestPathTree {
    /// Vertices and edges of the path from the source to `t`, source first.
    pub fn path_to(&self, t: VertexId) -> Option<(Vec<VertexId>, Vec<EdgeId>)> {
        self.dist[t]?;
        let mut vs = vec![t];
        let mut es = Vec::new();
        let mut x = t;
        while let Some((p, e)) = self.pred[x] {
            vs.push(p);
            es.push(e);
            x = p;
        }
        vs.reverse();
        es.reverse();
        Some((vs, es))
    }
}

impl CostGraph {
    pub fn from_planar(g: &PlanarGraph) -> Self {
        let mut adj = vec![Vec::new(); g.num_vertices()];
        for (i, e) in g.edges().iter().enumerate() {
            if e.is_loop() {
                continue;
            }
            adj[e.u].push((e.v, i, e.cost));
            adj[e.v].push((e.u, i, e.cost));
        }
        CostGraph { adj }
    }

    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId, u64)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v, c)) in edges.iter().enumerate() {
            if u == v {
                continue;
            }
            adj[u].push((v, i, c));
            adj[v].push((u, i, c));
        }
        CostGraph { adj }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId, u64)] {
        &self.adj[v]
    }

    pub fn full_set(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.adj.len());
        s.insert_range(..);
        s
    }

    /// Dijkstra inside the subgraph induced by `allowed`, stopping beyond `limit` if given.
    pub fn dijkstra(
        &self,
        source: VertexId,
        allowed: &FixedBitSet,
        limit: Option<f64>,
    ) -> ShortestPathTree {
        let n = self.adj.len();
        let mut dist = vec![None; n];
        let mut pred = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(0u64);
        heap.push(Reverse((0u64, source)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            for &(w, e, c) in &self.adj[v] {
                if !allowed.contains(w) || done[w] {
                    continue;
                }
                let nd = d + c;
                if limit.is_some_and(|l| nd as f64 > l) {
                    continue;
                }
                if dist[w].is_none_or(|old| nd < old) {
                    dist[w] = Some(nd);
                    pred[w] = Some((v, e));
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        ShortestPathTree { dist, pred }
    }

    /// Maximum shortest-path distance between vertices of `set` inside the induced subgraph;
    /// `None` when the induced subgraph is disconnected.
    pub fn strong_diameter(&self, set: &FixedBitSet) -> Option<u64> {
        let mut best = 0;
        for s in set.ones() {
            let t = self.dijkstra(s, set, None);
            for v in set.ones() {
                best = best.max(t.dist[v]?);
            }
        }
        Some(best)
    }

    pub fn diameter(&self) -> Option<u64> {
        self.strong_diameter(&self.full_set())
    }
}
