//! Exact ground truth for small instances.

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::planar::{sparsity, CutResult, DualCycle, DualGraph, EdgeId, Instance, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} vertices, above the brute-force limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("no positive demand")]
    NoDemand,
    #[error("more than {0} simple cycles")]
    CycleBudgetExceeded(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub best: CutResult,
    /// Number of candidate sets evaluated.
    pub candidates: u64,
    /// Of those, how many were simple cuts.
    pub simple_cuts: u64,
}

pub const DEFAULT_LIMIT: usize = 16;

fn bits(mask: u32, n: usize) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for v in 0..n {
        if mask >> v & 1 == 1 {
            b.insert(v);
        }
    }
    b
}

/// Minimum sparsity over all nonempty proper vertex subsets. Among optimal sets, a simple
/// cut is preferred, then the smallest bitmask; sets always exclude the last vertex.
pub fn brute_force_sparsest(inst: &Instance, limit: usize) -> Result<OracleResult, OracleError> {
    let n = inst.num_vertices();
    if n > limit || n > 30 {
        return Err(OracleError::TooLarge { n, limit });
    }
    if inst.demands.is_empty() {
        return Err(OracleError::NoDemand);
    }
    let mut best: Option<(CutResult, bool)> = None;
    let mut candidates = 0;
    let mut simple_cuts = 0;
    for mask in 1u32..(1u32 << (n - 1)) {
        let set = bits(mask, n);
        let r = sparsity(inst, &set).expect("proper subset");
        candidates += 1;
        let simple = is_simple_cut(inst, &set);
        simple_cuts += simple as u64;
        let better = match &best {
            None => true,
            Some((b, bs)) => r.sparsity < b.sparsity || (r.sparsity == b.sparsity && simple && !bs),
        };
        if better {
            best = Some((r, simple));
        }
    }
    let (best, _) = best.ok_or(OracleError::NoDemand)?;
    if !best.sparsity.is_finite() {
        return Err(OracleError::NoDemand);
    }
    Ok(OracleResult {
        best,
        candidates,
        simple_cuts,
    })
}

/// Both `set` and its complement induce connected subgraphs.
pub fn is_simple_cut(inst: &Instance, set: &FixedBitSet) -> bool {
    let n = inst.num_vertices();
    let mut rest = FixedBitSet::with_capacity(n);
    rest.insert_range(..);
    rest.difference_with(set);
    inst.graph.induces_connected(set) && inst.graph.induces_connected(&rest)
}

/// Every simple cut `delta(U)` given by its vertex set, taking the side without `exclude`.
pub fn simple_cuts(inst: &Instance, exclude: VertexId) -> Vec<FixedBitSet> {
    let n = inst.num_vertices();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        if mask >> exclude & 1 == 1 {
            continue;
        }
        let set = bits(mask, n);
        if is_simple_cut(inst, &set) {
            out.push(set);
        }
    }
    out
}

/// Every simple cycle of the dual exactly once, sorted by length then edge set.
///
/// Backtracking from each start vertex `s` through vertices above `s` only; a cycle closing
/// back at `s` is kept when its first edge id is below its last, which fixes the direction.
/// Self-loops are 1-cycles; distinct parallel edges form 2-cycles.
pub fn all_simple_cycles(dual: &DualGraph, budget: usize) -> Result<Vec<DualCycle>, OracleError> {
    let g = dual.graph();
    let n = g.num_vertices();
    let mut adj: Vec<Vec<(VertexId, EdgeId)>> = vec![Vec::new(); n];
    let mut raw: Vec<(Vec<VertexId>, Vec<EdgeId>)> = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        if e.is_loop() {
            raw.push((vec![e.u], vec![i]));
        } else {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
    }
    if raw.len() > budget {
        return Err(OracleError::CycleBudgetExceeded(budget));
    }
    struct Search<'a> {
        adj: &'a [Vec<(VertexId, EdgeId)>],
        start: VertexId,
        on_path: Vec<bool>,
        verts: Vec<VertexId>,
        edges: Vec<EdgeId>,
        out: &'a mut Vec<(Vec<VertexId>, Vec<EdgeId>)>,
        budget: usize,
    }
    impl Search<'_> {
        fn extend(&mut self, v: VertexId) -> bool {
            for &(w, e) in &self.adj[v] {
                if self.edges.last() == Some(&e) {
                    continue;
                }
                if w == self.start {
                    if !self.edges.is_empty() && self.edges[0] < e {
                        let mut es = self.edges.clone();
                        es.push(e);
                        self.out.push((self.verts.clone(), es));
                        if self.out.len() > self.budget {
                            return false;
                        }
                    }
                    continue;
                }
                if w < self.start || self.on_path[w] {
                    continue;
                }
                self.on_path[w] = true;
                self.verts.push(w);
                self.edges.push(e);
                let ok = self.extend(w);
                self.edges.pop();
                self.verts.pop();
                self.on_path[w] = false;
                if !ok {
                    return false;
                }
            }
            true
        }
    }
    for s in 0..n {
        let mut search = Search {
            adj: &adj,
            start: s,
            on_path: vec![false; n],
            verts: vec![s],
            edges: Vec::new(),
            out: &mut raw,
            budget,
        };
        search.on_path[s] = true;
        if !search.extend(s) {
            return Err(OracleError::CycleBudgetExceeded(budget));
        }
    }
    let mut cycles: Vec<DualCycle> = raw
        .into_iter()
        .map(|(vs, es)| {
            DualCycle::from_vertices_edges(dual, vs, es).expect("enumerated cycles are simple")
        })
        .collect();
    cycles.sort_by_cached_key(|c| (c.len(), c.edge_set()));
    debug_assert!(cycles.windows(2).all(|w| w[0].edge_set() != w[1].edge_set()));
    Ok(cycles)
}

/// The simple dual cycle of minimum sparsity (ties: shorter, then smaller edge set).
pub fn optimal_cycle(dual: &DualGraph, budget: usize) -> Result<DualCycle, OracleError> {
    let cycles = all_simple_cycles(dual, budget)?;
    cycles
        .into_iter()
        .map(|c| (c.objective(dual).sparsity, c))
        .filter(|(s, _)| s.is_finite())
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, c)| c)
        .ok_or(OracleError::NoDemand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::planar::Sparsity;

    #[test]
    fn square_optimum_is_two() {
        let r = brute_force_sparsest(&fixtures::square(1), DEFAULT_LIMIT).unwrap();
        assert_eq!(r.best.sparsity, Sparsity::new(2, 1));
    }

    #[test]
    fn k4_optimum_is_three() {
        let r = brute_force_sparsest(&fixtures::k4(), DEFAULT_LIMIT).unwrap();
        assert_eq!(r.best.sparsity, Sparsity::new(3, 1));
        assert_eq!(r.candidates, 7);
    }

    #[test]
    fn no_demand_is_reported() {
        let mut inst = fixtures::square(1);
        inst.demands = Default::default();
        assert_eq!(
            brute_force_sparsest(&inst, DEFAULT_LIMIT).unwrap_err(),
            OracleError::NoDemand
        );
    }

    #[test]
    fn too_large_is_reported() {
        let inst = fixtures::path(5);
        assert!(matches!(
            brute_force_sparsest(&inst, 4),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn square_dual_has_six_two_cycles() {
        let dual = DualGraph::new(&fixtures::square(1), 0).unwrap();
        let cs = all_simple_cycles(&dual, 100).unwrap();
        assert_eq!(cs.len(), 6);
        assert!(cs.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn tree_dual_cycles_are_loops() {
        // A tree's dual is one vertex with loops; each loop is a 1-cycle (a bridge cut).
        let dual = DualGraph::new(&fixtures::path(4), 0).unwrap();
        let cs = all_simple_cycles(&dual, 100).unwrap();
        assert_eq!(cs.len(), 3);
        assert!(cs.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn budget_is_enforced() {
        let dual = DualGraph::new(&fixtures::square(1), 0).unwrap();
        assert_eq!(
            all_simple_cycles(&dual, 3).unwrap_err(),
            OracleError::CycleBudgetExceeded(3)
        );
    }

    #[test]
    fn cycle_optimum_matches_brute_force() {
        for inst in [fixtures::square(1), fixtures::k4()] {
            let dual = DualGraph::new(&inst, 0).unwrap();
            let c = optimal_cycle(&dual, 1000).unwrap();
            let b = brute_force_sparsest(&inst, DEFAULT_LIMIT).unwrap();
            assert_eq!(c.objective(&dual).sparsity, b.best.sparsity);
        }
    }
}
