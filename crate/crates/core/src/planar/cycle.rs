use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{sparsity, CutResult, DualGraph, EdgeId, PlanarError, VertexId};

/// A closed walk in the dual: `edges[i]` joins `vertices[i]` to `vertices[i + 1]` (cyclically).
///
/// Patching produces closed walks that may revisit vertices or reuse edges; a simple cycle is
/// the special case handled by [`DualCycle`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ClosedWalk {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
}

impl ClosedWalk {
    pub fn new(
        dual: &DualGraph,
        vertices: Vec<VertexId>,
        edges: Vec<EdgeId>,
    ) -> Result<Self, PlanarError> {
        if vertices.len() != edges.len() || vertices.is_empty() {
            return Err(PlanarError::NotClosedWalk(format!(
                "{} vertices, {} edges",
                vertices.len(),
                edges.len()
            )));
        }
        let k = vertices.len();
        for i in 0..k {
            let (a, b) = (vertices[i], vertices[(i + 1) % k]);
            let Some(e) = (edges[i] < dual.num_edges()).then(|| dual.edge(edges[i])) else {
                return Err(PlanarError::NotClosedWalk(format!("unknown edge {}", edges[i])));
            };
            if !((e.u == a && e.v == b) || (e.u == b && e.v == a)) {
                return Err(PlanarError::NotClosedWalk(format!(
                    "edge {} does not join {a} and {b}",
                    edges[i]
                )));
            }
        }
        Ok(ClosedWalk { vertices, edges })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Total cost counting multiplicity.
    pub fn cost(&self, dual: &DualGraph) -> u128 {
        self.edges.iter().map(|&e| dual.edge(e).cost as u128).sum()
    }

    /// Edges used an odd number of times.
    pub fn odd_edges(&self, num_edges: usize) -> FixedBitSet {
        let mut odd = FixedBitSet::with_capacity(num_edges);
        for &e in &self.edges {
            odd.toggle(e);
        }
        odd
    }

    /// Primal vertices separated from the infinite face by the walk's odd edges.
    pub fn side(&self, dual: &DualGraph) -> FixedBitSet {
        dual.side_of(&self.odd_edges(dual.num_edges()))
            .expect("a closed dual walk has a cut as its odd-edge set")
    }

    pub fn is_simple(&self, dual: &DualGraph) -> bool {
        let k = self.len();
        let mut seen = vec![false; dual.num_vertices()];
        for &v in &self.vertices {
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
        match k {
            1 => dual.edge(self.edges[0]).is_loop(),
            2 => self.edges[0] != self.edges[1],
            _ => true,
        }
    }

    /// Sparsity of the side of the walk, using the walk's own cost (with multiplicity).
    pub fn walk_objective(&self, dual: &DualGraph) -> (u128, u128) {
        let side = self.side(dual);
        (self.cost(dual), dual.demands().separated(&side))
    }
}

/// A simple cycle of the dual with its cached enclosed face set `U(C)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCycle {
    walk: ClosedWalk,
    enclosed: FixedBitSet,
}

impl DualCycle {
    pub fn new(dual: &DualGraph, walk: ClosedWalk) -> Result<Self, PlanarError> {
        if !walk.is_simple(dual) {
            return Err(PlanarError::NotSimple(format!(
                "walk {:?} repeats a vertex",
                walk.vertices()
            )));
        }
        let enclosed = walk.side(dual);
        let size = enclosed.count_ones(..);
        if size == 0 || size == dual.num_faces() {
            return Err(PlanarError::NotSimple("cycle encloses nothing".into()));
        }
        Ok(DualCycle { walk, enclosed })
    }

    pub fn from_vertices_edges(
        dual: &DualGraph,
        vertices: Vec<VertexId>,
        edges: Vec<EdgeId>,
    ) -> Result<Self, PlanarError> {
        Self::new(dual, ClosedWalk::new(dual, vertices, edges)?)
    }

    pub fn walk(&self) -> &ClosedWalk {
        &self.walk
    }

    pub fn enclosed(&self) -> &FixedBitSet {
        &self.enclosed
    }

    pub fn edges(&self) -> &[EdgeId] {
        self.walk.edges()
    }

    pub fn vertices(&self) -> &[VertexId] {
        self.walk.vertices()
    }

    pub fn len(&self) -> usize {
        self.walk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walk.is_empty()
    }

    pub fn edge_set(&self) -> Vec<EdgeId> {
        let mut es = self.walk.edges().to_vec();
        es.sort_unstable();
        es
    }

    pub fn cost(&self, dual: &DualGraph) -> u128 {
        self.walk.cost(dual)
    }

    /// Cycle objective: edge cost over demand split by the enclosed set.
    pub fn objective(&self, dual: &DualGraph) -> CutResult {
        let cost = self.cost(dual);
        let demand = dual.demands().separated(&self.enclosed);
        CutResult {
            set: self.enclosed.ones().collect(),
            cost,
            demand,
            sparsity: super::Sparsity::new(cost, demand),
        }
    }

    /// The simple cut `delta(U(C))` with the same edge set.
    pub fn to_cut(&self, dual: &DualGraph) -> Result<FixedBitSet, PlanarError> {
        let primal = dual.primal();
        let u = self.enclosed.clone();
        let mut rest = FixedBitSet::with_capacity(primal.num_vertices());
        rest.insert_range(..);
        rest.difference_with(&u);
        if !primal.induces_connected(&u) || !primal.induces_connected(&rest) {
            return Err(PlanarError::NotSimple("cut side is disconnected".into()));
        }
        if primal.cut_edges(&u) != self.edge_set() {
            return Err(PlanarError::NotSimple("cut and cycle edge sets differ".into()));
        }
        Ok(u)
    }

    /// The dual cycle formed by the edges of the simple cut `delta(U)`.
    pub fn from_cut(dual: &DualGraph, set: &FixedBitSet) -> Result<Self, PlanarError> {
        let primal = dual.primal();
        let n = primal.num_vertices();
        let size = set.ones().filter(|&v| v < n).count();
        if size == 0 || size == n {
            return Err(PlanarError::EmptyOrFullSet);
        }
        let mut rest = FixedBitSet::with_capacity(n);
        rest.insert_range(..);
        rest.difference_with(set);
        if !primal.induces_connected(set) || !primal.induces_connected(&rest) {
            return Err(PlanarError::NotSimple("cut side is disconnected".into()));
        }
        let cut = primal.cut_edges(set);
        let mut incident: Vec<Vec<EdgeId>> = vec![Vec::new(); dual.num_vertices()];
        for &e in &cut {
            let de = dual.edge(e);
            incident[de.u].push(e);
            incident[de.v].push(e);
        }
        if incident.iter().any(|inc| !inc.is_empty() && inc.len() != 2) {
            return Err(PlanarError::NotSimple("cut edges do not form a cycle".into()));
        }
        let e0 = cut[0];
        let start = dual.edge(e0).u;
        let mut vertices = vec![start];
        let mut edges = vec![e0];
        let mut x = dual.edge(e0).other(start);
        let mut prev = e0;
        while x != start {
            vertices.push(x);
            let next = if incident[x][0] == prev {
                incident[x][1]
            } else {
                incident[x][0]
            };
            edges.push(next);
            x = dual.edge(next).other(x);
            prev = next;
            if edges.len() > cut.len() {
                return Err(PlanarError::NotSimple("cut edges do not close up".into()));
            }
        }
        if edges.len() != cut.len() {
            return Err(PlanarError::NotSimple("cut edges form several cycles".into()));
        }
        Self::from_vertices_edges(dual, vertices, edges)
    }

    /// Sparsity of `U(C)` evaluated as a primal cut.
    pub fn cut_sparsity(&self, dual: &DualGraph) -> CutResult {
        let inst = super::Instance {
            graph: dual.primal().clone(),
            demands: dual.demands().clone(),
        };
        sparsity(&inst, &self.enclosed).expect("enclosed set is proper")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn square_cut_around_vertex_zero_is_a_two_cycle() {
        let inst = fixtures::square(1);
        let dual = DualGraph::new(&inst, 3).unwrap();
        let mut u = FixedBitSet::with_capacity(4);
        u.insert(0);
        let c = DualCycle::from_cut(&dual, &u).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.edge_set(), vec![0, 3]);
        assert_eq!(c.enclosed().ones().collect::<Vec<_>>(), vec![0]);
        assert_eq!(c.to_cut(&dual).unwrap(), u);
    }

    #[test]
    fn infinite_face_is_never_enclosed() {
        let inst = fixtures::square(1);
        let dual = DualGraph::new(&inst, 0).unwrap();
        let mut u = FixedBitSet::with_capacity(4);
        u.insert(0);
        let c = DualCycle::from_cut(&dual, &u).unwrap();
        assert!(!c.enclosed().contains(0));
        assert_eq!(c.enclosed().count_ones(..), 3);
    }

    #[test]
    fn disconnected_side_is_not_simple() {
        let inst = fixtures::square(1);
        let dual = DualGraph::new(&inst, 0).unwrap();
        let mut u = FixedBitSet::with_capacity(4);
        u.insert(0);
        u.insert(2);
        assert!(matches!(
            DualCycle::from_cut(&dual, &u),
            Err(PlanarError::NotSimple(_))
        ));
    }

    #[test]
    fn repeated_vertex_walk_is_not_simple() {
        let inst = fixtures::square(1);
        let dual = DualGraph::new(&inst, 0).unwrap();
        let (a, b) = (dual.edge(0).u, dual.edge(0).v);
        let walk = ClosedWalk::new(&dual, vec![a, b, a, b], vec![0, 1, 2, 3]).unwrap();
        assert!(matches!(
            DualCycle::new(&dual, walk),
            Err(PlanarError::NotSimple(_))
        ));
    }

    #[test]
    fn k4_vertex_cut_is_a_triangle() {
        let inst = fixtures::k4();
        let dual = DualGraph::new(&inst, 3).unwrap();
        let mut u = FixedBitSet::with_capacity(4);
        u.insert(0);
        let c = DualCycle::from_cut(&dual, &u).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.edge_set(), inst.graph.cut_edges(&u));
    }
}
