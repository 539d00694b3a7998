use fixedbitset::FixedBitSet;

use super::{dart_edge, Demands, Edge, EdgeId, Instance, PlanarError, PlanarGraph, VertexId};
use crate::paths::CostGraph;

/// The planar dual of an instance. Dual vertices are primal faces, dual edge `e` crosses
/// primal edge `e` and carries its cost, and the faces of the dual are the primal vertices.
///
/// The designated infinite face is a primal vertex; the side of a dual cycle that does not
/// contain it is the set the cycle encloses.
#[derive(Clone, Debug)]
pub struct DualGraph {
    primal: PlanarGraph,
    dual: PlanarGraph,
    infinite_face: VertexId,
    demands: Demands,
    adjacency: CostGraph,
}

impl DualGraph {
    pub fn new(instance: &Instance, infinite_face: VertexId) -> Result<Self, PlanarError> {
        let primal = instance.graph.clone();
        if infinite_face >= primal.num_vertices() {
            return Err(PlanarError::PreconditionViolated(format!(
                "infinite face {infinite_face} is not a primal vertex"
            )));
        }
        let dual = Self::dual_of(&primal)?;
        let adjacency = CostGraph::from_planar(&dual);
        Ok(DualGraph {
            primal,
            dual,
            infinite_face,
            demands: instance.demands.clone(),
            adjacency,
        })
    }

    /// Dual embedding of `g`: the rotation at a face is its boundary walk, reusing dart ids.
    pub fn dual_of(g: &PlanarGraph) -> Result<PlanarGraph, PlanarError> {
        let edges: Vec<Edge> = g
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| Edge {
                u: g.dart_face(2 * e),
                v: g.dart_face(2 * e + 1),
                cost: edge.cost,
            })
            .collect();
        let rotation = (0..g.num_faces()).map(|f| g.face_darts(f).to_vec()).collect();
        PlanarGraph::from_dart_rotation(edges, rotation)
    }

    pub fn primal(&self) -> &PlanarGraph {
        &self.primal
    }

    pub fn graph(&self) -> &PlanarGraph {
        &self.dual
    }

    pub fn adjacency(&self) -> &CostGraph {
        &self.adjacency
    }

    pub fn infinite_face(&self) -> VertexId {
        self.infinite_face
    }

    pub fn demands(&self) -> &Demands {
        &self.demands
    }

    /// Number of dual vertices (primal faces).
    pub fn num_vertices(&self) -> usize {
        self.dual.num_vertices()
    }

    /// Number of dual faces (primal vertices).
    pub fn num_faces(&self) -> usize {
        self.primal.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.dual.num_edges()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        self.dual.edge(e)
    }

    /// Dual vertices around primal vertex `s`, i.e. the vertices of dual face `s`.
    pub fn face_vertices(&self, s: VertexId) -> &[VertexId] {
        self.primal.vertex_faces(s)
    }

    /// Dual edge bounding dual face `s` (the primal edges at `s`).
    pub fn face_edges(&self, s: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.primal.incident_edges(s)
    }

    /// Two-colours the primal vertices so that crossing an edge of `odd` flips the colour,
    /// and returns the colour class avoiding the infinite face. `None` if `odd` is not a cut.
    pub fn side_of(&self, odd: &FixedBitSet) -> Option<FixedBitSet> {
        let n = self.primal.num_vertices();
        let mut colour: Vec<Option<bool>> = vec![None; n];
        colour[self.infinite_face] = Some(false);
        let mut stack = vec![self.infinite_face];
        while let Some(v) = stack.pop() {
            let cv = colour[v].unwrap();
            for &d in self.primal.rotation(v) {
                let e = dart_edge(d);
                let w = self.primal.head(d);
                let cw = cv ^ odd.contains(e);
                match colour[w] {
                    None => {
                        colour[w] = Some(cw);
                        stack.push(w);
                    }
                    Some(c) if c != cw => return None,
                    _ => {}
                }
            }
        }
        let mut side = FixedBitSet::with_capacity(n);
        for (v, c) in colour.iter().enumerate() {
            if *c == Some(true) {
                side.insert(v);
            }
        }
        Some(side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn square_dual_is_two_vertices_four_parallel_edges() {
        let inst = fixtures::square(1);
        let d = DualGraph::new(&inst, 0).unwrap();
        assert_eq!(d.num_vertices(), 2);
        assert_eq!(d.num_edges(), 4);
        for e in d.graph().edges() {
            assert_ne!(e.u, e.v);
        }
        assert_eq!(d.graph().num_faces(), 4);
    }

    #[test]
    fn k4_is_self_dual() {
        let inst = fixtures::k4();
        let d = DualGraph::new(&inst, 0).unwrap();
        assert_eq!(d.num_vertices(), 4);
        assert_eq!(d.graph().num_faces(), 4);
        let mut deg = vec![0; 4];
        for e in d.graph().edges() {
            assert_ne!(e.u, e.v);
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        assert_eq!(deg, vec![3, 3, 3, 3]);
        // Simple: no parallel edges.
        let mut pairs: Vec<_> = d
            .graph()
            .edges()
            .iter()
            .map(|e| (e.u.min(e.v), e.u.max(e.v)))
            .collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 6);
    }

    #[test]
    fn tree_dual_is_a_bouquet_of_loops() {
        let inst = fixtures::path(3);
        let d = DualGraph::new(&inst, 0).unwrap();
        assert_eq!(d.num_vertices(), 1);
        assert!(d.graph().edges().iter().all(|e| e.is_loop()));
    }
}
