use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::PlanarError;

pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

/// Directed edge-end. Dart `2e` runs `u -> v` for edge `e = (u, v)`, dart `2e + 1` runs back.
pub type Dart = usize;

#[inline]
pub fn dart_edge(d: Dart) -> EdgeId {
    d >> 1
}

#[inline]
pub fn reverse(d: Dart) -> Dart {
    d ^ 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub cost: u64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A connected graph with a rotation system whose face tracing satisfies Euler's formula.
///
/// Multigraphs are allowed: planar duals routinely have parallel edges and self-loops.
#[derive(Clone, Debug)]
pub struct PlanarGraph {
    edges: Vec<Edge>,
    /// Cyclic order of outgoing darts around each vertex.
    rotation: Vec<Vec<Dart>>,
    /// Position of each dart in its tail's rotation.
    rot_pos: Vec<usize>,
    dart_face: Vec<FaceId>,
    faces: Vec<Vec<Dart>>,
    vertex_faces: Vec<Vec<FaceId>>,
}

impl PlanarGraph {
    /// Builds a graph from a rotation given as edge indices per vertex.
    ///
    /// For a self-loop, the first occurrence in the rotation is taken as the `u -> v` end.
    pub fn new(
        n: usize,
        edges: Vec<Edge>,
        rotation: Vec<Vec<EdgeId>>,
    ) -> Result<Self, PlanarError> {
        if rotation.len() != n {
            return Err(PlanarError::InvalidRotation(format!(
                "rotation has {} vertices, expected {n}",
                rotation.len()
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(PlanarError::VertexOutOfRange { edge: i, n });
            }
            if e.cost == 0 {
                return Err(PlanarError::NonPositiveCost(i));
            }
        }
        let mut seen = vec![0u8; edges.len()];
        let mut dart_rot = Vec::with_capacity(n);
        for (v, order) in rotation.iter().enumerate() {
            let mut darts = Vec::with_capacity(order.len());
            for &e in order {
                let edge = edges.get(e).ok_or_else(|| {
                    PlanarError::InvalidRotation(format!("vertex {v} lists unknown edge {e}"))
                })?;
                let d = if edge.is_loop() {
                    if edge.u != v {
                        return Err(PlanarError::InvalidRotation(format!(
                            "loop {e} listed at vertex {v}"
                        )));
                    }
                    let d = 2 * e + seen[e] as usize;
                    seen[e] += 1;
                    d
                } else if edge.u == v {
                    seen[e] += 1;
                    2 * e
                } else if edge.v == v {
                    seen[e] += 1;
                    2 * e + 1
                } else {
                    return Err(PlanarError::InvalidRotation(format!(
                        "vertex {v} lists non-incident edge {e}"
                    )));
                };
                darts.push(d);
            }
            dart_rot.push(darts);
        }
        Self::from_dart_rotation(edges, dart_rot)
    }

    /// Builds a graph from a rotation given directly as darts.
    pub fn from_dart_rotation(
        edges: Vec<Edge>,
        rotation: Vec<Vec<Dart>>,
    ) -> Result<Self, PlanarError> {
        let n = rotation.len();
        let m = edges.len();
        let mut rot_pos = vec![usize::MAX; 2 * m];
        for (v, darts) in rotation.iter().enumerate() {
            for (i, &d) in darts.iter().enumerate() {
                if d >= 2 * m {
                    return Err(PlanarError::InvalidRotation(format!("unknown dart {d}")));
                }
                let e = &edges[dart_edge(d)];
                let tail = if d & 1 == 0 { e.u } else { e.v };
                if tail != v {
                    return Err(PlanarError::InvalidRotation(format!(
                        "dart {d} listed at vertex {v} but leaves {tail}"
                    )));
                }
                if rot_pos[d] != usize::MAX {
                    return Err(PlanarError::InvalidRotation(format!(
                        "edge {} end listed twice",
                        dart_edge(d)
                    )));
                }
                rot_pos[d] = i;
            }
        }
        if let Some(d) = rot_pos.iter().position(|&p| p == usize::MAX) {
            return Err(PlanarError::InvalidRotation(format!(
                "edge {} end missing from rotation",
                dart_edge(d)
            )));
        }
        if n == 0 {
            return Err(PlanarError::Disconnected);
        }

        let mut g = PlanarGraph {
            edges,
            rotation,
            rot_pos,
            dart_face: Vec::new(),
            faces: Vec::new(),
            vertex_faces: Vec::new(),
        };
        if !g.is_connected() {
            return Err(PlanarError::Disconnected);
        }
        g.trace_faces();
        let euler = n as i64 - m as i64 + g.faces.len() as i64;
        if euler != 2 {
            return Err(PlanarError::EulerViolation {
                vertices: n,
                edges: m,
                faces: g.faces.len(),
            });
        }
        Ok(g)
    }

    fn trace_faces(&mut self) {
        let m = self.edges.len();
        let n = self.rotation.len();
        if m == 0 {
            // An isolated vertex bounds a single face.
            self.faces = vec![Vec::new()];
            self.dart_face = Vec::new();
            self.vertex_faces = vec![vec![0]; n];
            return;
        }
        let mut dart_face = vec![usize::MAX; 2 * m];
        let mut faces = Vec::new();
        for start in 0..2 * m {
            if dart_face[start] != usize::MAX {
                continue;
            }
            let f = faces.len();
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                dart_face[d] = f;
                walk.push(d);
                d = self.face_next(d);
                if d == start {
                    break;
                }
            }
            faces.push(walk);
        }
        let mut vertex_faces = vec![Vec::new(); n];
        for d in 0..2 * m {
            vertex_faces[self.tail(d)].push(dart_face[d]);
        }
        for fs in &mut vertex_faces {
            fs.sort_unstable();
            fs.dedup();
        }
        self.dart_face = dart_face;
        self.faces = faces;
        self.vertex_faces = vertex_faces;
    }

    /// Next dart along the face to which `d` belongs.
    pub fn face_next(&self, d: Dart) -> Dart {
        let r = reverse(d);
        let v = self.tail(r);
        let rot = &self.rotation[v];
        rot[(self.rot_pos[r] + 1) % rot.len()]
    }

    fn is_connected(&self) -> bool {
        let n = self.rotation.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &d in &self.rotation[v] {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    pub fn num_vertices(&self) -> usize {
        self.rotation.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn tail(&self, d: Dart) -> VertexId {
        let e = &self.edges[dart_edge(d)];
        if d & 1 == 0 {
            e.u
        } else {
            e.v
        }
    }

    pub fn head(&self, d: Dart) -> VertexId {
        self.tail(reverse(d))
    }

    pub fn rotation(&self, v: VertexId) -> &[Dart] {
        &self.rotation[v]
    }

    /// Rotation as edge indices, the form used by the instance file.
    pub fn rotation_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.rotation[v].iter().map(|&d| dart_edge(d)).collect()
    }

    pub fn dart_face(&self, d: Dart) -> FaceId {
        self.dart_face[d]
    }

    pub fn face_darts(&self, f: FaceId) -> &[Dart] {
        &self.faces[f]
    }

    /// Distinct faces incident to `v`, sorted.
    pub fn vertex_faces(&self, v: VertexId) -> &[FaceId] {
        &self.vertex_faces[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rotation[v].len()
    }

    /// Edge ids incident to `v`, each once (loops included).
    pub fn incident_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.rotation[v]
            .iter()
            .filter(|&&d| !(self.edges[dart_edge(d)].is_loop() && d & 1 == 1))
            .map(|&d| dart_edge(d))
    }

    pub fn total_cost(&self) -> u128 {
        self.edges.iter().map(|e| e.cost as u128).sum()
    }

    /// Whether the subgraph induced by `set` is connected (and nonempty).
    pub fn induces_connected(&self, set: &FixedBitSet) -> bool {
        let Some(start) = set.ones().next() else {
            return false;
        };
        let mut seen = FixedBitSet::with_capacity(self.num_vertices());
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &d in &self.rotation[v] {
                let w = self.head(d);
                if set.contains(w) && !seen.contains(w) {
                    seen.insert(w);
                    stack.push(w);
                }
            }
        }
        seen.count_ones(..) == set.count_ones(..)
    }

    /// Connected components of the subgraph induced by `set`.
    pub fn induced_components(&self, set: &FixedBitSet) -> Vec<FixedBitSet> {
        let mut seen = FixedBitSet::with_capacity(self.num_vertices());
        let mut out = Vec::new();
        for s in set.ones() {
            if seen.contains(s) {
                continue;
            }
            let mut comp = FixedBitSet::with_capacity(self.num_vertices());
            comp.insert(s);
            seen.insert(s);
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &d in &self.rotation[v] {
                    let w = self.head(d);
                    if set.contains(w) && !seen.contains(w) {
                        seen.insert(w);
                        comp.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Edges with exactly one endpoint in `set`.
    pub fn cut_edges(&self, set: &FixedBitSet) -> Vec<EdgeId> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| set.contains(e.u) != set.contains(e.v))
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PlanarGraph {
        let edges = vec![
            Edge { u: 0, v: 1, cost: 1 },
            Edge { u: 1, v: 2, cost: 1 },
            Edge { u: 2, v: 3, cost: 1 },
            Edge { u: 3, v: 0, cost: 1 },
        ];
        let rotation = vec![vec![0, 3], vec![1, 0], vec![2, 1], vec![3, 2]];
        PlanarGraph::new(4, edges, rotation).unwrap()
    }

    #[test]
    fn square_has_two_faces() {
        let g = square();
        assert_eq!(g.num_faces(), 2);
        for v in 0..4 {
            assert_eq!(g.vertex_faces(v), &[0, 1]);
        }
    }

    #[test]
    fn single_vertex_has_one_face() {
        let g = PlanarGraph::new(1, vec![], vec![vec![]]).unwrap();
        assert_eq!(g.num_faces(), 1);
    }

    #[test]
    fn loop_on_single_vertex() {
        let g = PlanarGraph::new(1, vec![Edge { u: 0, v: 0, cost: 2 }], vec![vec![0, 0]]).unwrap();
        assert_eq!(g.num_faces(), 2);
    }

    #[test]
    fn disconnected_is_rejected() {
        let err = PlanarGraph::new(
            3,
            vec![Edge { u: 0, v: 1, cost: 1 }],
            vec![vec![0], vec![0], vec![]],
        )
        .unwrap_err();
        assert!(matches!(err, PlanarError::Disconnected));
    }

    #[test]
    fn nonplanar_rotation_is_rejected() {
        // K4 with rotations that trace too few faces.
        let edges = vec![
            Edge { u: 0, v: 1, cost: 1 },
            Edge { u: 0, v: 2, cost: 1 },
            Edge { u: 0, v: 3, cost: 1 },
            Edge { u: 1, v: 2, cost: 1 },
            Edge { u: 1, v: 3, cost: 1 },
            Edge { u: 2, v: 3, cost: 1 },
        ];
        let rotation = vec![vec![0, 1, 2], vec![0, 3, 4], vec![1, 3, 5], vec![2, 4, 5]];
        let err = PlanarGraph::new(4, edges, rotation).unwrap_err();
        assert!(matches!(err, PlanarError::EulerViolation { .. }));
    }

    #[test]
    fn missing_edge_end_is_rejected() {
        let err = PlanarGraph::new(
            2,
            vec![Edge { u: 0, v: 1, cost: 1 }],
            vec![vec![0], vec![]],
        )
        .unwrap_err();
        assert!(matches!(err, PlanarError::InvalidRotation(_)));
    }
}
