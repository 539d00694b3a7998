use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::{Edge, PlanarError, PlanarGraph, VertexId};

/// Pairwise demands keyed by `(min, max)` vertex pair. Zero demands are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Demands {
    map: BTreeMap<(VertexId, VertexId), u64>,
}

impl Demands {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
        (u.min(v), u.max(v))
    }

    /// Adds `d` to the demand of `{u, v}`.
    pub fn add(&mut self, u: VertexId, v: VertexId, d: u64) {
        if d == 0 || u == v {
            return;
        }
        *self.map.entry(Self::key(u, v)).or_insert(0) += d;
    }

    pub fn get(&self, u: VertexId, v: VertexId) -> u64 {
        self.map.get(&Self::key(u, v)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexId, u64)> + '_ {
        self.map.iter().map(|(&(u, v), &d)| (u, v, d))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn total(&self) -> u128 {
        self.map.values().map(|&d| d as u128).sum()
    }

    pub fn max(&self) -> u64 {
        self.map.values().copied().max().unwrap_or(0)
    }

    /// Demand with exactly one endpoint in `set`.
    pub fn separated(&self, set: &FixedBitSet) -> u128 {
        self.iter()
            .filter(|&(u, v, _)| set.contains(u) != set.contains(v))
            .map(|(_, _, d)| d as u128)
            .sum()
    }
}

/// A sparsest-cut instance: an embedded planar supply graph plus demands on vertex pairs.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: PlanarGraph,
    pub demands: Demands,
}

impl Instance {
    pub fn new(graph: PlanarGraph, demands: Demands) -> Result<Self, PlanarError> {
        let n = graph.num_vertices();
        for (u, v, _) in demands.iter() {
            if u >= n || v >= n {
                return Err(PlanarError::InvalidDemand(format!(
                    "pair ({u}, {v}) outside 0..{n}"
                )));
            }
        }
        Ok(Instance { graph, demands })
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn from_json(text: &str) -> Result<Self, PlanarError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| PlanarError::Parse(e.to_string()))?;
        file.build()
    }

    pub fn to_file(&self) -> InstanceFile {
        let g = &self.graph;
        InstanceFile {
            n: g.num_vertices(),
            edges: g.edges().iter().map(|e| [e.u as u64, e.v as u64, e.cost]).collect(),
            rotation: (0..g.num_vertices())
                .map(|v| (v, g.rotation_edges(v)))
                .collect(),
            demands: self
                .demands
                .iter()
                .map(|(u, v, d)| [u as u64, v as u64, d])
                .collect(),
        }
    }

    /// JSON with one edge, rotation entry or demand per line.
    pub fn to_json(&self) -> String {
        let f = self.to_file();
        let rows = |xs: &[[u64; 3]]| -> String {
            xs.iter()
                .map(|x| format!("    {}", serde_json::to_string(x).expect("row serializes")))
                .collect::<Vec<_>>()
                .join(",\n")
        };
        let rotation = f
            .rotation
            .iter()
            .map(|(v, r)| format!("    \"{v}\": {}", serde_json::to_string(r).expect("row serializes")))
            .collect::<Vec<_>>()
            .join(",\n");
        format!(
            "{{\n  \"n\": {},\n  \"edges\": [\n{}\n  ],\n  \"rotation\": {{\n{}\n  }},\n  \"demands\": [\n{}\n  ]\n}}",
            f.n,
            rows(&f.edges),
            rotation,
            rows(&f.demands)
        )
    }
}

/// On-disk instance document.
///
/// Vertices are numbered `0..n`. Edges are `[u, v, cost]` with positive integer cost and
/// are referenced by position. `rotation` maps every vertex to the cyclic order of its
/// incident edge indices; a self-loop is listed twice. Demands are `[u, v, d]` with
/// nonnegative integer `d`; repeated pairs accumulate.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub edges: Vec<[u64; 3]>,
    pub rotation: BTreeMap<usize, Vec<usize>>,
    #[serde(default)]
    pub demands: Vec<[u64; 3]>,
}

impl InstanceFile {
    pub fn build(&self) -> Result<Instance, PlanarError> {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|&[u, v, cost]| Edge {
                u: u as usize,
                v: v as usize,
                cost,
            })
            .collect();
        if let Some(&k) = self.rotation.keys().find(|&&k| k >= self.n) {
            return Err(PlanarError::InvalidRotation(format!(
                "rotation lists vertex {k} outside 0..{}",
                self.n
            )));
        }
        let rotation = (0..self.n)
            .map(|v| self.rotation.get(&v).cloned().unwrap_or_default())
            .collect();
        let graph = PlanarGraph::new(self.n, edges, rotation)?;
        let mut demands = Demands::new();
        for &[u, v, d] in &self.demands {
            if u as usize >= self.n || v as usize >= self.n {
                return Err(PlanarError::InvalidDemand(format!(
                    "pair ({u}, {v}) outside 0..{}",
                    self.n
                )));
            }
            if u == v && d > 0 {
                return Err(PlanarError::InvalidDemand(format!("self-pair ({u}, {v})")));
            }
            demands.add(u as usize, v as usize, d);
        }
        Instance::new(graph, demands)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{
        "n": 4,
        "edges": [[0,1,1],[1,2,1],[2,3,1],[3,0,1]],
        "rotation": {"0": [0,3], "1": [1,0], "2": [2,1], "3": [3,2]},
        "demands": [[0,2,1]]
    }"#;

    #[test]
    fn parses_square() {
        let inst = Instance::from_json(SQUARE).unwrap();
        assert_eq!(inst.num_vertices(), 4);
        assert_eq!(inst.graph.num_faces(), 2);
        assert_eq!(inst.demands.get(2, 0), 1);
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = SQUARE.replacen("\"n\": 4,", "\"n\": 4, \"weights\": [],", 1);
        assert!(matches!(
            Instance::from_json(&text),
            Err(PlanarError::Parse(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let inst = Instance::from_json(SQUARE).unwrap();
        let again = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst.to_file(), again.to_file());
    }

    #[test]
    fn rejects_out_of_range_demand() {
        let text = SQUARE.replace("[[0,2,1]]", "[[0,9,1]]");
        assert!(matches!(
            Instance::from_json(&text),
            Err(PlanarError::InvalidDemand(_))
        ));
    }
}
