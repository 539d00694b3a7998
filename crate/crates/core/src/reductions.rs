//! Normalisation to polynomially bounded integer costs and demands.
//!
//! A guess fixes the costliest edge `e` of the target cut and its largest demand pair. Edges
//! costlier than `e` are contracted, remaining costs become `ceil(c n^2 / c(e))` and demands
//! above the guessed one are dropped while the rest become `floor(d n^3 / d_max)`, where `n`
//! is the original vertex count.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::planar::{
    dart_edge, sparsity, CutResult, Dart, Demands, Edge, EdgeId, Instance, PlanarError,
    PlanarGraph, VertexId,
};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("invalid guess: {0}")]
    InvalidGuess(String),
    #[error(transparent)]
    Planar(#[from] PlanarError),
}

#[derive(Clone, Debug)]
pub struct NormalizedInstance {
    pub instance: Instance,
    pub guess_edge: EdgeId,
    /// The guessed pair as original vertices.
    pub guess_pair: (VertexId, VertexId),
    /// Original vertex to normalised vertex.
    pub vertex_map: Vec<VertexId>,
    /// Original edge to normalised edge; `None` when contracted or dropped as a loop.
    pub edge_map: Vec<Option<EdgeId>>,
    /// One normalised cost unit equals `cost_unit.0 / cost_unit.1` original units.
    pub cost_unit: (u64, u64),
    /// One normalised demand unit equals `demand_unit.0 / demand_unit.1` original units.
    pub demand_unit: (u64, u64),
}

impl NormalizedInstance {
    /// The identity normalisation, used when inputs are already in range.
    pub fn identity(inst: &Instance) -> Self {
        let n = inst.num_vertices();
        NormalizedInstance {
            instance: inst.clone(),
            guess_edge: 0,
            guess_pair: inst.demands.iter().next().map_or((0, 0), |(u, v, _)| (u, v)),
            vertex_map: (0..n).collect(),
            edge_map: (0..inst.graph.num_edges()).map(Some).collect(),
            cost_unit: (1, 1),
            demand_unit: (1, 1),
        }
    }

    /// Original vertices whose image lies in `set`.
    pub fn lift(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.vertex_map.len());
        for (v, &w) in self.vertex_map.iter().enumerate() {
            if set.contains(w) {
                out.insert(v);
            }
        }
        out
    }

    /// Evaluates the lift of `set` on the original instance.
    pub fn lift_cut(&self, original: &Instance, set: &FixedBitSet) -> Result<CutResult, PlanarError> {
        sparsity(original, &self.lift(set))
    }
}

/// Whether costs lie in `[1, n^2]` and demands in `[0, n^3]`.
pub fn in_range(inst: &Instance) -> bool {
    let n = inst.num_vertices() as u128;
    inst.graph.edges().iter().all(|e| (e.cost as u128) <= n * n)
        && inst.demands.iter().all(|(_, _, d)| (d as u128) <= n * n * n)
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
}

/// Contracts every edge costlier than `threshold` and drops the resulting self-loops.
/// Returns the contracted graph, the vertex map and the edge map.
fn contract_above(
    g: &PlanarGraph,
    threshold: u64,
) -> Result<(PlanarGraph, Vec<VertexId>, Vec<Option<EdgeId>>), PlanarError> {
    let n = g.num_vertices();
    let m = g.num_edges();
    let mut dsu = Dsu((0..n).collect());
    let mut rot: Vec<Vec<Dart>> = (0..n).map(|v| g.rotation(v).to_vec()).collect();
    let tail = |d: Dart| -> VertexId {
        let e = g.edge(dart_edge(d));
        if d & 1 == 0 {
            e.u
        } else {
            e.v
        }
    };
    for (i, e) in g.edges().iter().enumerate() {
        if e.cost <= threshold {
            continue;
        }
        let a = dsu.find(e.u);
        let b = dsu.find(e.v);
        let (da, db) = (2 * i, 2 * i + 1);
        if a == b {
            rot[a].retain(|&d| d != da && d != db);
            continue;
        }
        let ra = std::mem::take(&mut rot[a]);
        let rb = std::mem::take(&mut rot[b]);
        let pa = ra.iter().position(|&d| d == da).expect("dart at its tail");
        let pb = rb.iter().position(|&d| d == db).expect("dart at its tail");
        let mut merged = Vec::with_capacity(ra.len() + rb.len() - 2);
        merged.extend_from_slice(&ra[..pa]);
        merged.extend_from_slice(&rb[pb + 1..]);
        merged.extend_from_slice(&rb[..pb]);
        merged.extend_from_slice(&ra[pa + 1..]);
        dsu.0[b] = a;
        rot[a] = merged;
    }
    let roots: Vec<usize> = (0..n).map(|v| dsu.find(v)).collect();
    // Drop loops created by contraction (and any original loops).
    let mut edge_map = vec![None; m];
    let mut new_edges = Vec::new();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        let r = roots[v];
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
    }
    for (i, e) in g.edges().iter().enumerate() {
        let (a, b) = (roots[e.u], roots[e.v]);
        if e.cost > threshold || a == b {
            continue;
        }
        edge_map[i] = Some(new_edges.len());
        new_edges.push(Edge {
            u: label[a],
            v: label[b],
            cost: e.cost,
        });
    }
    let mut new_rot = vec![Vec::new(); next];
    for v in 0..n {
        if roots[v] != v {
            continue;
        }
        new_rot[label[v]] = rot[v]
            .iter()
            .filter_map(|&d| {
                let k = edge_map[dart_edge(d)]?;
                debug_assert_eq!(roots[tail(d)], v);
                Some(2 * k + (d & 1))
            })
            .collect();
    }
    let vertex_map = roots.iter().map(|&r| label[r]).collect();
    Ok((PlanarGraph::from_dart_rotation(new_edges, new_rot)?, vertex_map, edge_map))
}

/// Normalises `inst` under the guess `(guess_edge, guess_pair)`.
pub fn normalize_instance(
    inst: &Instance,
    guess_edge: EdgeId,
    guess_pair: (VertexId, VertexId),
) -> Result<NormalizedInstance, ReductionError> {
    let g = &inst.graph;
    let n = inst.num_vertices() as u128;
    let e = *g
        .edges()
        .get(guess_edge)
        .ok_or_else(|| ReductionError::InvalidGuess(format!("no edge {guess_edge}")))?;
    if e.is_loop() {
        return Err(ReductionError::InvalidGuess(format!("edge {guess_edge} is a loop")));
    }
    if inst.demands.get(guess_pair.0, guess_pair.1) == 0 {
        return Err(ReductionError::InvalidGuess(format!(
            "pair {guess_pair:?} has no demand"
        )));
    }
    let (cg, vertex_map, edge_map) = contract_above(g, e.cost)?;
    let (gu, gv) = (vertex_map[guess_pair.0], vertex_map[guess_pair.1]);
    if vertex_map[e.u] == vertex_map[e.v] {
        return Err(ReductionError::InvalidGuess(format!(
            "edge {guess_edge} is contracted away"
        )));
    }
    if gu == gv {
        return Err(ReductionError::InvalidGuess(format!(
            "pair {guess_pair:?} is merged by contraction"
        )));
    }
    let mut merged = Demands::new();
    for (u, v, d) in inst.demands.iter() {
        merged.add(vertex_map[u], vertex_map[v], d);
    }
    let dmax = merged.get(gu, gv) as u128;
    let cmax = e.cost as u128;
    let n2 = n * n;
    let n3 = n2 * n;
    let edges = cg
        .edges()
        .iter()
        .map(|x| Edge {
            cost: (x.cost as u128 * n2).div_ceil(cmax) as u64,
            ..*x
        })
        .collect::<Vec<_>>();
    let rotation = (0..cg.num_vertices()).map(|v| cg.rotation(v).to_vec()).collect();
    let graph = PlanarGraph::from_dart_rotation(edges, rotation)?;
    let mut demands = Demands::new();
    for (u, v, d) in merged.iter() {
        let d = d as u128;
        if d <= dmax {
            demands.add(u, v, (d * n3 / dmax) as u64);
        }
    }
    Ok(NormalizedInstance {
        instance: Instance::new(graph, demands)?,
        guess_edge,
        guess_pair: (guess_pair.0.min(guess_pair.1), guess_pair.0.max(guess_pair.1)),
        vertex_map,
        edge_map,
        cost_unit: (e.cost, (n2) as u64),
        demand_unit: (dmax as u64, n3 as u64),
    })
}

/// Every valid guess in a fixed order: edges by id, then the positive-demand pairs whose
/// endpoints survive contraction, one per merged pair.
pub fn guess_iterator(inst: &Instance) -> impl Iterator<Item = NormalizedInstance> + '_ {
    (0..inst.graph.num_edges()).flat_map(move |e| {
        let mut seen = std::collections::BTreeSet::new();
        inst.demands
            .iter()
            .filter_map(|(u, v, _)| normalize_instance(inst, e, (u, v)).ok())
            .filter(|ni| {
                let (a, b) = (ni.vertex_map[ni.guess_pair.0], ni.vertex_map[ni.guess_pair.1]);
                seen.insert((a.min(b), a.max(b)))
            })
            .collect::<Vec<_>>()
    })
}

/// The normalisation used when only one guess is run: the costliest edge and the largest
/// demand pair, which contracts and drops nothing.
pub fn single_guess(inst: &Instance) -> Result<NormalizedInstance, ReductionError> {
    if in_range(inst) {
        return Ok(NormalizedInstance::identity(inst));
    }
    let (e, _) = inst
        .graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_loop())
        .max_by_key(|&(i, e)| (e.cost, std::cmp::Reverse(i)))
        .ok_or_else(|| ReductionError::InvalidGuess("no edges".into()))?;
    let (u, v, _) = inst
        .demands
        .iter()
        .max_by_key(|&(u, v, d)| (d, std::cmp::Reverse((u, v))))
        .ok_or_else(|| ReductionError::InvalidGuess("no demands".into()))?;
    normalize_instance(inst, e, (u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, Drawing};

    #[test]
    fn contraction_of_expensive_edge() {
        let d = Drawing {
            coords: vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            edges: vec![(0, 1, 1), (1, 2, 100)],
        };
        let inst = d.instance(&[(0, 2, 1)]);
        let ni = normalize_instance(&inst, 0, (0, 2)).unwrap();
        assert_eq!(ni.instance.num_vertices(), 2);
        assert_eq!(ni.instance.graph.num_edges(), 1);
        assert_eq!(ni.edge_map, vec![Some(0), None]);
        assert_eq!(ni.vertex_map, vec![0, 1, 1]);
        assert_eq!(ni.instance.graph.edge(0).cost, 9);
        assert_eq!(ni.instance.demands.get(0, 1), 27);
    }

    #[test]
    fn in_range_guess_only_rescales() {
        let inst = fixtures::square(1);
        let ni = normalize_instance(&inst, 0, (0, 2)).unwrap();
        assert_eq!(ni.instance.num_vertices(), 4);
        assert!(ni.instance.graph.edges().iter().all(|e| e.cost == 16));
        assert_eq!(ni.instance.demands.get(0, 2), 64);
    }

    #[test]
    fn guess_counts() {
        assert_eq!(guess_iterator(&fixtures::square(1)).count(), 4);
        assert_eq!(guess_iterator(&fixtures::path(2)).count(), 1);
    }

    #[test]
    fn contraction_keeps_embedding_planar() {
        let mut d = fixtures::grid_drawing(3, 3);
        for (i, e) in d.edges.iter_mut().enumerate() {
            e.2 = 1 + (i as u64 * 7) % 5;
        }
        let inst = d.instance(&[(0, 8, 2), (2, 6, 1)]);
        let mut count = 0;
        for ni in guess_iterator(&inst) {
            let g = &ni.instance.graph;
            assert!(g.edges().iter().all(|e| (1..=81).contains(&e.cost)));
            assert!(ni.instance.demands.iter().all(|(_, _, d)| d <= 729));
            count += 1;
        }
        assert!(count > 0);
    }

    #[test]
    fn invalid_guesses_are_rejected() {
        let inst = fixtures::square(1);
        assert!(normalize_instance(&inst, 9, (0, 2)).is_err());
        assert!(normalize_instance(&inst, 0, (0, 1)).is_err());
    }
}
