//! Small hand-drawn instances and random instance families with straight-line drawings.
//!
//! Every generator places vertices in the plane and derives the rotation system by sorting
//! incident edges by angle, so the embedding is planar whenever the drawing is.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::planar::{Demands, Edge, Instance, PlanarGraph, VertexId};

/// A straight-line drawing: vertex coordinates and edges `(u, v, cost)`.
#[derive(Clone, Debug)]
pub struct Drawing {
    pub coords: Vec<(f64, f64)>,
    pub edges: Vec<(VertexId, VertexId, u64)>,
}

impl Drawing {
    /// Counterclockwise rotation at every vertex.
    pub fn rotation(&self) -> Vec<Vec<usize>> {
        let n = self.coords.len();
        let mut rot: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
        for (i, &(u, v, _)) in self.edges.iter().enumerate() {
            let (xu, yu) = self.coords[u];
            let (xv, yv) = self.coords[v];
            rot[u].push(((yv - yu).atan2(xv - xu), i));
            rot[v].push(((yu - yv).atan2(xu - xv), i));
        }
        rot.into_iter()
            .map(|mut r| {
                r.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                r.into_iter().map(|(_, e)| e).collect()
            })
            .collect()
    }

    pub fn graph(&self) -> PlanarGraph {
        let edges = self
            .edges
            .iter()
            .map(|&(u, v, cost)| Edge { u, v, cost })
            .collect();
        PlanarGraph::new(self.coords.len(), edges, self.rotation())
            .expect("straight-line drawing is a planar embedding")
    }

    pub fn instance(&self, demands: &[(VertexId, VertexId, u64)]) -> Instance {
        let mut d = Demands::new();
        for &(u, v, x) in demands {
            d.add(u, v, x);
        }
        Instance::new(self.graph(), d).expect("demands in range")
    }

    /// The drawing restricted to the edges in `subset`, with vertices relabelled in order.
    /// `None` if the chosen edges do not form a connected graph.
    pub fn subdrawing(&self, subset: &[usize]) -> Option<(Drawing, Vec<VertexId>)> {
        let mut used: Vec<VertexId> = subset
            .iter()
            .flat_map(|&e| [self.edges[e].0, self.edges[e].1])
            .collect();
        used.sort_unstable();
        used.dedup();
        let mut label = vec![usize::MAX; self.coords.len()];
        for (i, &v) in used.iter().enumerate() {
            label[v] = i;
        }
        let sub = Drawing {
            coords: used.iter().map(|&v| self.coords[v]).collect(),
            edges: subset
                .iter()
                .map(|&e| {
                    let (u, v, c) = self.edges[e];
                    (label[u], label[v], c)
                })
                .collect(),
        };
        if !sub.is_connected() {
            return None;
        }
        Some((sub, used))
    }

    fn is_connected(&self) -> bool {
        let n = self.coords.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, _) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Connected and without bridges.
    pub fn is_bridgeless(&self) -> bool {
        if !self.is_connected() {
            return false;
        }
        (0..self.edges.len()).all(|skip| {
            let rest = Drawing {
                coords: self.coords.clone(),
                edges: self
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &e)| e)
                    .collect(),
            };
            rest.is_connected()
        })
    }
}

/// Four-cycle `0-1-2-3` with uniform edge cost and unit demand between `0` and `2`.
pub fn square(cost: u64) -> Instance {
    square_drawing(cost).instance(&[(0, 2, 1)])
}

pub fn square_drawing(cost: u64) -> Drawing {
    Drawing {
        coords: vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        edges: vec![(0, 1, cost), (1, 2, cost), (2, 3, cost), (3, 0, cost)],
    }
}

/// `K4` with unit costs and unit demand between `0` and `1`.
pub fn k4() -> Instance {
    k4_drawing().instance(&[(0, 1, 1)])
}

pub fn k4_drawing() -> Drawing {
    Drawing {
        coords: vec![(0.0, 0.0), (4.0, 0.0), (2.0, 3.0), (2.0, 1.0)],
        edges: vec![
            (0, 1, 1),
            (1, 2, 1),
            (2, 0, 1),
            (0, 3, 1),
            (1, 3, 1),
            (2, 3, 1),
        ],
    }
}

/// Path on `n` vertices with unit costs and unit demand between its ends.
pub fn path(n: usize) -> Instance {
    let d = Drawing {
        coords: (0..n).map(|i| (i as f64, 0.0)).collect(),
        edges: (1..n).map(|i| (i - 1, i, 1)).collect(),
    };
    d.instance(&[(0, n - 1, 1)])
}

/// `rows x cols` grid drawing with unit costs; vertex `r * cols + c` sits at `(c, r)`.
pub fn grid_drawing(rows: usize, cols: usize) -> Drawing {
    let mut coords = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            coords.push((c as f64, r as f64));
        }
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1));
            }
        }
    }
    Drawing { coords, edges }
}

/// Wheel with hub `0` and `rim` rim vertices, unit costs.
pub fn wheel_drawing(rim: usize) -> Drawing {
    let mut coords = vec![(0.0, 0.0)];
    for i in 0..rim {
        let a = std::f64::consts::TAU * i as f64 / rim as f64;
        coords.push((a.cos(), a.sin()));
    }
    let mut edges = Vec::new();
    for i in 1..=rim {
        edges.push((0, i, 1));
        edges.push((i, if i == rim { 1 } else { i + 1 }, 1));
    }
    Drawing { coords, edges }
}

/// Grid with one diagonal per cell, each cell's diagonal direction chosen at random.
pub fn triangulated_grid_drawing<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Drawing {
    let mut d = grid_drawing(rows, cols);
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols.saturating_sub(1) {
            let v = r * cols + c;
            if rng.gen_bool(0.5) {
                d.edges.push((v, v + cols + 1, 1));
            } else {
                d.edges.push((v + 1, v + cols, 1));
            }
        }
    }
    d
}

/// The octahedron drawn with one triangle inside the other.
pub fn octahedron_drawing() -> Drawing {
    let outer = [(0.0, 4.0), (-3.5, -2.0), (3.5, -2.0)];
    let inner = [(0.0, -1.0), (0.9, 0.5), (-0.9, 0.5)];
    let coords = outer.iter().chain(inner.iter()).copied().collect();
    let edges = vec![
        (0, 1, 1),
        (1, 2, 1),
        (2, 0, 1),
        (3, 4, 1),
        (4, 5, 1),
        (5, 3, 1),
        (0, 4, 1),
        (0, 5, 1),
        (1, 5, 1),
        (1, 3, 1),
        (2, 3, 1),
        (2, 4, 1),
    ];
    Drawing { coords, edges }
}

/// Random instance families exposed by the CLI generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Grid { rows: usize, cols: usize },
    Wheel { rim: usize },
    /// Triangulated grid thinned by deleting random edges while it stays bridgeless,
    /// keeping `keep` edges (or stopping when no edge can be removed).
    RandomPlanar { rows: usize, cols: usize, keep: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct WeightParams {
    pub cost_max: u64,
    pub demand_pairs: usize,
    pub demand_max: u64,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            cost_max: 4,
            demand_pairs: 3,
            demand_max: 5,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid generator parameters: {0}")]
pub struct InvalidParams(pub String);

/// Draws the family's graph with random costs in `1..=cost_max` and `demand_pairs` distinct
/// vertex pairs with demands in `1..=demand_max`.
pub fn generate<R: Rng>(
    family: Family,
    weights: WeightParams,
    rng: &mut R,
) -> Result<Instance, InvalidParams> {
    if weights.cost_max == 0 || weights.demand_max == 0 || weights.demand_pairs == 0 {
        return Err(InvalidParams("costs, demands and pair count must be positive".into()));
    }
    let mut drawing = match family {
        Family::Grid { rows, cols } => {
            if rows == 0 || cols == 0 || rows * cols < 2 {
                return Err(InvalidParams("grid needs at least two vertices".into()));
            }
            grid_drawing(rows, cols)
        }
        Family::Wheel { rim } => {
            if rim < 3 {
                return Err(InvalidParams("wheel needs at least three rim vertices".into()));
            }
            wheel_drawing(rim)
        }
        Family::RandomPlanar { rows, cols, keep } => {
            if rows < 2 || cols < 2 {
                return Err(InvalidParams("random planar needs a 2x2 grid or larger".into()));
            }
            thin_to_bridgeless(triangulated_grid_drawing(rows, cols, rng), keep, rng)
        }
    };
    for e in &mut drawing.edges {
        e.2 = rng.gen_range(1..=weights.cost_max);
    }
    let n = drawing.coords.len();
    let mut pairs: Vec<(VertexId, VertexId)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    pairs.shuffle(rng);
    let demands: Vec<_> = pairs
        .into_iter()
        .take(weights.demand_pairs)
        .map(|(u, v)| (u, v, rng.gen_range(1..=weights.demand_max)))
        .collect();
    Ok(drawing.instance(&demands))
}

fn thin_to_bridgeless<R: Rng>(mut d: Drawing, keep: usize, rng: &mut R) -> Drawing {
    let mut order: Vec<usize> = (0..d.edges.len()).collect();
    order.shuffle(rng);
    let mut removed = vec![false; d.edges.len()];
    let mut live = d.edges.len();
    for e in order {
        if live <= keep {
            break;
        }
        removed[e] = true;
        let trial = Drawing {
            coords: d.coords.clone(),
            edges: d
                .edges
                .iter()
                .enumerate()
                .filter(|&(i, _)| !removed[i])
                .map(|(_, &x)| x)
                .collect(),
        };
        if trial.is_bridgeless() {
            live -= 1;
        } else {
            removed[e] = false;
        }
    }
    d.edges = d
        .edges
        .iter()
        .enumerate()
        .filter(|&(i, _)| !removed[i])
        .map(|(_, &x)| x)
        .collect();
    d
}

/// Hosts whose connected sub-drawings make up the exhaustive duality fixtures.
pub fn duality_hosts() -> Vec<(&'static str, Drawing)> {
    let mut tri = grid_drawing(2, 3);
    tri.edges.push((0, 4, 1));
    tri.edges.push((2, 4, 1));
    vec![
        ("grid3x3", grid_drawing(3, 3)),
        ("k4", k4_drawing()),
        ("wheel5", wheel_drawing(5)),
        ("tri2x3", tri),
        ("octahedron", octahedron_drawing()),
    ]
}

/// Every connected sub-drawing of `host` with between one and `max_edges` edges, as an
/// instance with demand `1 + (u + 2v) mod 3` on every vertex pair `u < v`.
pub fn connected_subinstances(host: &Drawing, max_edges: usize) -> Vec<Instance> {
    let m = host.edges.len();
    assert!(m < 32, "host too large for subset enumeration");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << m) {
        if mask.count_ones() as usize > max_edges {
            continue;
        }
        let subset: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        if let Some((sub, _)) = host.subdrawing(&subset) {
            let n = sub.coords.len();
            let demands: Vec<_> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v, 1 + ((u + 2 * v) % 3) as u64)))
                .collect();
            out.push(sub.instance(&demands));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_face_counts() {
        let g = grid_drawing(2, 2).graph();
        assert_eq!((g.num_vertices(), g.num_edges(), g.num_faces()), (4, 4, 2));
        let g = grid_drawing(3, 3).graph();
        assert_eq!((g.num_vertices(), g.num_edges(), g.num_faces()), (9, 12, 5));
    }

    #[test]
    fn k4_has_four_faces() {
        assert_eq!(k4().graph.num_faces(), 4);
    }

    #[test]
    fn wheel_and_octahedron_are_planar() {
        let w = wheel_drawing(6).graph();
        assert_eq!(w.num_faces(), 7);
        let o = octahedron_drawing().graph();
        assert_eq!(o.num_faces(), 8);
    }

    #[test]
    fn random_planar_stays_bridgeless() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let inst = generate(
                Family::RandomPlanar {
                    rows: 3,
                    cols: 3,
                    keep: 12,
                },
                WeightParams::default(),
                &mut rng,
            )
            .unwrap();
            assert!(inst.graph.num_edges() >= 12);
            for v in 0..inst.num_vertices() {
                assert!(inst.graph.vertex_faces(v).len() >= 2);
            }
        }
    }

    #[test]
    fn subinstances_of_square() {
        let subs = connected_subinstances(&square_drawing(1), 4);
        // 4 single edges, 4 paths of two edges, 4 paths of three edges, the cycle.
        assert_eq!(subs.len(), 13);
    }
}
