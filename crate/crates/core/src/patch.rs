//! The patching step and the virtual construction that tracks a near-optimal cycle through
//! the clustering. Verification only: the solver never calls this.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::ldd::BoundedPartition;
use crate::ndhc::{build_ndhc, BuildObserver, Forcing, NdhcError, NdhcParams, NdhcTree, NodeId};
use crate::planar::{check_parity, check_separation_cover, ClosedWalk, DualCycle, DualGraph, EdgeId, VertexId};

#[derive(Clone, Debug, Serialize)]
pub struct PatchReport {
    pub input: ClosedWalk,
    pub outputs: Vec<ClosedWalk>,
    pub threshold: f64,
    /// Cost of the input's edges internal to the cluster.
    pub internal_cost: u128,
    pub start: Option<VertexId>,
    pub special_vertices: Vec<VertexId>,
    pub special_edges: Vec<EdgeId>,
    /// Cost of each shortest path from the start to a special vertex.
    pub path_costs: Vec<u64>,
    /// Total cost of the outputs minus the input cost.
    pub added_cost: u128,
    /// Per output: cost of internal input edges other than special edges.
    pub nonspecial_internal: Vec<u128>,
}

impl PatchReport {
    pub fn patched(&self) -> bool {
        self.outputs.len() > 1 || self.outputs.first() != Some(&self.input)
    }

    /// Every edge off the input is internal to the cluster.
    pub fn extra_edges_internal(&self, dual: &DualGraph, cluster: &FixedBitSet) -> bool {
        let on_input: FixedBitSet = self.input.edges().iter().copied().collect();
        self.outputs.iter().flat_map(|w| w.edges()).all(|&e| {
            let ed = dual.edge(e);
            on_input.contains(e) || (cluster.contains(ed.u) && cluster.contains(ed.v))
        })
    }
}

fn internal(dual: &DualGraph, cluster: &FixedBitSet, e: EdgeId) -> bool {
    let ed = dual.edge(e);
    cluster.contains(ed.u) && cluster.contains(ed.v)
}

/// Splits `walk` at special vertices whenever its in-cluster cost exceeds `(z/3)·delta`,
/// joining each piece back to the start through doubled shortest paths inside the cluster.
pub fn patch(
    dual: &DualGraph,
    walk: &ClosedWalk,
    cluster: &FixedBitSet,
    z: usize,
    delta: f64,
) -> PatchReport {
    let threshold = z as f64 / 3.0 * delta;
    let internal_cost: u128 = walk
        .edges()
        .iter()
        .filter(|&&e| internal(dual, cluster, e))
        .map(|&e| dual.edge(e).cost as u128)
        .sum();
    let mut report = PatchReport {
        input: walk.clone(),
        outputs: vec![walk.clone()],
        threshold,
        internal_cost,
        start: None,
        special_vertices: Vec::new(),
        special_edges: Vec::new(),
        path_costs: Vec::new(),
        added_cost: 0,
        nonspecial_internal: vec![internal_cost],
    };
    if internal_cost as f64 <= threshold {
        return report;
    }
    let r = walk
        .vertices()
        .iter()
        .copied()
        .filter(|&v| cluster.contains(v))
        .min()
        .expect("positive internal cost puts a vertex in the cluster");
    let k = walk.len();
    let offset = walk.vertices().iter().position(|&v| v == r).unwrap();
    let vs: Vec<VertexId> = (0..=k).map(|j| walk.vertices()[(offset + j) % k]).collect();
    let es: Vec<EdgeId> = (0..k).map(|j| walk.edges()[(offset + j) % k]).collect();
    let mut cuts = vec![0usize];
    let mut special_pos = FixedBitSet::with_capacity(k);
    let mut counter = 0u128;
    for (j, &e) in es.iter().enumerate() {
        if internal(dual, cluster, e) {
            counter += dual.edge(e).cost as u128;
            if counter as f64 > threshold {
                special_pos.insert(j);
                report.special_edges.push(e);
                report.special_vertices.push(vs[j + 1]);
                cuts.push(j + 1);
                counter = 0;
            }
        }
    }
    if *cuts.last().unwrap() != k {
        cuts.push(k);
    }
    let tree = dual.adjacency().dijkstra(r, cluster, None);
    let path = |v: VertexId| -> (Vec<VertexId>, Vec<EdgeId>) {
        tree.path_to(v).expect("clusters induce connected subgraphs")
    };
    for &v in &report.special_vertices {
        let (_, pe) = path(v);
        report.path_costs.push(pe.iter().map(|&e| dual.edge(e).cost).sum());
    }
    let mut outputs = Vec::new();
    let mut nonspecial = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (pa_v, pa_e) = path(vs[a]);
        let (pb_v, pb_e) = path(vs[b]);
        // r -> vs[a] along the path, vs[a] -> vs[b] along the walk, back to r.
        let mut wv: Vec<VertexId> = pa_v[..pa_v.len() - 1].to_vec();
        let mut we: Vec<EdgeId> = pa_e.clone();
        wv.extend_from_slice(&vs[a..b]);
        we.extend_from_slice(&es[a..b]);
        wv.extend(pb_v[1..].iter().rev());
        we.extend(pb_e.iter().rev());
        outputs.push(ClosedWalk::new(dual, wv, we).expect("patched pieces are closed walks"));
        nonspecial.push(
            (a..b)
                .filter(|&j| internal(dual, cluster, es[j]) && !special_pos.contains(j))
                .map(|j| dual.edge(es[j]).cost as u128)
                .sum(),
        );
    }
    let total: u128 = outputs.iter().map(|w| w.cost(dual)).sum();
    report.added_cost = total - walk.cost(dual);
    report.start = Some(r);
    report.outputs = outputs;
    report.nonspecial_internal = nonspecial;
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FailureKind {
    /// Every sample crosses the cycle more than `Z` times.
    Crossings,
    /// More than `2Z` parts hold endpoints of internal edges.
    KappaTooLarge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub cluster: NodeId,
    pub cycle: usize,
    pub kind: FailureKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrackedCycle {
    pub walk: ClosedWalk,
    pub parent: Option<usize>,
    pub alive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VirtualRunReport {
    pub cycles: Vec<TrackedCycle>,
    /// `(cluster, cycle) -> partition node`.
    #[serde(skip)]
    pub psi: BTreeMap<(NodeId, usize), NodeId>,
    pub failures: Vec<Failure>,
    pub cost0: u128,
    pub final_cost: u128,
    /// Total cost of the live collection after each level's patching.
    pub level_costs: Vec<u128>,
    pub levels: usize,
    pub z: usize,
    pub parity: bool,
    pub separation: bool,
    /// Cycles whose ψ-forcing is complete and amenable.
    pub amenable: Vec<bool>,
    pub patches: usize,
    /// Shortest paths longer than the level scale (the clustering no longer guarantees it
    /// once merged parts grow).
    pub long_paths: usize,
}

impl VirtualRunReport {
    pub fn failed(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn live(&self) -> impl Iterator<Item = (usize, &TrackedCycle)> + '_ {
        self.cycles.iter().enumerate().filter(|(_, c)| c.alive)
    }

    pub fn cost_ratio(&self) -> f64 {
        self.final_cost as f64 / self.cost0 as f64
    }

    /// `1 + 12·levels/Z`.
    pub fn cost_bound(&self) -> f64 {
        1.0 + 12.0 * self.levels as f64 / self.z as f64
    }

    pub fn all_amenable(&self) -> bool {
        self.amenable.iter().all(|&a| a)
    }
}

/// Observer that patches tracked cycles at each cluster and requires, for each one, the
/// child produced by the first low-crossing sample and the parts the cycle touches.
struct Virtual<'a> {
    dual: &'a DualGraph,
    z: usize,
    cycles: Vec<TrackedCycle>,
    psi: BTreeMap<(NodeId, usize), NodeId>,
    pending: Vec<(usize, (usize, Vec<usize>))>,
    failures: Vec<Failure>,
    level_costs: BTreeMap<usize, u128>,
    patches: usize,
    long_paths: usize,
}

impl Virtual<'_> {
    fn ancestors(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![i];
        while let Some(p) = self.cycles[i].parent {
            out.push(p);
            i = p;
        }
        out
    }

    fn valid(&self, tree: &NdhcTree, cycle: usize, x: NodeId) -> bool {
        let anc = self.ancestors(cycle);
        let mut cur = tree.node(x).parent;
        while let Some(y) = cur {
            if !tree.is_partition(y) {
                let ok = anc.iter().any(|&a| {
                    self.psi
                        .get(&(y, a))
                        .is_some_and(|&p| tree.is_ancestor(p, x))
                });
                if !ok {
                    return false;
                }
            }
            cur = tree.node(y).parent;
        }
        true
    }

    fn live_valid(&self, tree: &NdhcTree, c: NodeId) -> Vec<usize> {
        (0..self.cycles.len())
            .filter(|&i| self.cycles[i].alive && self.valid(tree, i, c))
            .collect()
    }

    fn total_cost(&self) -> u128 {
        self.cycles
            .iter()
            .filter(|c| c.alive)
            .map(|c| c.walk.cost(self.dual))
            .sum()
    }
}

impl BuildObserver for Virtual<'_> {
    fn before_cluster(&mut self, tree: &NdhcTree, c: NodeId) {
        let level = tree.node(c).level;
        let delta = tree.scale(level);
        let mut cluster = FixedBitSet::with_capacity(tree.num_dual_vertices());
        cluster.extend(tree.node(c).set.iter().copied());
        for i in self.live_valid(tree, c) {
            let rep = patch(self.dual, &self.cycles[i].walk, &cluster, self.z, delta);
            if !rep.patched() {
                continue;
            }
            self.patches += 1;
            self.long_paths += rep.path_costs.iter().filter(|&&x| x as f64 > delta).count();
            self.cycles[i].alive = false;
            for w in rep.outputs {
                self.cycles.push(TrackedCycle {
                    walk: w,
                    parent: Some(i),
                    alive: true,
                });
            }
        }
        let cost = self.total_cost();
        self.level_costs.insert(level, cost);
    }

    fn required(
        &mut self,
        tree: &NdhcTree,
        c: NodeId,
        samples: &[BoundedPartition],
    ) -> Vec<(usize, Vec<usize>)> {
        let k = tree.num_dual_vertices();
        let in_cluster: FixedBitSet = tree.node(c).set.iter().copied().collect();
        let mut out = Vec::new();
        self.pending.clear();
        for i in self.live_valid(tree, c) {
            let internal: Vec<(VertexId, VertexId)> = self.cycles[i]
                .walk
                .edges()
                .iter()
                .map(|&e| tree.dual_edge(e))
                .filter(|&(u, v)| in_cluster.contains(u) && in_cluster.contains(v))
                .collect();
            let labels: Vec<Vec<usize>> = samples.iter().map(|s| s.part_of(k)).collect();
            let Some(s) = labels
                .iter()
                .position(|l| internal.iter().filter(|&&(u, v)| l[u] != l[v]).count() <= self.z)
            else {
                self.failures.push(Failure {
                    cluster: c,
                    cycle: i,
                    kind: FailureKind::Crossings,
                });
                continue;
            };
            let mut kappa: Vec<usize> = internal
                .iter()
                .flat_map(|&(u, v)| [labels[s][u], labels[s][v]])
                .collect();
            kappa.sort_unstable();
            kappa.dedup();
            if kappa.is_empty() {
                kappa.push(0);
            }
            if kappa.len() > 2 * self.z {
                self.failures.push(Failure {
                    cluster: c,
                    cycle: i,
                    kind: FailureKind::KappaTooLarge(kappa.len()),
                });
                continue;
            }
            out.push((s, kappa.clone()));
            self.pending.push((i, (s, kappa)));
        }
        out
    }

    fn after_cluster(
        &mut self,
        _tree: &NdhcTree,
        c: NodeId,
        made: &BTreeMap<(usize, Vec<usize>), NodeId>,
    ) {
        for (i, key) in std::mem::take(&mut self.pending) {
            self.psi.insert((c, i), made[&key]);
        }
    }

    fn on_shatter(&mut self, _tree: &NdhcTree, c: NodeId, p: NodeId) {
        for i in 0..self.cycles.len() {
            if self.cycles[i].alive {
                self.psi.insert((c, i), p);
            }
        }
    }
}

/// Builds the clustering while tracking `c0` through patching, and checks the separation,
/// cost and amenability properties of the resulting collection.
pub fn run_virtual(
    dual: &DualGraph,
    c0: &DualCycle,
    params: NdhcParams,
) -> Result<(NdhcTree, VirtualRunReport), NdhcError> {
    let z = params.z;
    let mut v = Virtual {
        dual,
        z,
        cycles: vec![TrackedCycle {
            walk: c0.walk().clone(),
            parent: None,
            alive: true,
        }],
        psi: BTreeMap::new(),
        pending: Vec::new(),
        failures: Vec::new(),
        level_costs: BTreeMap::new(),
        patches: 0,
        long_paths: 0,
    };
    let tree = build_ndhc(dual, params, Some(&mut v))?;
    let live: Vec<ClosedWalk> = v
        .cycles
        .iter()
        .filter(|c| c.alive)
        .map(|c| c.walk.clone())
        .collect();
    let amenable = (0..v.cycles.len())
        .filter(|&i| v.cycles[i].alive)
        .map(|i| {
            forcing_of(&tree, &v.cycles, &v.psi, i)
                .is_amenable(&tree, v.cycles[i].walk.edges())
                .unwrap_or(false)
        })
        .collect();
    let report = VirtualRunReport {
        parity: check_parity(dual, c0.walk(), &live),
        separation: check_separation_cover(dual, c0.walk(), &live),
        cost0: c0.cost(dual),
        final_cost: v.total_cost(),
        level_costs: v.level_costs.values().copied().collect(),
        levels: tree.top_level() + 1,
        z,
        amenable,
        patches: v.patches,
        long_paths: v.long_paths,
        cycles: v.cycles,
        psi: v.psi,
        failures: v.failures,
    };
    Ok((tree, report))
}

/// ψ-derived forcing for tracked cycle `i`: at each cluster, the entry of the nearest
/// ancestor cycle that has one.
pub fn forcing_of(
    tree: &NdhcTree,
    cycles: &[TrackedCycle],
    psi: &BTreeMap<(NodeId, usize), NodeId>,
    i: usize,
) -> Forcing {
    let mut anc = vec![i];
    let mut cur = i;
    while let Some(p) = cycles[cur].parent {
        anc.push(p);
        cur = p;
    }
    let mut f = Forcing::default();
    for c in tree.cluster_nodes() {
        if let Some(p) = anc.iter().find_map(|&a| psi.get(&(c, a))) {
            f.map.insert(c, *p);
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{grid_drawing, square};
    use crate::oracle::optimal_cycle;

    fn long_cycle() -> (DualGraph, DualCycle) {
        // The boundary of the 4x4 grid dual around the central faces.
        let inst = grid_drawing(4, 5).instance(&[(0, 19, 1), (6, 13, 2)]);
        let d = DualGraph::new(&inst, 0).unwrap();
        let c = crate::oracle::all_simple_cycles(&d, 1_000_000)
            .unwrap()
            .into_iter()
            .max_by_key(|c| (c.len(), c.edge_set()))
            .unwrap();
        (d, c)
    }

    #[test]
    fn below_threshold_is_unchanged() {
        let inst = square(1);
        let d = DualGraph::new(&inst, 0).unwrap();
        let c = optimal_cycle(&d, 100).unwrap();
        let mut full = FixedBitSet::with_capacity(d.num_vertices());
        full.insert_range(..);
        let r = patch(&d, c.walk(), &full, 30, 1.0);
        assert_eq!(r.outputs, vec![c.walk().clone()]);
        assert!(!r.patched());
    }

    #[test]
    fn cycle_outside_cluster_is_unchanged() {
        let (d, c) = long_cycle();
        let cluster = FixedBitSet::with_capacity(d.num_vertices());
        let r = patch(&d, c.walk(), &cluster, 1, 0.1);
        assert_eq!(r.internal_cost, 0);
        assert!(!r.patched());
    }

    #[test]
    fn long_internal_run_is_split_with_parity() {
        let (d, c) = long_cycle();
        let mut cluster = FixedBitSet::with_capacity(d.num_vertices());
        cluster.insert_range(..);
        let (z, delta) = (3, 2.0);
        let r = patch(&d, c.walk(), &cluster, z, delta);
        assert!(r.outputs.len() >= 2, "{r:?}");
        assert!(check_parity(&d, c.walk(), &r.outputs));
        assert!(check_separation_cover(&d, c.walk(), &r.outputs));
        assert!(r.extra_edges_internal(&d, &cluster));
        let bound = (z as f64 / 3.0 + 2.0) * delta;
        assert!(r.nonspecial_internal.iter().all(|&x| x as f64 <= bound));
        let added_bound = 2.0 * (r.internal_cost as f64 / r.threshold) * 2.0 * delta;
        let diam = d.adjacency().diameter().unwrap() as f64;
        assert!(r.path_costs.iter().all(|&p| p as f64 <= diam));
        if r.path_costs.iter().all(|&p| p as f64 <= delta) {
            assert!(r.added_cost as f64 <= added_bound);
        }
    }

    #[test]
    fn virtual_run_on_small_grids_holds_up() {
        for (rows, cols, seed) in [(2, 3, 1), (3, 3, 2), (3, 4, 3)] {
            let n = rows * cols;
            let inst = grid_drawing(rows, cols).instance(&[(0, n - 1, 2), (1, n - 2, 1)]);
            let d = DualGraph::new(&inst, 0).unwrap();
            let c0 = optimal_cycle(&d, 1_000_000).unwrap();
            let (tree, rep) = run_virtual(&d, &c0, NdhcParams::new(n, 0.5, seed)).unwrap();
            tree.check_invariants().unwrap();
            assert!(!rep.failed(), "{:?}", rep.failures);
            assert!(rep.parity && rep.separation);
            assert!(rep.cost_ratio() <= rep.cost_bound());
            assert!(rep.all_amenable(), "{rows}x{cols}");
        }
    }

    #[test]
    fn small_z_forces_patching() {
        let inst = grid_drawing(4, 4).instance(&[(0, 15, 1), (5, 10, 1)]);
        let d = DualGraph::new(&inst, 0).unwrap();
        let (_, c0) = long_cycle_in(&d);
        let mut params = NdhcParams::new(16, 0.5, 4);
        params.z = 3;
        params.cap_nodes = 20_000;
        let (tree, rep) = run_virtual(&d, &c0, params).unwrap();
        tree.check_invariants().unwrap();
        assert!(rep.parity && rep.separation);
        assert!(rep.patches > 0);
    }

    fn long_cycle_in(d: &DualGraph) -> (usize, DualCycle) {
        let cs = crate::oracle::all_simple_cycles(d, 1_000_000).unwrap();
        let c = cs.into_iter().max_by_key(|c| (c.len(), c.edge_set())).unwrap();
        (c.len(), c)
    }
}
