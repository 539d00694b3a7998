//! Realizable crossing profiles: for each partition node `p`, the face sets
//! `inside(C) ∩ ∂⁺(p)` over cycles `C` amenable along the root path of `p`.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::ndhc::{NdhcTree, NodeId};
use crate::oracle::{all_simple_cycles, OracleError};
use crate::planar::{DualCycle, DualGraph, EdgeId, VertexId};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("witness {witness} of node {node} does not reproduce its profile")]
    BadWitness { node: NodeId, witness: usize },
    #[error("{0} crossing edges is too many for the guessing cross-check")]
    TooManyCrossings(usize),
}

/// A profile: sorted face ids plus the index of one cycle realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub faces: Vec<VertexId>,
    pub witness: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ProfileSet {
    pub node: NodeId,
    /// Sorted by face list.
    pub profiles: Vec<Profile>,
}

impl ProfileSet {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn position(&self, faces: &[VertexId]) -> Option<usize> {
        self.profiles
            .binary_search_by(|p| p.faces.as_slice().cmp(faces))
            .ok()
    }

    pub fn face_sets(&self) -> impl Iterator<Item = &[VertexId]> + '_ {
        self.profiles.iter().map(|p| p.faces.as_slice())
    }
}

/// Profile sets for every partition node, with the shared witness cycles.
#[derive(Clone, Debug)]
pub struct Profiles {
    cycles: Vec<DualCycle>,
    sets: BTreeMap<NodeId, ProfileSet>,
    /// Cycles amenable along the whole root path of each partition node.
    alive: BTreeMap<NodeId, Vec<usize>>,
}

/// Enumerates all simple dual cycles (up to `cycle_budget`) and filters them per node.
pub fn enumerate_aplus(
    tree: &NdhcTree,
    dual: &DualGraph,
    cycle_budget: usize,
) -> Result<Profiles, ProfileError> {
    let cycles = all_simple_cycles(dual, cycle_budget)?;
    Ok(profiles_from_cycles(tree, cycles))
}

pub fn profiles_from_cycles(tree: &NdhcTree, cycles: Vec<DualCycle>) -> Profiles {
    let mut sets = BTreeMap::new();
    let mut alive_at = BTreeMap::new();
    let mut stack: Vec<(NodeId, Vec<usize>)> = vec![(tree.root(), (0..cycles.len()).collect())];
    while let Some((p, parent_alive)) = stack.pop() {
        let limit = tree.crossing_limit(p);
        let alive: Vec<usize> = parent_alive
            .into_iter()
            .filter(|&i| tree.crossings(cycles[i].edges(), p) <= limit)
            .collect();
        let boundary = tree.boundary_plus(p);
        let mut seen: BTreeMap<Vec<VertexId>, usize> = BTreeMap::new();
        for &i in &alive {
            let faces: Vec<VertexId> = boundary
                .ones()
                .filter(|&s| cycles[i].enclosed().contains(s))
                .collect();
            seen.entry(faces).or_insert(i);
        }
        let profiles = seen
            .into_iter()
            .map(|(faces, witness)| Profile { faces, witness })
            .collect();
        sets.insert(p, ProfileSet { node: p, profiles });
        for &c in &tree.node(p).children {
            for &q in &tree.node(c).children {
                stack.push((q, alive.clone()));
            }
        }
        alive_at.insert(p, alive);
    }
    Profiles {
        cycles,
        sets,
        alive: alive_at,
    }
}

impl Profiles {
    pub fn cycles(&self) -> &[DualCycle] {
        &self.cycles
    }

    pub fn get(&self, p: NodeId) -> &ProfileSet {
        &self.sets[&p]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &ProfileSet)> + '_ {
        self.sets.iter()
    }

    /// Indices of cycles amenable along the root path of `p`.
    pub fn alive(&self, p: NodeId) -> &[usize] {
        &self.alive[&p]
    }

    pub fn total(&self) -> usize {
        self.sets.values().map(|s| s.len()).sum()
    }

    /// Index of the cycle with the given edge set, if it was enumerated.
    pub fn find_cycle(&self, edges: &[EdgeId]) -> Option<usize> {
        let mut want = edges.to_vec();
        want.sort_unstable();
        self.cycles.iter().position(|c| c.edge_set() == want)
    }

    /// Re-checks every witness against its profile.
    pub fn verify(&self, tree: &NdhcTree) -> Result<(), ProfileError> {
        for (&p, set) in &self.sets {
            let boundary = tree.boundary_plus(p);
            for prof in &set.profiles {
                let c = &self.cycles[prof.witness];
                let faces: Vec<VertexId> =
                    boundary.ones().filter(|&s| c.enclosed().contains(s)).collect();
                let amenable = tree
                    .partn_path(p)
                    .into_iter()
                    .all(|q| tree.crossings(c.edges(), q) <= tree.crossing_limit(q));
                if faces != prof.faces || !amenable {
                    return Err(ProfileError::BadWitness {
                        node: p,
                        witness: prof.witness,
                    });
                }
            }
        }
        Ok(())
    }
}

/// `{S ∪ S' : S ∈ A⁺(p), S' ∈ A⁺(q)}` over pairs agreeing on `∂⁺(p) ∩ ∂⁺(q)`, sorted
/// and deduplicated. When one node lies on the
/// root path of the other, the pair stands for the deeper node alone and its own set is
/// returned.
pub fn aplus_pair(tree: &NdhcTree, profiles: &Profiles, p: NodeId, q: NodeId) -> Vec<Vec<VertexId>> {
    let own = |x: NodeId| profiles.get(x).face_sets().map(|s| s.to_vec()).collect();
    if tree.is_ancestor(p, q) {
        return own(q);
    }
    if tree.is_ancestor(q, p) {
        return own(p);
    }
    let mut shared = tree.boundary_plus(p).clone();
    shared.intersect_with(tree.boundary_plus(q));
    let on_shared = |x: &[VertexId]| -> Vec<VertexId> {
        x.iter().copied().filter(|&f| shared.contains(f)).collect()
    };
    let mut out = BTreeSet::new();
    for a in profiles.get(p).face_sets() {
        let key = on_shared(a);
        for b in profiles.get(q).face_sets() {
            if on_shared(b) != key {
                continue;
            }
            let mut u: Vec<VertexId> = a.iter().chain(b).copied().collect();
            u.sort_unstable();
            u.dedup();
            out.insert(u);
        }
    }
    out.into_iter().collect()
}

/// Faces of `set` inside the cycle, as a sorted list.
pub fn restrict(enclosed: &FixedBitSet, set: &FixedBitSet) -> Vec<VertexId> {
    set.ones().filter(|&s| enclosed.contains(s)).collect()
}

/// Alternative enumeration for tiny instances: guess the set of edges crossing `π⁺(p)`,
/// keep guesses amenable along the root path, and collect the profiles of the simple cycles
/// with exactly that crossing set.
pub fn aplus_by_crossing_guess(
    tree: &NdhcTree,
    dual: &DualGraph,
    p: NodeId,
    max_crossing_edges: usize,
) -> Result<Vec<Vec<VertexId>>, ProfileError> {
    let label = tree.plus_label(p);
    let m = dual.num_edges();
    let crossing: Vec<EdgeId> = (0..m)
        .filter(|&e| {
            let (u, v) = tree.dual_edge(e);
            label[u] != label[v]
        })
        .collect();
    if crossing.len() > max_crossing_edges {
        return Err(ProfileError::TooManyCrossings(crossing.len()));
    }
    let path = tree.partn_path(p);
    let boundary = tree.boundary_plus(p);
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << crossing.len()) {
        let chosen: Vec<EdgeId> = (0..crossing.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| crossing[i])
            .collect();
        if path
            .iter()
            .any(|&q| tree.crossings(&chosen, q) > tree.crossing_limit(q))
        {
            continue;
        }
        for enclosed in cycles_with_crossings(dual, label, &chosen) {
            out.insert(restrict(&enclosed, boundary));
        }
    }
    Ok(out.into_iter().collect())
}

/// Enclosed sets of all simple cycles using every edge of `required` and otherwise only
/// edges within one part of `label`.
fn cycles_with_crossings(
    dual: &DualGraph,
    label: &[NodeId],
    required: &[EdgeId],
) -> Vec<FixedBitSet> {
    let k = dual.num_vertices();
    let g = dual.graph();
    let mut adj: Vec<Vec<(VertexId, EdgeId)>> = vec![Vec::new(); k];
    for e in 0..dual.num_edges() {
        let ed = g.edge(e);
        if label[ed.u] == label[ed.v] || required.contains(&e) {
            adj[ed.u].push((ed.v, e));
            if ed.u != ed.v {
                adj[ed.v].push((ed.u, e));
            }
        }
    }
    let starts: Vec<VertexId> = match required.first() {
        Some(&e) => vec![g.edge(e).u],
        None => (0..k).collect(),
    };
    struct Search<'a> {
        dual: &'a DualGraph,
        adj: &'a [Vec<(VertexId, EdgeId)>],
        required: &'a [EdgeId],
        start: VertexId,
        on_path: Vec<bool>,
        verts: Vec<VertexId>,
        edges: Vec<EdgeId>,
        found: Vec<FixedBitSet>,
    }
    impl Search<'_> {
        fn go(&mut self, v: VertexId) {
            for &(w, e) in &self.adj[v] {
                if self.edges.contains(&e) {
                    continue;
                }
                if w == self.start {
                    self.edges.push(e);
                    if self.required.iter().all(|r| self.edges.contains(r)) {
                        if let Ok(c) = DualCycle::from_vertices_edges(
                            self.dual,
                            self.verts.clone(),
                            self.edges.clone(),
                        ) {
                            self.found.push(c.enclosed().clone());
                        }
                    }
                    self.edges.pop();
                    continue;
                }
                if self.on_path[w] {
                    continue;
                }
                self.on_path[w] = true;
                self.verts.push(w);
                self.edges.push(e);
                self.go(w);
                self.edges.pop();
                self.verts.pop();
                self.on_path[w] = false;
            }
        }
    }
    let mut found = Vec::new();
    for s in starts {
        let mut search = Search {
            dual,
            adj: &adj,
            required,
            start: s,
            on_path: vec![false; k],
            verts: vec![s],
            edges: Vec::new(),
            found: Vec::new(),
        };
        search.on_path[s] = true;
        search.go(s);
        found.append(&mut search.found);
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{grid_drawing, k4, square};
    use crate::ndhc::{build_ndhc, NdhcParams};
    use crate::planar::Instance;

    fn setup(inst: &Instance, seed: u64) -> (DualGraph, NdhcTree, Profiles) {
        let d = DualGraph::new(inst, 0).unwrap();
        let t = build_ndhc(&d, NdhcParams::new(inst.num_vertices(), 0.5, seed), None).unwrap();
        let p = enumerate_aplus(&t, &d, 100_000).unwrap();
        (d, t, p)
    }

    #[test]
    fn root_has_only_the_empty_profile() {
        let (_, t, p) = setup(&k4(), 1);
        let set = p.get(t.root());
        assert_eq!(set.face_sets().collect::<Vec<_>>(), vec![&[] as &[usize]]);
    }

    #[test]
    fn witnesses_verify() {
        let inst = grid_drawing(2, 3).instance(&[(0, 5, 1)]);
        let (_, t, p) = setup(&inst, 4);
        p.verify(&t).unwrap();
    }

    #[test]
    fn crossing_guess_agrees_on_small_duals() {
        for inst in [square(1), k4()] {
            let (d, t, p) = setup(&inst, 2);
            for q in t.partition_nodes() {
                let guessed = aplus_by_crossing_guess(&t, &d, q, 12).unwrap();
                let listed: Vec<Vec<usize>> =
                    p.get(q).face_sets().map(|s| s.to_vec()).collect();
                assert_eq!(guessed, listed, "node {q}");
            }
        }
    }

    /// Cycles with identical crossings of the cumulative partition can still enclose
    /// different boundary faces: a cycle inside one part may or may not surround others.
    #[test]
    fn crossing_signature_alone_does_not_fix_the_profile() {
        let inst = grid_drawing(3, 3).instance(&[(0, 8, 1)]);
        let (_, t, p) = setup(&inst, 9);
        let mut conflicts = 0;
        for q in t.partition_nodes() {
            let label = t.plus_label(q);
            let mut by_sig: BTreeMap<Vec<EdgeId>, BTreeSet<Vec<VertexId>>> = BTreeMap::new();
            for &i in p.alive(q) {
                let c = &p.cycles()[i];
                let mut sig: Vec<EdgeId> = c
                    .edges()
                    .iter()
                    .copied()
                    .filter(|&e| {
                        let (u, v) = t.dual_edge(e);
                        label[u] != label[v]
                    })
                    .collect();
                sig.sort_unstable();
                by_sig
                    .entry(sig)
                    .or_default()
                    .insert(restrict(c.enclosed(), t.boundary_plus(q)));
            }
            conflicts += by_sig.values().filter(|v| v.len() > 1).count();
        }
        assert!(conflicts > 0);
    }

    #[test]
    fn pair_on_a_root_path_is_the_deeper_set() {
        let (_, t, p) = setup(&k4(), 3);
        for q in t.partition_nodes() {
            let own: Vec<Vec<usize>> = p.get(q).face_sets().map(|s| s.to_vec()).collect();
            assert_eq!(aplus_pair(&t, &p, q, q), own);
            assert_eq!(aplus_pair(&t, &p, q, t.root()), own);
        }
    }
}

#[cfg(test)]
mod pair_tests {
    use super::*;
    use crate::fixtures::grid_drawing;
    use crate::ndhc::{build_ndhc, NdhcParams};

    #[test]
    fn unrelated_pairs_are_bounded_by_the_product() {
        let inst = grid_drawing(3, 4).instance(&[(0, 11, 1)]);
        let d = DualGraph::new(&inst, 0).unwrap();
        let t = build_ndhc(&d, NdhcParams::new(12, 0.5, 1), None).unwrap();
        let p = enumerate_aplus(&t, &d, 10_000).unwrap();
        let nodes: Vec<NodeId> = t.partition_nodes().collect();
        let mut checked = 0;
        for &a in &nodes {
            for &b in &nodes {
                if t.is_ancestor(a, b) || t.is_ancestor(b, a) || !t.is_partition(t.lca(a, b)) {
                    continue;
                }
                let pair = aplus_pair(&t, &p, a, b);
                assert!(pair.len() <= p.get(a).len() * p.get(b).len());
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
}
