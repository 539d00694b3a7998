use std::collections::BTreeMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use super::{Kind, NdhcError, NdhcTree, Node, NodeId};
use crate::planar::{EdgeId, VertexId};

impl NdhcTree {
    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, x: NodeId) -> &Node {
        &self.nodes[x]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_partition(&self, x: NodeId) -> bool {
        matches!(self.nodes[x].kind, Kind::Partition { .. })
    }

    pub fn is_shattering(&self, x: NodeId) -> bool {
        matches!(self.nodes[x].kind, Kind::Partition { shattering: true })
    }

    pub fn partition_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&x| self.is_partition(x))
    }

    pub fn cluster_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&x| !self.is_partition(x))
    }

    /// Parts of the partition at `p`, one per child cluster.
    pub fn parts(&self, p: NodeId) -> impl Iterator<Item = &[VertexId]> + '_ {
        self.nodes[p].children.iter().map(|&c| self.nodes[c].set.as_slice())
    }

    /// Partition nodes from the root to `x`, inclusive.
    pub fn partn_path(&self, x: NodeId) -> Vec<NodeId> {
        let mut path = Vec::new();
        let mut cur = Some(x);
        while let Some(y) = cur {
            if self.is_partition(y) {
                path.push(y);
            }
            cur = self.nodes[y].parent;
        }
        path.reverse();
        path
    }

    /// Whether `a` is `x` or an ancestor of it. Works on partially built trees.
    pub fn is_ancestor(&self, a: NodeId, x: NodeId) -> bool {
        if !self.tin.is_empty() {
            return self.tin[a] <= self.tin[x] && self.tout[x] <= self.tout[a];
        }
        let mut cur = Some(x);
        while let Some(y) = cur {
            if y == a {
                return true;
            }
            cur = self.nodes[y].parent;
        }
        false
    }

    pub fn lca(&self, mut x: NodeId, mut y: NodeId) -> NodeId {
        while self.nodes[x].depth > self.nodes[y].depth {
            x = self.nodes[x].parent.expect("deeper node has a parent");
        }
        while self.nodes[y].depth > self.nodes[x].depth {
            y = self.nodes[y].parent.expect("deeper node has a parent");
        }
        while x != y {
            x = self.nodes[x].parent.expect("distinct nodes below the root");
            y = self.nodes[y].parent.expect("distinct nodes below the root");
        }
        x
    }

    /// Part index of each dual vertex in the partition at `p`; `u32::MAX` outside.
    pub fn part_label(&self, p: NodeId) -> &[u32] {
        &self.part_label[p]
    }

    /// The cumulative partition along the root path: each dual vertex mapped to the
    /// cluster node of its part.
    pub fn plus_label(&self, p: NodeId) -> &[NodeId] {
        &self.plus_label[p]
    }

    /// Dual faces (primal vertices) spanning several parts of the partition at `p`.
    pub fn boundary(&self, p: NodeId) -> &FixedBitSet {
        &self.boundary[p]
    }

    /// Boundary of the cumulative partition at `p`.
    pub fn boundary_plus(&self, p: NodeId) -> &FixedBitSet {
        &self.boundary_plus[p]
    }

    /// Edges of `edges` internal to the partitioned set whose ends lie in different parts.
    pub fn crossings(&self, edges: &[EdgeId], p: NodeId) -> usize {
        let label = &self.part_label[p];
        super::count_crossings(label, edges.iter().map(|&e| self.dual_edges[e]))
    }

    /// Crossings of the cumulative partition at `p`.
    pub fn crossings_plus(&self, edges: &[EdgeId], p: NodeId) -> usize {
        let label = &self.plus_label[p];
        edges
            .iter()
            .filter(|&&e| {
                let (u, v) = self.dual_edges[e];
                label[u] != label[v]
            })
            .count()
    }

    /// Crossing budget at `p`: zero at shattering nodes, `Z` elsewhere.
    pub fn crossing_limit(&self, p: NodeId) -> usize {
        if self.is_shattering(p) {
            0
        } else {
            self.params.z
        }
    }

    /// Checks the structural invariants of a built tree.
    pub fn check_invariants(&self) -> Result<(), NdhcError> {
        let bad = |msg: String| Err(NdhcError::Invariant(msg));
        let root = &self.nodes[0];
        if !self.is_partition(0) || root.children.len() != 1 {
            return bad("root must be a partition node with one child".into());
        }
        if root.set.len() != self.num_vertices {
            return bad("root must hold every dual vertex".into());
        }
        for (x, node) in self.nodes.iter().enumerate() {
            for &ch in &node.children {
                if self.is_partition(ch) == self.is_partition(x) {
                    return bad(format!("node {x} and child {ch} do not alternate"));
                }
            }
            match node.kind {
                Kind::Cluster => {
                    if node.set.is_empty() {
                        return bad(format!("cluster {x} is empty"));
                    }
                    if node.children.is_empty() && node.set.len() != 1 {
                        return bad(format!("leaf cluster {x} is not a singleton"));
                    }
                }
                Kind::Partition { shattering } => {
                    let mut union: Vec<VertexId> =
                        self.parts(x).flat_map(|p| p.iter().copied()).collect();
                    union.sort_unstable();
                    let before = union.len();
                    union.dedup();
                    if before != union.len() || union != node.set {
                        return bad(format!("partition {x} does not partition its cluster"));
                    }
                    if let Some(c) = node.parent {
                        if self.nodes[c].set != node.set {
                            return bad(format!("partition {x} set differs from its parent"));
                        }
                    }
                    let arity = node.children.len();
                    if shattering {
                        if self.parts(x).any(|p| p.len() != 1) {
                            return bad(format!("shattering node {x} has a non-singleton part"));
                        }
                        if node.children.iter().any(|&c| !self.nodes[c].children.is_empty()) {
                            return bad(format!("shattering node {x} has a non-leaf child"));
                        }
                    } else if x != 0 && arity > 2 * self.params.z {
                        return bad(format!("normal node {x} has {arity} parts, above 2Z"));
                    }
                    if let Some(o) = &node.origin {
                        self.check_origin(x, o)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn check_origin(&self, p: NodeId, o: &super::Origin) -> Result<(), NdhcError> {
        let c = self.nodes[p].parent.expect("normal partition has a parent");
        let Some(samples) = self.samples(c) else {
            return Err(NdhcError::Invariant(format!("cluster {c} kept no samples")));
        };
        let base = &samples[o.sample];
        let set: FixedBitSet = self.nodes[c].set.iter().copied().collect();
        let edges: Vec<(VertexId, VertexId)> = self
            .dual_edges
            .iter()
            .copied()
            .filter(|&(u, v)| u != v && set.contains(u) && set.contains(v))
            .collect();
        let want = super::merge_parts(&base.parts, &o.kappa, &edges, self.num_vertices);
        let have: Vec<Vec<VertexId>> = self.parts(p).map(|s| s.to_vec()).collect();
        if super::canonical(have) != want {
            return Err(NdhcError::Invariant(format!(
                "partition {p} is not the merge of its recorded origin"
            )));
        }
        let level = self.nodes[c].level;
        if (base.bound - self.scale(level + 1)).abs() > 1e-9 {
            return Err(NdhcError::Invariant(format!(
                "partition {p} was sampled at the wrong scale"
            )));
        }
        Ok(())
    }

    /// Nested text dump: one line per node with id, level and contents.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            let node = &self.nodes[x];
            let indent = "  ".repeat(node.depth);
            let _ = match node.kind {
                Kind::Cluster => writeln!(out, "{indent}C{x} level={} {:?}", node.level, node.set),
                Kind::Partition { shattering } => {
                    let parts: Vec<&[VertexId]> = self.parts(x).collect();
                    let tag = if shattering { " shattering" } else { "" };
                    writeln!(out, "{indent}P{x} level={}{tag} {:?}", node.level, parts)
                }
            };
            for &ch in node.children.iter().rev() {
                stack.push(ch);
            }
        }
        out
    }
}

/// A choice of child partition node for some cluster nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Forcing {
    pub map: BTreeMap<NodeId, NodeId>,
}

impl Forcing {
    /// Partition nodes of the induced ordinary hierarchy, root first. Errors if a retained
    /// non-leaf cluster has no choice or a choice is not one of its children.
    pub fn retained(&self, tree: &NdhcTree) -> Result<Vec<NodeId>, NdhcError> {
        for (&c, &p) in &self.map {
            if tree.node(p).parent != Some(c) {
                return Err(NdhcError::InvalidForcing(format!("{p} is not a child of {c}")));
            }
        }
        let mut out = vec![tree.root()];
        let mut stack = vec![tree.root()];
        while let Some(p) = stack.pop() {
            for &c in &tree.node(p).children {
                if tree.node(c).children.is_empty() {
                    continue;
                }
                let Some(&q) = self.map.get(&c) else {
                    return Err(NdhcError::InvalidForcing(format!("cluster {c} has no choice")));
                };
                out.push(q);
                stack.push(q);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Whether `edges` cross every retained partition node within its budget.
    pub fn is_amenable(&self, tree: &NdhcTree, edges: &[EdgeId]) -> Result<bool, NdhcError> {
        Ok(self
            .retained(tree)?
            .into_iter()
            .all(|p| tree.crossings(edges, p) <= tree.crossing_limit(p)))
    }
}

/// A forcing under which the cycle with edge list `edges` is amenable at every retained
/// node, choosing the first admissible child at each cluster.
pub fn find_amenable_forcing(tree: &NdhcTree, edges: &[EdgeId]) -> Option<Forcing> {
    let mut memo: BTreeMap<NodeId, Option<NodeId>> = BTreeMap::new();
    fn ok(
        tree: &NdhcTree,
        edges: &[EdgeId],
        c: NodeId,
        memo: &mut BTreeMap<NodeId, Option<NodeId>>,
    ) -> bool {
        if tree.node(c).children.is_empty() {
            return true;
        }
        if let Some(r) = memo.get(&c) {
            return r.is_some();
        }
        let mut choice = None;
        for &p in &tree.node(c).children {
            if tree.crossings(edges, p) > tree.crossing_limit(p) {
                continue;
            }
            if tree.node(p).children.iter().all(|&c2| ok(tree, edges, c2, memo)) {
                choice = Some(p);
                break;
            }
        }
        memo.insert(c, choice);
        choice.is_some()
    }
    let top = tree.node(tree.root()).children[0];
    if !ok(tree, edges, top, &mut memo) {
        return None;
    }
    // Keep only the choices reachable from the root.
    let mut forcing = Forcing::default();
    let mut stack = vec![top];
    while let Some(c) = stack.pop() {
        if tree.node(c).children.is_empty() {
            continue;
        }
        let p = memo[&c].expect("reachable clusters succeeded");
        forcing.map.insert(c, p);
        stack.extend(tree.node(p).children.iter().copied());
    }
    Some(forcing)
}
