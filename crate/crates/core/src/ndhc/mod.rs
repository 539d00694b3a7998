//! Nondeterministic hierarchical clustering of the dual graph.
//!
//! The tree alternates cluster nodes (vertex sets) and partition nodes (partitions of the
//! parent cluster). Every non-singleton cluster gets several alternative partitions: for
//! each of a few random bounded partitions and each small set `kappa` of its parts, the
//! partition obtained by merging the other parts into the chosen ones. Clusters still larger
//! than a vertex after the last scale are shattered into singletons.

mod merge;
mod query;

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::ldd::{sample_bounded_partition, BoundedPartition, LddError};
use crate::planar::{DualGraph, VertexId};
use crate::rng::stage_rng;

pub use merge::{canonical, count_crossings, merge_parts, Parts};
pub use query::{find_amenable_forcing, Forcing};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Kind {
    Cluster,
    Partition { shattering: bool },
}

/// Which sampled partition and which chosen parts produced a normal partition node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Origin {
    pub sample: usize,
    pub kappa: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub level: usize,
    pub depth: usize,
    pub kind: Kind,
    /// Cluster: its vertex set. Partition: the set being partitioned.
    pub set: Vec<VertexId>,
    pub origin: Option<Origin>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NdhcParams {
    pub z: usize,
    pub a: f64,
    /// Alternative partitions kept per cluster.
    pub cap_partitions: usize,
    /// `kappa` sets tried per sampled partition.
    pub cap_kappa: usize,
    /// Total nodes; once reached, remaining clusters are shattered.
    pub cap_nodes: usize,
    /// Fail on the first cap hit instead of recording it.
    pub strict: bool,
    pub seed: u64,
}

impl NdhcParams {
    /// `Z = ceil(3 ln n / eps)`.
    pub fn default_z(n: usize, eps: f64) -> usize {
        ((3.0 * (n.max(2) as f64).ln() / eps).ceil() as usize).max(1)
    }

    pub fn new(n: usize, eps: f64, seed: u64) -> Self {
        NdhcParams {
            z: Self::default_z(n, eps),
            a: 2.0,
            cap_partitions: 6,
            cap_kappa: 1024,
            cap_nodes: 4000,
            strict: false,
            seed,
        }
    }

    /// `ceil(a log2 n)` bounded partitions per cluster.
    pub fn samples(&self, n: usize) -> usize {
        ((self.a * (n.max(2) as f64).log2()).ceil() as usize).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CapKind {
    Partitions,
    Kappa,
    Nodes,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CapEvent {
    pub cap: CapKind,
    pub node: NodeId,
}

#[derive(Debug, Error)]
pub enum NdhcError {
    #[error("cap {0:?} exceeded at node {1}")]
    CapExceeded(CapKind, NodeId),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Ldd(#[from] LddError),
    #[error("tree invariant violated: {0}")]
    Invariant(String),
    #[error("forcing is invalid: {0}")]
    InvalidForcing(String),
}

/// Hooks into construction, used by the virtual procedure.
pub trait BuildObserver {
    /// Before the partitions of cluster `c` are sampled.
    fn before_cluster(&mut self, _tree: &NdhcTree, _c: NodeId) {}
    /// `(sample, kappa)` choices that must appear among the children of `c` regardless of caps.
    fn required(
        &mut self,
        _tree: &NdhcTree,
        _c: NodeId,
        _samples: &[BoundedPartition],
    ) -> Vec<(usize, Vec<usize>)> {
        Vec::new()
    }
    /// The partition node each tried or required `(sample, kappa)` ended up as.
    fn after_cluster(
        &mut self,
        _tree: &NdhcTree,
        _c: NodeId,
        _made: &BTreeMap<(usize, Vec<usize>), NodeId>,
    ) {
    }
    fn on_shatter(&mut self, _tree: &NdhcTree, _c: NodeId, _p: NodeId) {}
}

#[derive(Clone, Debug)]
pub struct NdhcTree {
    nodes: Vec<Node>,
    params: NdhcParams,
    diameter: u64,
    top_level: usize,
    num_vertices: usize,
    dual_edges: Vec<(VertexId, VertexId)>,
    face_vertices: Vec<Vec<VertexId>>,
    samples: BTreeMap<NodeId, Vec<BoundedPartition>>,
    events: Vec<CapEvent>,
    part_label: Vec<Vec<u32>>,
    plus_label: Vec<Vec<NodeId>>,
    boundary: Vec<FixedBitSet>,
    boundary_plus: Vec<FixedBitSet>,
    tin: Vec<usize>,
    tout: Vec<usize>,
}

fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        (64 - (x - 1).leading_zeros()) as usize
    }
}

struct Builder<'a, 'o> {
    tree: NdhcTree,
    dual: &'a DualGraph,
    observer: Option<&'o mut dyn BuildObserver>,
}

/// Runs the construction on the dual graph.
pub fn build_ndhc(
    dual: &DualGraph,
    params: NdhcParams,
    observer: Option<&mut dyn BuildObserver>,
) -> Result<NdhcTree, NdhcError> {
    if params.a <= 0.0 || params.cap_partitions == 0 || params.cap_kappa == 0 || params.cap_nodes == 0 {
        return Err(NdhcError::InvalidParams("a and all caps must be positive".into()));
    }
    let k = dual.num_vertices();
    let diameter = dual
        .adjacency()
        .diameter()
        .ok_or_else(|| NdhcError::InvalidParams("dual graph is disconnected".into()))?;
    let all: Vec<VertexId> = (0..k).collect();
    let tree = NdhcTree {
        nodes: vec![
            Node {
                parent: None,
                children: vec![1],
                level: 0,
                depth: 0,
                kind: Kind::Partition { shattering: false },
                set: all.clone(),
                origin: None,
            },
            Node {
                parent: Some(0),
                children: Vec::new(),
                level: 0,
                depth: 1,
                kind: Kind::Cluster,
                set: all,
                origin: None,
            },
        ],
        top_level: ceil_log2(diameter),
        diameter,
        num_vertices: k,
        dual_edges: dual.graph().edges().iter().map(|e| (e.u, e.v)).collect(),
        face_vertices: (0..dual.num_faces())
            .map(|s| dual.face_vertices(s).to_vec())
            .collect(),
        samples: BTreeMap::new(),
        events: Vec::new(),
        part_label: Vec::new(),
        plus_label: Vec::new(),
        boundary: Vec::new(),
        boundary_plus: Vec::new(),
        tin: Vec::new(),
        tout: Vec::new(),
        params,
    };
    let mut b = Builder {
        tree,
        dual,
        observer,
    };
    b.run()?;
    let mut tree = b.tree;
    tree.finalize();
    Ok(tree)
}

impl Builder<'_, '_> {
    fn run(&mut self) -> Result<(), NdhcError> {
        let n = self.dual.num_faces();
        let samples = self.tree.params.samples(n);
        let mut current = vec![1];
        for level in 0..=self.tree.top_level {
            let mut next = Vec::new();
            for &c in &current {
                if self.tree.nodes[c].set.len() <= 1 {
                    continue;
                }
                self.expand(c, level, samples)?;
                for &p in &self.tree.nodes[c].children {
                    next.extend_from_slice(&self.tree.nodes[p].children);
                }
            }
            current = next;
        }
        let leaves: Vec<NodeId> = (0..self.tree.nodes.len())
            .filter(|&c| {
                let node = &self.tree.nodes[c];
                node.kind == Kind::Cluster && node.children.is_empty() && node.set.len() > 1
            })
            .collect();
        for c in leaves {
            let parts = self.tree.nodes[c].set.iter().map(|&v| vec![v]).collect();
            let p = self.add_partition(c, parts, true, None);
            if let Some(obs) = self.observer.as_deref_mut() {
                obs.on_shatter(&self.tree, c, p);
            }
        }
        Ok(())
    }

    fn cap_hit(&mut self, cap: CapKind, node: NodeId) -> Result<(), NdhcError> {
        if self.tree.params.strict {
            return Err(NdhcError::CapExceeded(cap, node));
        }
        let ev = CapEvent { cap, node };
        if self.tree.events.last() != Some(&ev) {
            log::debug!("cap {cap:?} hit at node {node}");
            self.tree.events.push(ev);
        }
        Ok(())
    }

    fn expand(&mut self, c: NodeId, level: usize, samples: usize) -> Result<(), NdhcError> {
        if let Some(obs) = self.observer.as_deref_mut() {
            obs.before_cluster(&self.tree, c);
        }
        let k = self.tree.num_vertices;
        let set = merge::bitset_of(&self.tree.nodes[c].set, k);
        let bound = self.tree.scale(level + 1);
        let sampled: Vec<BoundedPartition> = (0..samples)
            .map(|i| {
                let mut rng = stage_rng(self.tree.params.seed, "ndhc", &[c as u64, i as u64]);
                sample_bounded_partition(self.dual.adjacency(), &set, bound, &mut rng)
            })
            .collect::<Result<_, _>>()?;
        let required = match self.observer.as_deref_mut() {
            Some(obs) => obs.required(&self.tree, c, &sampled),
            None => Vec::new(),
        };
        let edges: Vec<(VertexId, VertexId)> = self
            .tree
            .dual_edges
            .iter()
            .copied()
            .filter(|&(u, v)| u != v && set.contains(u) && set.contains(v))
            .collect();
        let z2 = 2 * self.tree.params.z;
        let mut made: BTreeMap<(usize, Vec<usize>), NodeId> = BTreeMap::new();
        let mut by_parts: BTreeMap<Parts, NodeId> = BTreeMap::new();
        let mut full = false;
        'samples: for (i, pi) in sampled.iter().enumerate() {
            let kp = pi.parts.len();
            let mut tried = 0;
            // The unmerged sample first, then by increasing size.
            let sizes = std::iter::once(kp)
                .filter(|&s| s <= z2)
                .chain((1..=z2.min(kp)).filter(|&s| s != kp));
            for size in sizes {
                for kappa in (0..kp).combinations(size) {
                    if tried == self.tree.params.cap_kappa {
                        self.cap_hit(CapKind::Kappa, c)?;
                        continue 'samples;
                    }
                    tried += 1;
                    let parts = merge_parts(&pi.parts, &kappa, &edges, k);
                    if let Some(&p) = by_parts.get(&parts) {
                        made.insert((i, kappa), p);
                        continue;
                    }
                    if by_parts.len() >= self.tree.params.cap_partitions {
                        self.cap_hit(CapKind::Partitions, c)?;
                        full = true;
                    } else if self.tree.nodes.len() >= self.tree.params.cap_nodes {
                        self.cap_hit(CapKind::Nodes, c)?;
                        full = true;
                    }
                    if full {
                        break 'samples;
                    }
                    let origin = Origin {
                        sample: i,
                        kappa: kappa.clone(),
                    };
                    let p = self.add_partition(c, parts.clone(), false, Some(origin));
                    by_parts.insert(parts, p);
                    made.insert((i, kappa), p);
                }
            }
        }
        for (i, kappa) in required {
            if made.contains_key(&(i, kappa.clone())) {
                continue;
            }
            let parts = merge_parts(&sampled[i].parts, &kappa, &edges, k);
            let p = match by_parts.get(&parts) {
                Some(&p) => p,
                None => {
                    let origin = Origin {
                        sample: i,
                        kappa: kappa.clone(),
                    };
                    let p = self.add_partition(c, parts.clone(), false, Some(origin));
                    by_parts.insert(parts, p);
                    p
                }
            };
            made.insert((i, kappa), p);
        }
        self.tree.samples.insert(c, sampled);
        if let Some(obs) = self.observer.as_deref_mut() {
            obs.after_cluster(&self.tree, c, &made);
        }
        Ok(())
    }

    fn add_partition(
        &mut self,
        c: NodeId,
        parts: Parts,
        shattering: bool,
        origin: Option<Origin>,
    ) -> NodeId {
        let parent = &self.tree.nodes[c];
        let level = parent.level + 1;
        let depth = parent.depth + 1;
        let set = parent.set.clone();
        let p = self.tree.nodes.len();
        self.tree.nodes.push(Node {
            parent: Some(c),
            children: Vec::new(),
            level,
            depth,
            kind: Kind::Partition { shattering },
            set,
            origin,
        });
        self.tree.nodes[c].children.push(p);
        for part in parts {
            let id = self.tree.nodes.len();
            self.tree.nodes.push(Node {
                parent: Some(p),
                children: Vec::new(),
                level,
                depth: depth + 1,
                kind: Kind::Cluster,
                set: part,
                origin: None,
            });
            self.tree.nodes[p].children.push(id);
        }
        p
    }
}

impl NdhcTree {
    fn finalize(&mut self) {
        let n = self.nodes.len();
        let k = self.num_vertices;
        let faces = self.face_vertices.len();
        self.part_label = vec![Vec::new(); n];
        self.plus_label = vec![Vec::new(); n];
        self.boundary = vec![FixedBitSet::with_capacity(faces); n];
        self.boundary_plus = vec![FixedBitSet::with_capacity(faces); n];
        // Parents precede children in id order.
        for p in 0..n {
            if self.nodes[p].kind == Kind::Cluster {
                continue;
            }
            let mut local = vec![u32::MAX; k];
            for (i, &c) in self.nodes[p].children.iter().enumerate() {
                for &v in &self.nodes[c].set {
                    local[v] = i as u32;
                }
            }
            let mut plus = match self.grandparent(p) {
                Some(gp) => self.plus_label[gp].clone(),
                None => vec![usize::MAX; k],
            };
            for &c in &self.nodes[p].children {
                for &v in &self.nodes[c].set {
                    plus[v] = c;
                }
            }
            let mut b = FixedBitSet::with_capacity(faces);
            let mut bp = FixedBitSet::with_capacity(faces);
            for (s, fv) in self.face_vertices.iter().enumerate() {
                if fv.iter().all(|&v| local[v] != u32::MAX)
                    && fv.iter().any(|&v| local[v] != local[fv[0]])
                {
                    b.insert(s);
                }
                if fv.iter().any(|&v| plus[v] != plus[fv[0]]) {
                    bp.insert(s);
                }
            }
            self.part_label[p] = local;
            self.plus_label[p] = plus;
            self.boundary[p] = b;
            self.boundary_plus[p] = bp;
        }
        self.tin = vec![0; n];
        self.tout = vec![0; n];
        let mut clock = 0;
        let mut stack = vec![(0usize, false)];
        while let Some((x, done)) = stack.pop() {
            if done {
                self.tout[x] = clock;
                continue;
            }
            self.tin[x] = clock;
            clock += 1;
            stack.push((x, true));
            for &ch in self.nodes[x].children.iter().rev() {
                stack.push((ch, false));
            }
        }
    }

    /// Partition node two levels up, if any.
    fn grandparent(&self, x: NodeId) -> Option<NodeId> {
        self.nodes[x].parent.and_then(|c| self.nodes[c].parent)
    }

    pub fn params(&self) -> &NdhcParams {
        &self.params
    }

    pub fn diameter(&self) -> u64 {
        self.diameter
    }

    /// Last construction level, `ceil(log2 diameter)`.
    pub fn top_level(&self) -> usize {
        self.top_level
    }

    /// `diameter / 2^level`.
    pub fn scale(&self, level: usize) -> f64 {
        self.diameter as f64 / 2f64.powi(level as i32)
    }

    pub fn events(&self) -> &[CapEvent] {
        &self.events
    }

    /// Bounded partitions sampled at cluster `c`.
    pub fn samples(&self, c: NodeId) -> Option<&[BoundedPartition]> {
        self.samples.get(&c).map(|v| v.as_slice())
    }

    pub fn num_dual_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_faces(&self) -> usize {
        self.face_vertices.len()
    }

    pub fn dual_edge(&self, e: usize) -> (VertexId, VertexId) {
        self.dual_edges[e]
    }
}

#[cfg(test)]
mod tests;
