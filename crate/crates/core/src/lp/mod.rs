//! The lifted linear program over a clustering and its profile sets.

mod encode;
mod exact;
mod export;
mod solve;

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::ndhc::{NdhcTree, NodeId};
use crate::planar::{DualGraph, VertexId};
use crate::profiles::{aplus_pair, Profiles};

pub use encode::encode_integral;
pub use exact::solve_exact;
pub use export::to_lp_format;
pub use solve::{residuals, residuals_exact, solve_alpha_sweep, solve_lp, LpSolution, SolveStatus, Solver};

#[derive(Debug, Error)]
pub enum LpError {
    #[error("no profile set for partition node {0}")]
    MissingProfiles(NodeId),
    #[error("profile of node {0} restricts outside the parent's profile set")]
    InconsistentProfiles(NodeId),
    #[error("LP is infeasible")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("cycle is not amenable under the forcing: {0}")]
    NotAmenable(String),
    #[error("model has {0} variables, above the exact solver limit {1}")]
    TooLargeForExact(usize, usize),
}

/// A face subset `{s}` or `∅` (`inside`), or a subset of `{s, t}` as two flags.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Var {
    /// `x({p}, S)`, `S` the `s`-th profile of `p`.
    X1 { p: NodeId, s: usize },
    /// `x({a, b}, S)` for partition nodes in different child subtrees of their lca, `a < b`.
    X2 { a: NodeId, b: NodeId, faces: Vec<VertexId> },
    Z { p: NodeId, s: VertexId, inside: bool, w: usize },
    Y { p: NodeId, s: VertexId, t: VertexId, d: (bool, bool), w: usize },
    /// `y({s, t})`, `s < t`.
    Yst { s: VertexId, t: VertexId },
}

impl Var {
    pub fn is_x(&self) -> bool {
        matches!(self, Var::X1 { .. } | Var::X2 { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RowKind {
    RootPin,
    Assign { c: NodeId, w: usize },
    ZDef,
    YDef,
    Marginal,
    YstDef,
    Lift { p: NodeId, w: usize, s: VertexId, t: VertexId },
    Alpha,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub kind: RowKind,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    /// Right-hand side; only the alpha row has a non-integral value.
    pub rhs: f64,
}

/// Cost and demand of a dual face pair `{s, t}`, `s < t`.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PairInfo {
    pub cost: u64,
    pub demand: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpModel {
    pub vars: Vec<Var>,
    #[serde(skip)]
    index: BTreeMap<Var, usize>,
    pub rows: Vec<Row>,
    /// Objective coefficient per variable (nonzero only on `y({s,t})`).
    pub objective: Vec<u64>,
    pub alpha: f64,
    #[serde(skip)]
    pub pairs: BTreeMap<(VertexId, VertexId), PairInfo>,
}

impl LpModel {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var(&self, v: &Var) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn upper(&self, i: usize) -> Option<f64> {
        self.vars[i].is_x().then_some(1.0)
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    /// Rebuilds the model with a different demand threshold.
    pub fn with_alpha(&self, alpha: f64) -> LpModel {
        let mut m = self.clone();
        m.alpha = alpha;
        for r in &mut m.rows {
            if r.kind == RowKind::Alpha {
                r.rhs = alpha;
            }
        }
        m
    }

    fn add_var(&mut self, v: Var) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.vars.len();
        self.vars.push(v.clone());
        self.index.insert(v, i);
        self.objective.push(0);
        i
    }
}

/// Cost and demand per face pair: primal edges (parallel costs summed) and demand pairs.
pub fn face_pairs(dual: &DualGraph) -> BTreeMap<(VertexId, VertexId), PairInfo> {
    let mut pairs: BTreeMap<(VertexId, VertexId), PairInfo> = BTreeMap::new();
    for e in dual.primal().edges() {
        if e.u != e.v {
            pairs.entry((e.u.min(e.v), e.u.max(e.v))).or_default().cost += e.cost;
        }
    }
    for (s, t, d) in dual.demands().iter() {
        if d > 0 && s != t {
            pairs.entry((s.min(t), s.max(t))).or_default().demand += d;
        }
    }
    pairs
}

/// One summand `x(member, S)` of a pair sum, with its face set.
struct Term {
    var: usize,
    faces: Vec<VertexId>,
}

struct Builder<'a> {
    tree: &'a NdhcTree,
    profiles: &'a Profiles,
    model: LpModel,
    x2_cache: BTreeMap<(NodeId, NodeId), Vec<usize>>,
}

fn restrict(faces: &[VertexId], set: &FixedBitSet) -> Vec<VertexId> {
    faces.iter().copied().filter(|&f| set.contains(f)).collect()
}

impl Builder<'_> {
    fn x1(&mut self, p: NodeId, s: usize) -> usize {
        self.model.add_var(Var::X1 { p, s })
    }

    /// Terms `x(member, S)` over all `S` for a member `{a, b}` of a pair collection.
    fn member_terms(&mut self, a: NodeId, b: NodeId) -> Vec<Term> {
        let tree = self.tree;
        let deeper = if tree.is_ancestor(a, b) {
            Some(b)
        } else if tree.is_ancestor(b, a) {
            Some(a)
        } else {
            None
        };
        if let Some(q) = deeper {
            let set = self.profiles.get(q);
            return (0..set.len())
                .map(|s| Term {
                    var: self.x1(q, s),
                    faces: set.profiles[s].faces.clone(),
                })
                .collect();
        }
        let (a, b) = (a.min(b), a.max(b));
        let vars = match self.x2_cache.get(&(a, b)) {
            Some(v) => v.clone(),
            None => {
                let sets = aplus_pair(tree, self.profiles, a, b);
                let v: Vec<usize> = sets
                    .into_iter()
                    .map(|faces| self.model.add_var(Var::X2 { a, b, faces }))
                    .collect();
                self.x2_cache.insert((a, b), v.clone());
                v
            }
        };
        vars.into_iter()
            .map(|var| {
                let Var::X2 { faces, .. } = &self.model.vars[var] else {
                    unreachable!()
                };
                Term {
                    var,
                    faces: faces.clone(),
                }
            })
            .collect()
    }

    fn position(&self, p: NodeId, faces: &[VertexId]) -> Result<usize, LpError> {
        self.profiles
            .get(p)
            .position(faces)
            .ok_or(LpError::InconsistentProfiles(p))
    }
}

/// Builds every variable and constraint family for demand threshold `alpha`.
pub fn build_lp(
    tree: &NdhcTree,
    dual: &DualGraph,
    profiles: &Profiles,
    alpha: f64,
) -> Result<LpModel, LpError> {
    for p in tree.partition_nodes() {
        if profiles.iter().all(|(&q, _)| q != p) {
            return Err(LpError::MissingProfiles(p));
        }
    }
    let pairs = face_pairs(dual);
    let mut b = Builder {
        tree,
        profiles,
        model: LpModel {
            vars: Vec::new(),
            index: BTreeMap::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            alpha,
            pairs: pairs.clone(),
        },
        x2_cache: BTreeMap::new(),
    };
    let partitions: Vec<NodeId> = tree.partition_nodes().collect();
    for &p in &partitions {
        for s in 0..profiles.get(p).len() {
            b.x1(p, s);
        }
    }

    // Root pin.
    let root = tree.root();
    let empty = b.position(root, &[])?;
    let v = b.x1(root, empty);
    b.model.rows.push(Row {
        kind: RowKind::RootPin,
        terms: vec![(v, 1)],
        sense: Sense::Eq,
        rhs: 1.0,
    });

    // Child choice at each cluster.
    for c in tree.cluster_nodes() {
        let node = tree.node(c);
        if node.children.is_empty() {
            continue;
        }
        let p = node.parent.expect("clusters have a parent");
        let bp = tree.boundary_plus(p);
        let mut sums: Vec<Vec<(usize, i64)>> = (0..profiles.get(p).len())
            .map(|w| vec![(b.x1(p, w), 1)])
            .collect();
        for &q in &node.children {
            for (s, prof) in profiles.get(q).profiles.iter().enumerate() {
                let w = b.position(p, &restrict(&prof.faces, bp))?;
                let v = b.x1(q, s);
                sums[w].push((v, -1));
            }
        }
        for (w, terms) in sums.into_iter().enumerate() {
            b.model.rows.push(Row {
                kind: RowKind::Assign { c, w },
                terms,
                sense: Sense::Eq,
                rhs: 0.0,
            });
        }
    }

    // Partition nodes whose boundary holds each face.
    let faces_used: BTreeSet<VertexId> = pairs.keys().flat_map(|&(s, t)| [s, t]).collect();
    let mut holders: BTreeMap<VertexId, Vec<NodeId>> = BTreeMap::new();
    for &p in &partitions {
        for s in tree.boundary(p).ones() {
            if faces_used.contains(&s) {
                holders.entry(s).or_default().push(p);
            }
        }
    }

    // Pair collections: members {a, b} below p with a partition-node lca. The y,
    // marginal and lift rows range over all such members; y({s,t}) counts each member
    // once, at its lca.
    let mut z_needed: BTreeSet<(NodeId, VertexId)> = BTreeSet::new();
    let mut y_index: BTreeSet<(NodeId, VertexId, VertexId)> = BTreeSet::new();
    let mut member_cache: BTreeMap<(NodeId, NodeId), Vec<Term>> = BTreeMap::new();
    for &(s, t) in pairs.keys() {
        let (Some(hs), Some(ht)) = (holders.get(&s), holders.get(&t)) else {
            continue;
        };
        let above = |hold: &[NodeId]| -> BTreeSet<NodeId> {
            hold.iter().flat_map(|&a| tree.partn_path(a)).collect()
        };
        let (as_, at) = (above(hs), above(ht));
        let yst = b.model.add_var(Var::Yst { s, t });
        let mut yst_row = vec![(yst, 1)];
        for &p in as_.intersection(&at) {
            let bp = tree.boundary_plus(p).clone();
            let np = profiles.get(p).len();
            let mut sums: Vec<[Vec<usize>; 4]> = vec![Default::default(); np];
            let mut any = false;
            for &a in hs.iter().filter(|&&a| tree.is_ancestor(p, a)) {
                for &c in ht.iter().filter(|&&c| tree.is_ancestor(p, c)) {
                    let l = tree.lca(a, c);
                    if !tree.is_partition(l) {
                        continue;
                    }
                    any = true;
                    let key = (a.min(c), a.max(c));
                    if !member_cache.contains_key(&key) {
                        let terms = b.member_terms(key.0, key.1);
                        member_cache.insert(key, terms);
                    }
                    for term in &member_cache[&key] {
                        let w = b.position(p, &restrict(&term.faces, &bp))?;
                        let ins = term.faces.binary_search(&s).is_ok();
                        let int = term.faces.binary_search(&t).is_ok();
                        sums[w][ins as usize | (int as usize) << 1].push(term.var);
                        if l == p && ins != int {
                            yst_row.push((term.var, -1));
                        }
                    }
                }
            }
            if !any {
                continue;
            }
            z_needed.insert((p, s));
            z_needed.insert((p, t));
            y_index.insert((p, s, t));
            for (w, by_d) in sums.iter().enumerate() {
                let mut lift = vec![(b.x1(p, w), 1)];
                for (d, xs) in by_d.iter().enumerate() {
                    let y = b.model.add_var(Var::Y {
                        p,
                        s,
                        t,
                        d: (d & 1 == 1, d & 2 == 2),
                        w,
                    });
                    let mut terms = vec![(y, 1)];
                    terms.extend(xs.iter().map(|&x| (x, -1)));
                    b.model.rows.push(Row {
                        kind: RowKind::YDef,
                        terms,
                        sense: Sense::Eq,
                        rhs: 0.0,
                    });
                    lift.extend(xs.iter().map(|&x| (x, -1)));
                }
                b.model.rows.push(Row {
                    kind: RowKind::Lift { p, w, s, t },
                    terms: merge_terms(lift),
                    sense: Sense::Eq,
                    rhs: 0.0,
                });
            }
        }
        b.model.rows.push(Row {
            kind: RowKind::YstDef,
            terms: yst_row,
            sense: Sense::Eq,
            rhs: 0.0,
        });
    }

    // Single-face projections, for the faces and nodes some pair variable uses.
    for &(p, s) in &z_needed {
        let bp = tree.boundary_plus(p).clone();
        let np = profiles.get(p).len();
        let mut sums: Vec<[Vec<usize>; 2]> = vec![Default::default(); np];
        for &q in &holders[&s] {
            if !tree.is_ancestor(p, q) {
                continue;
            }
            for (k, prof) in profiles.get(q).profiles.iter().enumerate() {
                let w = b.position(p, &restrict(&prof.faces, &bp))?;
                let inside = prof.faces.binary_search(&s).is_ok() as usize;
                let v = b.x1(q, k);
                sums[w][inside].push(v);
            }
        }
        for (w, by_d) in sums.iter().enumerate() {
            for (inside, xs) in by_d.iter().enumerate() {
                let z = b.model.add_var(Var::Z {
                    p,
                    s,
                    inside: inside == 1,
                    w,
                });
                let mut terms = vec![(z, 1)];
                terms.extend(xs.iter().map(|&x| (x, -1)));
                b.model.rows.push(Row {
                    kind: RowKind::ZDef,
                    terms,
                    sense: Sense::Eq,
                    rhs: 0.0,
                });
            }
        }
    }

    // Marginals: each face's projection agrees with every pair it belongs to.
    for &(p, s, t) in &y_index {
        for w in 0..profiles.get(p).len() {
            for (face, bit) in [(s, 1usize), (t, 2usize)] {
                for inside in [false, true] {
                    let z = b.model.var(&Var::Z { p, s: face, inside, w }).expect("z registered");
                    let mut terms = vec![(z, 1)];
                    for d in 0..4usize {
                        if ((d & bit) != 0) == inside {
                            let y = b
                                .model
                                .var(&Var::Y { p, s, t, d: (d & 1 == 1, d & 2 == 2), w })
                                .expect("y registered");
                            terms.push((y, -1));
                        }
                    }
                    b.model.rows.push(Row {
                        kind: RowKind::Marginal,
                        terms,
                        sense: Sense::Eq,
                        rhs: 0.0,
                    });
                }
            }
        }
    }

    // Demand threshold and objective.
    let mut alpha_terms = Vec::new();
    for (&(s, t), info) in &pairs {
        let Some(y) = b.model.var(&Var::Yst { s, t }) else {
            continue;
        };
        b.model.objective[y] = info.cost;
        if info.demand > 0 {
            alpha_terms.push((y, info.demand as i64));
        }
    }
    b.model.rows.push(Row {
        kind: RowKind::Alpha,
        terms: alpha_terms,
        sense: Sense::Ge,
        rhs: alpha,
    });
    Ok(b.model)
}

fn merge_terms(terms: Vec<(usize, i64)>) -> Vec<(usize, i64)> {
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for (v, c) in terms {
        *acc.entry(v).or_default() += c;
    }
    acc.into_iter().filter(|&(_, c)| c != 0).collect()
}

/// Powers of `1 + eps` from `lo` up to `hi`.
pub fn alpha_grid(eps: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut a = lo.max(f64::MIN_POSITIVE);
    while a <= hi * (1.0 + 1e-12) {
        out.push(a);
        a *= 1.0 + eps;
    }
    out
}

#[cfg(test)]
mod tests;
