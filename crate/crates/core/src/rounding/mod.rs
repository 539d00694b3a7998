//! Top-down randomized rounding of a solved LP, amplification and the end-to-end pipeline.

mod amplify;
mod pipeline;

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lp::{LpModel, Var};
use crate::ndhc::{NdhcTree, NodeId};
use crate::profiles::{restrict, Profiles};

pub use amplify::{amplify, decoupling_lhs, simple_cut_from_faces, AmplifyResult};
pub use pipeline::{first_lp, pipeline, AlphaRecord, GuessRecord, PipelineConfig, PipelineError, PipelineReport};

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error("conditional mass {got} at cluster {cluster} deviates from {want}")]
    DegenerateMass { cluster: NodeId, got: f64, want: f64 },
    #[error("point ({0}, {1}, {2}, {3}) is not on the probability simplex")]
    NotOnSimplex(f64, f64, f64, f64),
    #[error("no sample separated any demand within {0} draws")]
    AllInfinite(usize),
}

/// One weighted alternative: child partition node, its profile index, LP mass.
#[derive(Clone, Debug)]
struct Choice {
    child: NodeId,
    profile: usize,
    mass: f64,
}

/// Conditional distributions of the rounding, precomputed from a solution.
#[derive(Clone, Debug)]
pub struct RoundingPlan {
    /// `(cluster, parent profile)` to alternatives.
    table: BTreeMap<(NodeId, usize), Vec<Choice>>,
    /// `x({p}, W)` per partition node and profile.
    parent_mass: BTreeMap<(NodeId, usize), f64>,
    /// Profile faces, for building `U`.
    faces: BTreeMap<(NodeId, usize), Vec<usize>>,
    num_faces: usize,
    tolerance: f64,
}

impl RoundingPlan {
    pub fn new(
        tree: &NdhcTree,
        profiles: &Profiles,
        model: &LpModel,
        values: &[f64],
        tolerance: f64,
    ) -> Self {
        let x1 = |p: NodeId, s: usize| -> f64 {
            model
                .var(&Var::X1 { p, s })
                .map_or(0.0, |i| values[i].max(0.0))
        };
        let mut table: BTreeMap<(NodeId, usize), Vec<Choice>> = BTreeMap::new();
        let mut parent_mass = BTreeMap::new();
        let mut faces = BTreeMap::new();
        for p in tree.partition_nodes() {
            for (s, prof) in profiles.get(p).profiles.iter().enumerate() {
                parent_mass.insert((p, s), x1(p, s));
                faces.insert((p, s), prof.faces.clone());
            }
        }
        for c in tree.cluster_nodes() {
            let node = tree.node(c);
            let Some(p) = node.parent else { continue };
            if node.children.is_empty() {
                continue;
            }
            let bp = tree.boundary_plus(p);
            for &q in &node.children {
                for (s, prof) in profiles.get(q).profiles.iter().enumerate() {
                    let w_faces: Vec<usize> = prof.faces.iter().copied().filter(|&f| bp.contains(f)).collect();
                    let Some(w) = profiles.get(p).position(&w_faces) else {
                        continue;
                    };
                    table.entry((c, w)).or_default().push(Choice {
                        child: q,
                        profile: s,
                        mass: x1(q, s),
                    });
                }
            }
        }
        RoundingPlan {
            table,
            parent_mass,
            faces,
            num_faces: tree.num_faces(),
            tolerance,
        }
    }
}

/// The choices of one rounding run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RoundingTrace {
    /// Chosen child partition per non-leaf cluster reached.
    pub chosen: BTreeMap<NodeId, NodeId>,
    /// Chosen profile index per relevant partition node.
    pub profile: BTreeMap<NodeId, usize>,
    /// The face set `U`.
    pub faces: Vec<usize>,
}

impl RoundingTrace {
    pub fn face_set(&self, num_faces: usize) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(num_faces);
        for &f in &self.faces {
            b.insert(f);
        }
        b
    }
}

fn pick<R: Rng>(weights: impl Iterator<Item = f64> + Clone, total: f64, rng: &mut R) -> usize {
    let r = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = i;
            acc += w;
            if r < acc {
                return i;
            }
        }
    }
    last
}

/// Rounds top-down from the root partition, whose profile is `∅`.
pub fn round_topdown<R: Rng>(
    tree: &NdhcTree,
    plan: &RoundingPlan,
    rng: &mut R,
) -> Result<RoundingTrace, RoundingError> {
    let mut trace = RoundingTrace::default();
    let mut u = FixedBitSet::with_capacity(plan.num_faces);
    let root = tree.root();
    trace.profile.insert(root, 0);
    let mut stack = vec![(root, 0usize)];
    while let Some((p, w)) = stack.pop() {
        let want = plan.parent_mass[&(p, w)];
        for &c in &tree.node(p).children {
            if tree.node(c).children.is_empty() {
                continue;
            }
            let choices = plan.table.get(&(c, w)).map(Vec::as_slice).unwrap_or(&[]);
            let got: f64 = choices.iter().map(|ch| ch.mass).sum();
            if got <= 0.0 || (got - want).abs() > 10.0 * plan.tolerance * want.max(1.0) {
                return Err(RoundingError::DegenerateMass { cluster: c, got, want });
            }
            // Child with probability proportional to its total mass, then a profile
            // proportional to x: equivalent to one draw over (child, profile).
            let k = pick(choices.iter().map(|ch| ch.mass), got, rng);
            let ch = &choices[k];
            trace.chosen.insert(c, ch.child);
            trace.profile.insert(ch.child, ch.profile);
            for &f in &plan.faces[&(ch.child, ch.profile)] {
                u.insert(f);
            }
            stack.push((ch.child, ch.profile));
        }
    }
    trace.faces = u.ones().collect();
    Ok(trace)
}

/// `U ∩ ∂⁺(p)` for a trace; equals the chosen profile at every relevant `p`.
pub fn trace_is_consistent(tree: &NdhcTree, profiles: &Profiles, trace: &RoundingTrace) -> bool {
    let u = trace.face_set(tree.num_faces());
    trace
        .profile
        .iter()
        .all(|(&p, &s)| restrict(&u, tree.boundary_plus(p)) == profiles.get(p).profiles[s].faces)
}

#[cfg(test)]
mod tests;
