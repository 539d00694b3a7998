//! Random strong-diameter bounded partitions by exponential-radius ball carving.

use fixedbitset::FixedBitSet;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::paths::CostGraph;
use crate::planar::VertexId;
use crate::rng::stage_rng;

#[derive(Debug, Error, PartialEq)]
pub enum LddError {
    #[error("partition bound must be positive, got {0}")]
    NonpositiveBound(f64),
    #[error("part {part} has strong diameter {diameter:?}, bound {bound}")]
    Unbounded {
        part: usize,
        diameter: Option<u64>,
        bound: f64,
    },
    #[error("parts do not partition the input set")]
    NotAPartition,
}

#[derive(Clone, Debug, Serialize)]
pub struct LddConfig {
    pub beta_target: f64,
    pub seed: u64,
}

impl Default for LddConfig {
    fn default() -> Self {
        LddConfig {
            beta_target: 8.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedPartition {
    /// Parts in carving order, each sorted.
    pub parts: Vec<Vec<VertexId>>,
    pub bound: f64,
}

impl BoundedPartition {
    pub fn part_of(&self, n: usize) -> Vec<usize> {
        let mut label = vec![usize::MAX; n];
        for (i, p) in self.parts.iter().enumerate() {
            for &v in p {
                label[v] = i;
            }
        }
        label
    }
}

/// Carves `set` into balls. Each round picks a uniform remaining centre, draws a radius from
/// the exponential law with rate `2 ln(|set| + 1) / bound` conditioned on `[0, bound / 2]`,
/// and removes the ball measured inside the remaining induced subgraph.
pub fn sample_bounded_partition<R: Rng>(
    g: &CostGraph,
    set: &FixedBitSet,
    bound: f64,
    rng: &mut R,
) -> Result<BoundedPartition, LddError> {
    if !(bound > 0.0) {
        return Err(LddError::NonpositiveBound(bound));
    }
    let size = set.count_ones(..);
    let rate = 2.0 * ((size + 1) as f64).ln() / bound;
    let mass = 1.0 - (-rate * bound / 2.0).exp();
    let mut remaining = set.clone();
    let mut parts = Vec::new();
    let mut left = size;
    while left > 0 {
        let k = rng.gen_range(0..left);
        let centre = remaining.ones().nth(k).expect("k < remaining count");
        let u: f64 = rng.gen();
        let radius = (-(1.0 - u * mass).ln() / rate).min(bound / 2.0);
        let tree = g.dijkstra(centre, &remaining, Some(radius));
        let part: Vec<VertexId> = remaining
            .ones()
            .filter(|&v| tree.dist[v].is_some_and(|d| d as f64 <= radius))
            .collect();
        for &v in &part {
            remaining.set(v, false);
        }
        left -= part.len();
        parts.push(part);
    }
    Ok(BoundedPartition { parts, bound })
}

/// Hard check: disjoint parts covering `set`, each of strong diameter at most the bound.
pub fn verify_bounded(
    g: &CostGraph,
    set: &FixedBitSet,
    partition: &BoundedPartition,
) -> Result<(), LddError> {
    let mut seen = FixedBitSet::with_capacity(set.len());
    for p in &partition.parts {
        for &v in p {
            if !set.contains(v) || seen.contains(v) {
                return Err(LddError::NotAPartition);
            }
            seen.insert(v);
        }
    }
    if seen != *set {
        return Err(LddError::NotAPartition);
    }
    for (i, p) in partition.parts.iter().enumerate() {
        let mut mask = FixedBitSet::with_capacity(set.len());
        for &v in p {
            mask.insert(v);
        }
        let diameter = g.strong_diameter(&mask);
        if diameter.is_none_or(|d| d as f64 > partition.bound) {
            return Err(LddError::Unbounded {
                part: i,
                diameter,
                bound: partition.bound,
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaEstimate {
    pub bound: f64,
    pub samples: usize,
    /// Per edge `(u, v, cost, cut frequency)`.
    pub edges: Vec<(VertexId, VertexId, u64, f64)>,
    /// `max_e freq(e) * bound / cost(e)`.
    pub beta_hat: f64,
}

/// Samples `samples` partitions of all vertices of `g`, asserting boundedness of each, and
/// fits the smallest `beta` with `Pr[e cut] <= beta cost(e) / bound` for every edge.
pub fn estimate_beta(
    g: &CostGraph,
    edges: &[(VertexId, VertexId, u64)],
    bound: f64,
    samples: usize,
    seed: u64,
) -> Result<BetaEstimate, LddError> {
    let set = g.full_set();
    let n = g.num_vertices();
    let counts = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stage_rng(seed, "ldd", &[i as u64]);
            let p = sample_bounded_partition(g, &set, bound, &mut rng)?;
            verify_bounded(g, &set, &p)?;
            let label = p.part_of(n);
            Ok(edges
                .iter()
                .map(|&(u, v, _)| (label[u] != label[v]) as u64)
                .collect::<Vec<u64>>())
        })
        .try_reduce(
            || vec![0; edges.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    let edges: Vec<_> = edges
        .iter()
        .zip(counts)
        .map(|(&(u, v, c), k)| (u, v, c, k as f64 / samples as f64))
        .collect();
    let beta_hat = edges
        .iter()
        .map(|&(_, _, c, f)| f * bound / c as f64)
        .fold(0.0, f64::max);
    Ok(BetaEstimate {
        bound,
        samples,
        edges,
        beta_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::grid_drawing;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(k: usize) -> (CostGraph, Vec<(usize, usize, u64)>) {
        let d = grid_drawing(k, k);
        (CostGraph::from_edges(k * k, &d.edges), d.edges)
    }

    #[test]
    fn small_bound_gives_singletons() {
        let (g, _) = grid(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sample_bounded_partition(&g, &g.full_set(), 0.5, &mut rng).unwrap();
        assert_eq!(p.parts.len(), 9);
    }

    #[test]
    fn nonpositive_bound_is_rejected() {
        let (g, _) = grid(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            sample_bounded_partition(&g, &g.full_set(), 0.0, &mut rng).unwrap_err(),
            LddError::NonpositiveBound(0.0)
        );
    }

    #[test]
    fn samples_are_bounded_on_subsets() {
        let (g, _) = grid(4);
        let mut set = g.full_set();
        set.set(5, false);
        set.set(6, false);
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for bound in [1.0, 2.0, 3.0, 6.0] {
                let p = sample_bounded_partition(&g, &set, bound, &mut rng).unwrap();
                verify_bounded(&g, &set, &p).unwrap();
            }
        }
    }

    #[test]
    fn beta_estimate_is_finite() {
        let (g, edges) = grid(3);
        let est = estimate_beta(&g, &edges, 2.0, 500, 3).unwrap();
        assert!(est.beta_hat > 0.0 && est.beta_hat.is_finite());
    }
}
