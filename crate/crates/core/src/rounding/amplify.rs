use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::RoundingError;
use crate::planar::{sparsity, CutResult, Instance};

/// `(a+b)(b+d) + (a+c)(c+d)` for a point of the probability simplex.
pub fn decoupling_lhs(a: f64, b: f64, c: f64, d: f64) -> Result<f64, RoundingError> {
    let on = [a, b, c, d].iter().all(|&v| v >= -1e-12) && ((a + b + c + d) - 1.0).abs() <= 1e-9;
    if !on {
        return Err(RoundingError::NotOnSimplex(a, b, c, d));
    }
    Ok((a + b) * (b + d) + (a + c) * (c + d))
}

#[derive(Clone, Debug, Serialize)]
pub struct AmplifyResult {
    pub best: CutResult,
    /// Cost and demand of every finite sample, in draw order.
    pub samples: Vec<(u128, u128)>,
    pub draws: usize,
}

impl AmplifyResult {
    /// Total cost over total demand of the kept samples.
    pub fn ratio_of_sums(&self) -> f64 {
        let (c, d) = self
            .samples
            .iter()
            .fold((0u128, 0u128), |(c, d), &(x, y)| (c + x, d + y));
        c as f64 / d as f64
    }
}

/// The sparsest of `n` finite-sparsity samples. Samples separating no demand are redrawn,
/// up to `10 n` draws in total.
pub fn amplify<F>(mut sampler: F, n: usize) -> Result<AmplifyResult, RoundingError>
where
    F: FnMut(usize) -> Option<CutResult>,
{
    let budget = 10 * n.max(1);
    let mut best: Option<CutResult> = None;
    let mut samples = Vec::new();
    let mut draws = 0;
    while samples.len() < n && draws < budget {
        let cut = sampler(draws);
        draws += 1;
        let Some(cut) = cut.filter(|c| c.sparsity.is_finite()) else {
            continue;
        };
        samples.push((cut.cost, cut.demand));
        if best.as_ref().is_none_or(|b| cut.sparsity < b.sparsity) {
            best = Some(cut);
        }
    }
    match best {
        Some(best) => Ok(AmplifyResult { best, samples, draws }),
        None => Err(RoundingError::AllInfinite(draws)),
    }
}

fn complement(set: &FixedBitSet) -> FixedBitSet {
    let mut c = set.clone();
    c.toggle_range(..);
    c
}

/// The sparsest simple cut among the component sides of `U`: each connected component `K`
/// of either side, then `V ∖ K'` for each component `K'` of `G - K`. `None` when `U` is
/// empty or everything.
pub fn simple_cut_from_faces(inst: &Instance, set: &FixedBitSet) -> Option<CutResult> {
    let n = inst.num_vertices();
    let size = set.ones().filter(|&v| v < n).count();
    if size == 0 || size == n {
        return None;
    }
    let g = &inst.graph;
    let mut best: Option<CutResult> = None;
    for side in [set.clone(), complement(set)] {
        for k in g.induced_components(&side) {
            for k2 in g.induced_components(&complement(&k)) {
                let cand = complement(&k2);
                let Ok(cut) = sparsity(inst, &cand) else { continue };
                let better = match &best {
                    None => true,
                    Some(b) => (cut.sparsity, cut.set.len(), &cut.set) < (b.sparsity, b.set.len(), &b.set),
                };
                if better {
                    best = Some(cut);
                }
            }
        }
    }
    best
}
