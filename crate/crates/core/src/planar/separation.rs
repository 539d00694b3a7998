use fixedbitset::FixedBitSet;

use super::{ClosedWalk, DualCycle, DualGraph, PlanarError, Sparsity};

/// Each edge occurs an odd number of times across `cs` iff it lies on `c0`.
pub fn check_parity(dual: &DualGraph, c0: &ClosedWalk, cs: &[ClosedWalk]) -> bool {
    let m = dual.num_edges();
    let mut acc = FixedBitSet::with_capacity(m);
    for c in cs {
        acc.symmetric_difference_with(&c.odd_edges(m));
    }
    acc == c0.odd_edges(m)
}

/// Every positive-demand pair separated by `c0` is separated by at least one walk in `cs`.
pub fn check_separation_cover(dual: &DualGraph, c0: &ClosedWalk, cs: &[ClosedWalk]) -> bool {
    let side0 = c0.side(dual);
    let sides: Vec<FixedBitSet> = cs.iter().map(|c| c.side(dual)).collect();
    dual.demands()
        .iter()
        .filter(|&(s, t, _)| side0.contains(s) != side0.contains(t))
        .all(|(s, t, _)| sides.iter().any(|side| side.contains(s) != side.contains(t)))
}

/// Picks a walk whose side has sparsity at most `(1 + eps)` times that of `c0`, given that
/// `cs` jointly separates everything `c0` separates at total cost at most `(1 + eps) cost(c0)`.
pub fn select_sparse_cycle(
    dual: &DualGraph,
    c0: &DualCycle,
    cs: &[ClosedWalk],
    eps: f64,
) -> Result<usize, PlanarError> {
    if !check_separation_cover(dual, c0.walk(), cs) {
        return Err(PlanarError::PreconditionViolated(
            "walks do not cover the demand separated by c0".into(),
        ));
    }
    let total: u128 = cs.iter().map(|c| c.cost(dual)).sum();
    let budget = (1.0 + eps) * c0.cost(dual) as f64;
    if total as f64 > budget * (1.0 + 1e-12) {
        return Err(PlanarError::PreconditionViolated(format!(
            "total cost {total} exceeds (1 + {eps}) * {}",
            c0.cost(dual)
        )));
    }
    let base = c0.objective(dual).sparsity;
    let (best, best_sparsity) = cs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let side = c.side(dual);
            let cost: u128 = dual
                .primal()
                .cut_edges(&side)
                .iter()
                .map(|&e| dual.edge(e).cost as u128)
                .sum();
            (i, Sparsity::new(cost, dual.demands().separated(&side)))
        })
        .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or_else(|| PlanarError::PreconditionViolated("no candidate walks".into()))?;
    let within = match (best_sparsity, base) {
        (Sparsity::Finite(b), Sparsity::Finite(s)) => {
            (*b.numer() as f64) * (*s.denom() as f64)
                <= (1.0 + eps) * (*s.numer() as f64) * (*b.denom() as f64) * (1.0 + 1e-12)
        }
        (_, Sparsity::Infinite) => true,
        (Sparsity::Infinite, Sparsity::Finite(_)) => false,
    };
    if !within {
        return Err(PlanarError::PreconditionViolated(format!(
            "best walk has sparsity {best_sparsity}, above (1 + {eps}) * {base}"
        )));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn square_setup() -> (DualGraph, DualCycle) {
        let inst = fixtures::square(1);
        let dual = DualGraph::new(&inst, 3).unwrap();
        let mut u = FixedBitSet::with_capacity(4);
        u.insert(0);
        let c0 = DualCycle::from_cut(&dual, &u).unwrap();
        (dual, c0)
    }

    #[test]
    fn identity_cover() {
        let (dual, c0) = square_setup();
        let cs = vec![c0.walk().clone()];
        assert!(check_separation_cover(&dual, c0.walk(), &cs));
        assert!(check_parity(&dual, c0.walk(), &cs));
        assert_eq!(select_sparse_cycle(&dual, &c0, &cs, 0.0).unwrap(), 0);
    }

    #[test]
    fn empty_cover_fails_when_demand_is_separated() {
        let (dual, c0) = square_setup();
        assert!(c0.objective(&dual).demand > 0);
        assert!(!check_separation_cover(&dual, c0.walk(), &[]));
        assert!(select_sparse_cycle(&dual, &c0, &[], 0.5).is_err());
    }

    #[test]
    fn over_budget_is_rejected() {
        let (dual, c0) = square_setup();
        let cs = vec![c0.walk().clone(), c0.walk().clone()];
        assert!(matches!(
            select_sparse_cycle(&dual, &c0, &cs, 0.5),
            Err(PlanarError::PreconditionViolated(_))
        ));
        assert_eq!(select_sparse_cycle(&dual, &c0, &cs, 1.0).unwrap(), 0);
    }
}
