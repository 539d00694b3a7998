use fixedbitset::FixedBitSet;

use super::{LpError, LpModel, RowKind, Var};
use crate::ndhc::{Forcing, NdhcTree};
use crate::profiles::{restrict, Profiles};

/// The 0/1 point of a cycle (given by its enclosed face set) under a forcing.
///
/// `x({p}, S) = 1` exactly for retained `p` with `S = inside ∩ ∂⁺(p)`; derived variables are
/// evaluated from their defining rows.
pub fn encode_integral(
    model: &LpModel,
    tree: &NdhcTree,
    profiles: &Profiles,
    enclosed: &FixedBitSet,
    forcing: &Forcing,
) -> Result<Vec<i64>, LpError> {
    let retained = forcing
        .retained(tree)
        .map_err(|e| LpError::NotAmenable(e.to_string()))?;
    let mut is_retained = FixedBitSet::with_capacity(tree.len());
    for &p in &retained {
        is_retained.insert(p);
        let faces = restrict(enclosed, tree.boundary_plus(p));
        if profiles.get(p).position(&faces).is_none() {
            return Err(LpError::NotAmenable(format!(
                "profile {faces:?} is not realizable at node {p}"
            )));
        }
    }
    let mut values = vec![0i64; model.num_vars()];
    for (i, v) in model.vars.iter().enumerate() {
        values[i] = match v {
            Var::X1 { p, s } => {
                let want = restrict(enclosed, tree.boundary_plus(*p));
                (is_retained.contains(*p) && profiles.get(*p).profiles[*s].faces == want) as i64
            }
            Var::X2 { a, b, faces } => {
                let mut both = tree.boundary_plus(*a).clone();
                both.union_with(tree.boundary_plus(*b));
                let want = restrict(enclosed, &both);
                (is_retained.contains(*a) && is_retained.contains(*b) && *faces == want) as i64
            }
            _ => 0,
        };
    }
    for row in &model.rows {
        if matches!(row.kind, RowKind::ZDef | RowKind::YDef | RowKind::YstDef) {
            let (head, c) = row.terms[0];
            debug_assert_eq!(c, 1);
            values[head] = row.terms[1..].iter().map(|&(v, c)| -c * values[v]).sum();
        }
    }
    Ok(values)
}
