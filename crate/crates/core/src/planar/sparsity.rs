use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;
use num_rational::Ratio;
use serde::Serialize;

use super::{Instance, PlanarError, VertexId};

/// Cut cost over separated demand, exact. Zero separated demand is infinitely sparse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sparsity {
    Finite(Ratio<u128>),
    Infinite,
}

impl Sparsity {
    pub fn new(cost: u128, demand: u128) -> Self {
        if demand == 0 {
            Sparsity::Infinite
        } else {
            Sparsity::Finite(Ratio::new(cost, demand))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Sparsity::Finite(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Sparsity::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Sparsity::Infinite => f64::INFINITY,
        }
    }

    /// `self / other` as a float; `None` when undefined.
    pub fn ratio_to(&self, other: &Sparsity) -> Option<f64> {
        match (self, other) {
            (Sparsity::Finite(a), Sparsity::Finite(b)) => {
                if *b.numer() == 0 {
                    if *a.numer() == 0 {
                        Some(1.0)
                    } else {
                        None
                    }
                } else {
                    let q = a / b;
                    Some(*q.numer() as f64 / *q.denom() as f64)
                }
            }
            _ => None,
        }
    }
}

impl Ord for Sparsity {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Sparsity::Finite(a), Sparsity::Finite(b)) => a.cmp(b),
            (Sparsity::Finite(_), Sparsity::Infinite) => Ordering::Less,
            (Sparsity::Infinite, Sparsity::Finite(_)) => Ordering::Greater,
            (Sparsity::Infinite, Sparsity::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Sparsity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sparsity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sparsity::Finite(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Sparsity::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Sparsity::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Sparsity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A vertex set with its cut cost, separated demand and sparsity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutResult {
    pub set: Vec<VertexId>,
    pub cost: u128,
    pub demand: u128,
    pub sparsity: Sparsity,
}

impl CutResult {
    pub fn bitset(&self, n: usize) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        for &v in &self.set {
            b.insert(v);
        }
        b
    }
}

/// Evaluates the cut `delta(U)` for a nonempty proper vertex set `U`.
pub fn sparsity(instance: &Instance, set: &FixedBitSet) -> Result<CutResult, PlanarError> {
    let n = instance.num_vertices();
    let size = set.ones().filter(|&v| v < n).count();
    if size == 0 || size == n {
        return Err(PlanarError::EmptyOrFullSet);
    }
    let cost: u128 = instance
        .graph
        .edges()
        .iter()
        .filter(|e| set.contains(e.u) != set.contains(e.v))
        .map(|e| e.cost as u128)
        .sum();
    let demand = instance.demands.separated(set);
    Ok(CutResult {
        set: set.ones().filter(|&v| v < n).collect(),
        cost,
        demand,
        sparsity: Sparsity::new(cost, demand),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinite_last() {
        let a = Sparsity::new(3, 2);
        let b = Sparsity::new(2, 1);
        assert!(a < b);
        assert!(b < Sparsity::Infinite);
        assert_eq!(Sparsity::new(4, 2), Sparsity::new(2, 1));
    }

    #[test]
    fn display_is_reduced() {
        assert_eq!(Sparsity::new(6, 4).to_string(), "3/2");
        assert_eq!(Sparsity::new(6, 3).to_string(), "2");
        assert_eq!(Sparsity::new(6, 0).to_string(), "inf");
    }
}
