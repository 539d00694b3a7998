//! Approximate non-uniform sparsest cut on planar graphs through the planar dual, a
//! nondeterministic hierarchical clustering, a lifted linear program and randomized rounding.
//!
//! Exact oracles and verification harnesses for the structural lemmas ship alongside.

pub mod fixtures;
pub mod paths;
pub mod planar;
pub mod rng;
pub mod oracle;
pub mod reductions;
pub mod rounding;
pub mod ldd;
pub mod lp;
pub mod ndhc;
pub mod profiles;
pub mod patch;
pub mod verify;
