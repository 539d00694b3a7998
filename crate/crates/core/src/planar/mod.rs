//! Embedded planar graphs, their duals, and the correspondence between simple cuts of the
//! primal and simple cycles of the dual.

mod cycle;
mod dual;
mod graph;
mod instance;
mod separation;
mod sparsity;

pub use cycle::{ClosedWalk, DualCycle};
pub use dual::DualGraph;
pub use graph::{dart_edge, reverse, Dart, Edge, EdgeId, FaceId, PlanarGraph, VertexId};
pub use instance::{Demands, Instance, InstanceFile};
pub use separation::{check_parity, check_separation_cover, select_sparse_cycle};
pub use sparsity::{sparsity, CutResult, Sparsity};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanarError {
    #[error("graph is not connected")]
    Disconnected,
    #[error("rotation system fails Euler's formula: V - E + F = {vertices} - {edges} + {faces} != 2")]
    EulerViolation {
        vertices: usize,
        edges: usize,
        faces: usize,
    },
    #[error("invalid rotation system: {0}")]
    InvalidRotation(String),
    #[error("edge {edge} has an endpoint outside 0..{n}")]
    VertexOutOfRange { edge: usize, n: usize },
    #[error("edge {0} has non-positive cost")]
    NonPositiveCost(usize),
    #[error("invalid demand: {0}")]
    InvalidDemand(String),
    #[error("vertex set must be nonempty and proper")]
    EmptyOrFullSet,
    #[error("not simple: {0}")]
    NotSimple(String),
    #[error("not a closed walk: {0}")]
    NotClosedWalk(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("instance parse error: {0}")]
    Parse(String),
}
