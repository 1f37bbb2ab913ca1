//! Constructive certificates for the standard families, and transformers
//! that turn certificates for one `(G, S, T)` into certificates for another.

mod generators;
mod transforms;

pub use generators::{
    cert_complete_bipartite, cert_even_cycle, cert_linear_forest_reduction, cert_odd_cycle,
    cert_path, complete_bipartite_plan, even_cycle_plan, linear_forest_post_shields, path_plan,
};
pub use transforms::{
    cert_append_vertex, cert_components, cert_kcore_lift, lift_certificate, lift_ops,
    lift_ops_traced, scale_certificate,
};

use serde::Serialize;
use thiserror::Error;

use crate::engine::{Op, ReplayFailure, State};
use crate::graph::{GraphError, Vertex};

/// A certificate written as consecutive runs of one repeated op.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct StagedPlan {
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub op: Op,
    pub count: u32,
}

impl StagedPlan {
    pub fn push(&mut self, op: Op, count: u32) {
        if count > 0 {
            self.stages.push(Stage { op, count });
        }
    }

    pub fn shades(&mut self, u: Vertex, count: u32) {
        self.push(Op::shade(u), count);
    }

    pub fn total_ops(&self) -> u64 {
        self.stages.iter().map(|s| s.count as u64).sum()
    }

    pub fn ops(&self) -> Vec<Op> {
        self.stages
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.op.clone(), s.count as usize))
            .collect()
    }
}

/// A plan together with the (possibly non-uniform) state it starts from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub start: State,
    pub plan: StagedPlan,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertError {
    #[error("invalid parameters for {generator}: {reason}")]
    InvalidParameters {
        generator: &'static str,
        reason: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("the given set is not independent")]
    NotIndependent,
    #[error("vertex {0} has degree at least 3 but is not in the set")]
    HighDegreeOutside(Vertex),
    #[error("removing the set does not leave a linear forest")]
    NotLinearForest,
    #[error("component of order {order} is shorter than the required {required}")]
    ComponentTooShort { order: usize, required: usize },
    #[error("shield {shield} of vertex {vertex} is below the required {needed}")]
    ShieldTooSmall {
        vertex: Vertex,
        shield: u64,
        needed: u64,
    },
    #[error("vertex {vertex}: {reason}")]
    Pointwise { vertex: Vertex, reason: String },
    #[error("base certificate is not complete: {0}")]
    BaseNotComplete(String),
    #[error("component mismatch: {0}")]
    ComponentMismatch(String),
    #[error("lifted op {index} is not legal ({failure:?}); this is a bug")]
    LiftFailed {
        index: usize,
        failure: ReplayFailure,
    },
}
