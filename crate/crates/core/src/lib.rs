//! Community deception: rewire a graph under an edge-update budget so that a
//! target community is no longer recovered by community detection.
//!
//! The main deceptor ([`neural`]) greedily applies the edge update with the
//! largest network permanence loss. Baseline deceptors, two built-in detectors,
//! the evaluation metrics, a planted-partition generator and an experiment
//! harness complete the closed loop.

pub mod baselines;
pub mod centrality;
pub mod datasets;
pub mod detect;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod neural;
pub mod par;
pub mod partition;
pub mod permanence;
pub mod plan;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod update;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use partition::{CommunityId, Partition};
pub use plan::{Budget, UpdatePlan};
pub use update::{EdgeUpdate, UpdateKind};
