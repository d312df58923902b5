//! Nonparametric belief propagation on continuous pairwise MRFs.
//!
//! Messages are weighted particle sets updated by *pulling*: candidate
//! states are drawn from the recipient's belief and scored against the
//! sender's evidence, which avoids sampling products of Gaussian mixtures.
//! A Gaussian-mixture *push* baseline with Gibbs-sampled products lives in
//! [`baseline`], and [`scene`] provides the articulated-pattern testbed
//! used to compare them.
//!
//! ```
//! use pmpnbp::engine::{run_inference, EngineConfig};
//! use pmpnbp::graph::NodeId;
//! use pmpnbp::models::GaussianChain;
//!
//! let graph = GaussianChain::graph(3);
//! let model = GaussianChain {
//!     coupling: 1.0,
//!     bumps: vec![(NodeId(0), 2.0, 0.5)],
//!     domain: (-6.0, 8.0),
//! };
//! let config = EngineConfig { particles: 100, iterations: 5, ..EngineConfig::default() };
//! let trace = run_inference(&graph, &model, config).unwrap();
//! assert_eq!(trace.records.len(), 6);
//! ```

pub mod angle;
pub mod baseline;
pub mod engine;
pub mod error;
pub mod graph;
pub mod models;
pub mod particle;
pub mod potentials;
pub mod scene;
pub mod trace;

pub use error::{Error, Result};
pub use graph::{GraphSpec, GraphTopology, NodeId, NodeKind, Slot};
pub use particle::{SeededRng, StateVector, WeightedParticleSet};
pub use potentials::Potentials;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/getting-started.md")]
    mod getting_started {}
    #[doc = include_str!("../../../book/src/particles.md")]
    mod particles {}
    #[doc = include_str!("../../../book/src/pull-engine.md")]
    mod pull_engine {}
    #[doc = include_str!("../../../book/src/baseline.md")]
    mod baseline {}
    #[doc = include_str!("../../../book/src/pattern.md")]
    mod pattern {}
}
