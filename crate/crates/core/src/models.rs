//! Small analytic models for exercising the engines.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::graph::{GraphSpec, GraphTopology, NodeId, NodeKind};
use crate::particle::{SeededRng, StateVector};
use crate::potentials::Potentials;

/// Scalar chain: `psi(x_t | x_s) = N(x_t; x_s, coupling^2)` on every edge,
/// optional Gaussian-bump unary potentials, and uniform exploration over
/// `domain`.
#[derive(Debug, Clone)]
pub struct GaussianChain {
    pub coupling: f64,
    /// `(center, width)` of `exp(-(x - center)^2 / (2 width^2))` per node;
    /// nodes without an entry have `phi = 1`.
    pub bumps: Vec<(NodeId, f64, f64)>,
    pub domain: (f64, f64),
}

impl GaussianChain {
    /// A path graph over `n` scalar nodes with ids `0..n`.
    pub fn graph(n: u32) -> GraphTopology {
        let spec = GraphSpec {
            nodes: (0..n).map(|i| (NodeId(i), NodeKind::Generic { dim: 1 })).collect(),
            edges: (1..n).map(|i| (NodeId(i - 1), NodeId(i))).collect(),
        };
        GraphTopology::build(&spec).expect("chain is valid")
    }

    pub fn bump(&self, node: NodeId, x: f64) -> f64 {
        self.bumps
            .iter()
            .find(|(id, _, _)| *id == node)
            .map_or(1.0, |&(_, c, w)| (-(x - c).powi(2) / (2.0 * w * w)).exp())
    }
}

impl Potentials for GaussianChain {
    fn unary(&self, node: NodeId, state: &StateVector) -> f64 {
        self.bump(node, state[0])
    }

    fn pairwise_sample(
        &self,
        _given: NodeId,
        _target: NodeId,
        given_state: &StateVector,
        rng: &mut SeededRng,
    ) -> Result<StateVector> {
        let z: f64 = rng.sample(StandardNormal);
        Ok(StateVector::new([given_state[0] + self.coupling * z]))
    }

    fn pairwise_density(
        &self,
        _given: NodeId,
        _target: NodeId,
        given_state: &StateVector,
        target_state: &StateVector,
    ) -> Result<f64> {
        let d = (target_state[0] - given_state[0]) / self.coupling;
        Ok((-0.5 * d * d).exp() / (self.coupling * (2.0 * std::f64::consts::PI).sqrt()))
    }

    fn explore(&self, _node: NodeId, rng: &mut SeededRng) -> StateVector {
        StateVector::new([rng.random_range(self.domain.0..self.domain.1)])
    }

    fn prior(&self, node: NodeId, count: usize, rng: &mut SeededRng) -> Vec<StateVector> {
        (0..count).map(|_| self.explore(node, rng)).collect()
    }
}
