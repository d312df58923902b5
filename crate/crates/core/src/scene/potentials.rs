use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::angle::wrap_positive;
use crate::error::{Error, Result};
use crate::graph::{GraphTopology, NodeId, NodeKind};
use crate::particle::{SeededRng, StateVector};
use crate::potentials::Potentials;

use super::generate::Scene;
use super::geometry::{PartSizes, PatternParams};
use super::init::{init_particles, uniform_state};
use super::pairwise::{pairwise_density, pairwise_sample, EdgeClass, MIN_SIZE};
use super::raster::BinaryImage;
use super::unary::unary_phi;

/// Default detection threshold on `phi` for initial particles.
pub const DEFAULT_INIT_THRESHOLD: f64 = 0.4;

/// Potentials of the articulated pattern observed in one binary image.
#[derive(Debug, Clone)]
pub struct PatternPotentials {
    pub image: BinaryImage,
    pub params: PatternParams,
    pub sizes: PartSizes,
    pub init_threshold: f64,
    kinds: BTreeMap<NodeId, NodeKind>,
}

impl PatternPotentials {
    pub fn new(graph: &GraphTopology, image: BinaryImage, params: PatternParams, sizes: PartSizes) -> Self {
        let kinds = graph.nodes().map(|id| (id, graph.kind(id).unwrap())).collect();
        PatternPotentials {
            image,
            params,
            sizes,
            init_threshold: DEFAULT_INIT_THRESHOLD,
            kinds,
        }
    }

    pub fn for_scene(graph: &GraphTopology, scene: &Scene, params: PatternParams) -> Self {
        PatternPotentials::new(graph, scene.image.clone(), params, scene.sizes)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.init_threshold = threshold;
        self
    }

    fn kind(&self, id: NodeId) -> Result<NodeKind> {
        self.kinds.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    pub fn edge_class(&self, given: NodeId, target: NodeId) -> Result<EdgeClass> {
        EdgeClass::between((given, self.kind(given)?), (target, self.kind(target)?))
    }
}

impl Potentials for PatternPotentials {
    fn unary(&self, node: NodeId, state: &StateVector) -> f64 {
        match self.kinds.get(&node) {
            Some(&kind) => unary_phi(state, &self.image, kind),
            None => 0.0,
        }
    }

    fn pairwise_sample(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        rng: &mut SeededRng,
    ) -> Result<StateVector> {
        pairwise_sample(self.edge_class(given, target)?, given_state, &self.params, rng)
    }

    fn pairwise_density(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        target_state: &StateVector,
    ) -> Result<f64> {
        pairwise_density(self.edge_class(given, target)?, given_state, target_state, &self.params)
    }

    fn explore(&self, node: NodeId, rng: &mut SeededRng) -> StateVector {
        let kind = self.kinds.get(&node).copied().unwrap_or(NodeKind::Generic { dim: 0 });
        uniform_state(&self.image, kind, &self.sizes, rng)
    }

    fn prior(&self, node: NodeId, count: usize, rng: &mut SeededRng) -> Vec<StateVector> {
        let kind = self.kinds.get(&node).copied().unwrap_or(NodeKind::Generic { dim: 0 });
        init_particles(&self.image, kind, &self.sizes, self.init_threshold, count, rng)
    }

    /// Gaussian move with `scale` times the pairwise noise levels: `sigma_p`
    /// on position, `sigma_alpha` on orientation, `sigma_s` on sizes.
    fn perturb(&self, node: NodeId, state: &StateVector, scale: f64, rng: &mut SeededRng) -> StateVector {
        let p = &self.params;
        let mut noise = |sigma: f64| scale * sigma * rng.sample::<f64, _>(StandardNormal);
        let mut out = state.to_vec();
        match self.kinds.get(&node) {
            Some(NodeKind::Circle) if out.len() == 3 => {
                out[0] += noise(p.sigma_p);
                out[1] += noise(p.sigma_p);
                out[2] = (out[2] + noise(p.sigma_s)).max(MIN_SIZE);
            }
            Some(NodeKind::InnerLink | NodeKind::OuterLink) if out.len() == 5 => {
                out[0] += noise(p.sigma_p);
                out[1] += noise(p.sigma_p);
                out[2] = wrap_positive(out[2] + noise(p.sigma_alpha));
                out[3] = (out[3] + noise(p.sigma_s)).max(MIN_SIZE);
                out[4] = (out[4] + noise(p.sigma_s)).max(MIN_SIZE);
            }
            _ => {}
        }
        StateVector::from(out)
    }
}
